//! Simulated speaker/air/microphone path.
//!
//! Pipeline order: frequency response with notches, then gain, then
//! additive white Gaussian noise at a whole-buffer SNR, then hard clipping.
//! Output is a pure function of (spec, input); the seed drives the noise.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dsp::PcmBuffer;
use crate::{Error, Result};

/// Notch floor gain and half-width of the floor region.
pub const NOTCH_FLOOR: f64 = 0.001;
pub const NOTCH_HALF_WIDTH_HZ: f64 = 30.0;
/// Raised-cosine return from the floor to unity outside the half-width.
pub const NOTCH_SKIRT_HZ: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    /// `None` disables noise.
    pub snr_db: Option<f64>,
    /// `(Hz, linear gain)` points, linearly interpolated and held flat beyond
    /// the ends. Empty means a flat unity response.
    pub response: Vec<(f64, f64)>,
    pub notches: Vec<f64>,
    pub gain: f64,
    pub clip: f64,
    pub seed: u64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            snr_db: None,
            response: Vec::new(),
            notches: Vec::new(),
            gain: 1.0,
            clip: 1.0,
            seed: 0,
        }
    }
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.response.iter().any(|&(f, g)| !(f >= 0.0) || !(g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidConfig("response points need f >= 0 and gain >= 0".into()));
        }
        if self.notches.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::InvalidConfig("notch frequencies must be positive".into()));
        }
        if !(self.gain >= 0.0) || !self.gain.is_finite() {
            return Err(Error::InvalidConfig(format!("gain {} must be >= 0", self.gain)));
        }
        if !(self.clip > 0.0 && self.clip <= 1.0) {
            return Err(Error::InvalidConfig(format!("clip {} must lie in (0, 1]", self.clip)));
        }
        if matches!(self.snr_db, Some(s) if s.is_nan()) {
            return Err(Error::InvalidConfig("snr is NaN".into()));
        }
        Ok(())
    }

    fn is_flat(&self) -> bool {
        self.notches.is_empty() && self.response.iter().all(|&(_, g)| g == 1.0)
    }

    /// Magnitude response at `freq_hz`, notches included.
    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        gain_with(&self.sorted_response(), &self.notches, freq_hz)
    }

    fn sorted_response(&self) -> Vec<(f64, f64)> {
        let mut pts = self.response.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    }

    /// Parses `key = value` lines. Keys: `snr_db`, `gain`, `clip`, `seed`,
    /// `notch` (repeatable), `notches` (comma list), `response`
    /// (comma list of `hz:gain`). `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = ChannelSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::InvalidArgument(format!("channel spec line {}: {msg}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad(&format!("bad number `{v}`")));
            match key {
                "snr_db" | "snr" => {
                    spec.snr_db = match value {
                        "none" | "inf" => None,
                        v => Some(num(v)?),
                    }
                }
                "gain" => spec.gain = num(value)?,
                "clip" => spec.clip = num(value)?,
                "seed" => spec.seed = value.parse().map_err(|_| bad("bad seed"))?,
                "notch" => spec.notches.push(num(value)?),
                "notches" => {
                    for v in value.split(',').filter(|v| !v.trim().is_empty()) {
                        spec.notches.push(num(v)?);
                    }
                }
                "response" => {
                    for pair in value.split(',').filter(|v| !v.trim().is_empty()) {
                        let (f, g) = pair.split_once(':').ok_or_else(|| bad("response point needs hz:gain"))?;
                        spec.response.push((num(f)?, num(g)?));
                    }
                }
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.snr_db {
            Some(s) => writeln!(out, "snr_db = {s}").unwrap(),
            None => writeln!(out, "snr_db = none").unwrap(),
        }
        writeln!(out, "gain = {}", self.gain).unwrap();
        writeln!(out, "clip = {}", self.clip).unwrap();
        writeln!(out, "seed = {}", self.seed).unwrap();
        for n in &self.notches {
            writeln!(out, "notch = {n}").unwrap();
        }
        if !self.response.is_empty() {
            let pts: Vec<String> = self.response.iter().map(|(f, g)| format!("{f}:{g}")).collect();
            writeln!(out, "response = {}", pts.join(", ")).unwrap();
        }
        out
    }
}

fn gain_with(pts: &[(f64, f64)], notches: &[f64], freq_hz: f64) -> f64 {
    let base = match pts {
        [] => 1.0,
        [(_, g)] => *g,
        [first, ..] if freq_hz <= first.0 => first.1,
        [.., last] if freq_hz >= last.0 => last.1,
        _ => {
            let i = pts.partition_point(|p| p.0 <= freq_hz);
            let (f0, g0) = pts[i - 1];
            let (f1, g1) = pts[i];
            g0 + (g1 - g0) * (freq_hz - f0) / (f1 - f0)
        }
    };
    notches.iter().fold(base, |g, &c| g * notch_gain(freq_hz, c))
}

fn notch_gain(freq_hz: f64, center_hz: f64) -> f64 {
    let d = (freq_hz - center_hz).abs();
    if d <= NOTCH_HALF_WIDTH_HZ {
        NOTCH_FLOOR
    } else if d < NOTCH_HALF_WIDTH_HZ + NOTCH_SKIRT_HZ {
        let x = (d - NOTCH_HALF_WIDTH_HZ) / NOTCH_SKIRT_HZ;
        let w = 0.5 * (1.0 - (PI * x).cos());
        NOTCH_FLOOR + (1.0 - NOTCH_FLOOR) * w
    } else {
        1.0
    }
}

/// Zero-phase magnitude shaping by multiplication in the frequency domain
/// over the whole zero-padded buffer.
fn shape(samples: &[f64], sample_rate: u32, spec: &ChannelSpec) -> Vec<f64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let nfft = (2 * n).next_power_of_two();
    let mut data: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
    data.resize(nfft, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(nfft).process(&mut data);
    let df = sample_rate as f64 / nfft as f64;
    let pts = spec.sorted_response();
    for (k, c) in data.iter_mut().enumerate() {
        let bin = if k <= nfft / 2 { k } else { nfft - k };
        *c *= gain_with(&pts, &spec.notches, bin as f64 * df);
    }
    planner.plan_fft_inverse(nfft).process(&mut data);
    let scale = 1.0 / nfft as f64;
    data[..n].iter().map(|c| c.re * scale).collect()
}

fn mean_power(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64
}

/// Adds seeded Gaussian noise with variance `power / 10^(snr/10)` in place.
fn add_noise(samples: &mut [f64], snr_db: f64, seed: u64) -> Result<()> {
    if snr_db == f64::INFINITY {
        return Ok(());
    }
    let power = mean_power(samples);
    if power == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in samples.iter_mut() {
        *s += normal.sample(&mut rng);
    }
    Ok(())
}

/// Adds white Gaussian noise at `snr_db` relative to the buffer's mean power.
/// `f64::INFINITY` returns the input unchanged. Samples are limited to
/// [-1, 1] afterwards, as any PCM path would.
pub fn awgn(buf: &PcmBuffer, snr_db: f64, seed: u64) -> Result<PcmBuffer> {
    let mut samples = buf.samples().to_vec();
    add_noise(&mut samples, snr_db, seed)?;
    PcmBuffer::from_clamped(samples, buf.sample_rate())
}

pub fn apply_channel(spec: &ChannelSpec, buf: &PcmBuffer) -> Result<PcmBuffer> {
    spec.validate()?;
    let mut samples = if spec.is_flat() {
        buf.samples().to_vec()
    } else {
        shape(buf.samples(), buf.sample_rate(), spec)
    };
    if spec.gain != 1.0 {
        for s in &mut samples {
            *s *= spec.gain;
        }
    }
    if let Some(snr) = spec.snr_db {
        add_noise(&mut samples, snr, spec.seed)?;
    }
    for s in &mut samples {
        *s = s.clamp(-spec.clip, spec.clip);
    }
    PcmBuffer::from_clamped(samples, buf.sample_rate())
}
