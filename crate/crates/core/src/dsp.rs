//! Signal primitives: tone synthesis, mixing, concatenation and single-bin
//! energy estimation.
//!
//! Energy is the squared magnitude of the complex projection
//! `sum x[n] * exp(-i w n)` over a window, without 1/N normalisation. All
//! decision thresholds elsewhere are relative, so only consistency matters.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 44100;

/// Raised-cosine onset/offset ramp applied to every synthesized burst.
pub const RAMP_S: f64 = 0.002;

/// Mono PCM samples in [-1, 1] plus their sample rate.
#[derive(Clone, Debug, PartialEq)]
pub struct PcmBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl PcmBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSampleRate);
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !s.is_finite() || s.abs() > 1.0)
        {
            return Err(Error::SampleOutOfRange { index, value });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Builds a buffer by clamping every sample into [-1, 1].
    pub fn from_clamped(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let samples = samples
            .into_iter()
            .map(|s| if s.is_nan() { 0.0 } else { s.clamp(-1.0, 1.0) })
            .collect();
        Self::new(samples, sample_rate)
    }

    pub fn silence(len: usize, sample_rate: u32) -> Self {
        Self {
            samples: vec![0.0; len],
            sample_rate,
        }
    }

    pub fn empty(sample_rate: u32) -> Self {
        Self::silence(0, sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Multiplies every sample by `gain` in [0, 1].
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gain) {
            return Err(Error::InvalidAmplitude(gain));
        }
        Ok(Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        })
    }

    /// Copy of `len` samples starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let w = WindowSpec::new(start, len);
        w.check(self.len())?;
        Ok(Self {
            samples: self.samples[start..start + len].to_vec(),
            sample_rate: self.sample_rate,
        })
    }

    /// Surrounds the buffer with `before` and `after` samples of silence.
    pub fn padded(&self, before: usize, after: usize) -> Self {
        let mut samples = vec![0.0; before];
        samples.extend_from_slice(&self.samples);
        samples.resize(samples.len() + after, 0.0);
        Self {
            samples,
            sample_rate: self.sample_rate,
        }
    }
}

/// Analysis window `[start, start + length)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowSpec {
    pub start: usize,
    pub length: usize,
}

impl WindowSpec {
    pub fn new(start: usize, length: usize) -> Self {
        Self { start, length }
    }

    pub fn whole(buf: &PcmBuffer) -> Self {
        Self::new(0, buf.len())
    }

    pub fn check(&self, buf_len: usize) -> Result<()> {
        if self.length == 0 || self.start.checked_add(self.length).is_none_or(|e| e > buf_len) {
            return Err(Error::WindowOutOfBounds {
                start: self.start,
                len: self.length,
                buf_len,
            });
        }
        Ok(())
    }
}

/// Number of samples in `duration_s` at `sample_rate`, rounded to nearest.
pub fn samples_for(duration_s: f64, sample_rate: u32) -> usize {
    (duration_s * sample_rate as f64).round() as usize
}

pub fn check_frequency(freq_hz: f64, sample_rate: u32) -> Result<()> {
    let nyquist_hz = sample_rate as f64 / 2.0;
    if !(freq_hz > 0.0 && freq_hz < nyquist_hz) {
        return Err(Error::InvalidFrequency { freq_hz, nyquist_hz });
    }
    Ok(())
}

/// Ramp length in samples for a burst of `n` samples.
pub fn ramp_len(n: usize, sample_rate: u32) -> usize {
    samples_for(RAMP_S, sample_rate).min(n / 2)
}

/// Applies raised-cosine fade-in and fade-out of `ramp` samples each.
pub fn apply_ramp(samples: &mut [f64], ramp: usize) {
    let n = samples.len();
    let ramp = ramp.min(n / 2);
    for i in 0..ramp {
        let w = 0.5 * (1.0 - (PI * i as f64 / ramp as f64).cos());
        samples[i] *= w;
        samples[n - 1 - i] *= w;
    }
}

/// `n` samples of a ramped sinusoid starting at zero phase. No validation.
pub fn tone_samples(freq_hz: f64, n: usize, amplitude: f64, sample_rate: u32) -> Vec<f64> {
    let w = 2.0 * PI * freq_hz / sample_rate as f64;
    let mut out: Vec<f64> = (0..n).map(|i| amplitude * (w * i as f64).sin()).collect();
    apply_ramp(&mut out, ramp_len(n, sample_rate));
    out
}

pub fn synth_tone(freq_hz: f64, duration_s: f64, amplitude: f64, sample_rate: u32) -> Result<PcmBuffer> {
    if sample_rate == 0 {
        return Err(Error::InvalidSampleRate);
    }
    check_frequency(freq_hz, sample_rate)?;
    if !(duration_s > 0.0) {
        return Err(Error::InvalidDuration(duration_s));
    }
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(Error::InvalidAmplitude(amplitude));
    }
    let n = samples_for(duration_s, sample_rate);
    Ok(PcmBuffer {
        samples: tone_samples(freq_hz, n, amplitude, sample_rate),
        sample_rate,
    })
}

fn common_rate(buffers: &[PcmBuffer]) -> Result<u32> {
    let first = buffers.first().ok_or(Error::EmptyInput)?.sample_rate;
    for b in buffers {
        if b.sample_rate != first {
            return Err(Error::SampleRateMismatch(first, b.sample_rate));
        }
    }
    Ok(first)
}

/// Element-wise mean of the inputs; shorter inputs are zero-padded.
pub fn mix(buffers: &[PcmBuffer]) -> Result<PcmBuffer> {
    let sample_rate = common_rate(buffers)?;
    let len = buffers.iter().map(PcmBuffer::len).max().unwrap_or(0);
    let scale = 1.0 / buffers.len() as f64;
    let mut samples = vec![0.0; len];
    for b in buffers {
        for (acc, s) in samples.iter_mut().zip(&b.samples) {
            *acc += s;
        }
    }
    for s in &mut samples {
        *s *= scale;
    }
    Ok(PcmBuffer {
        samples,
        sample_rate,
    })
}

pub fn concat(buffers: &[PcmBuffer]) -> Result<PcmBuffer> {
    let sample_rate = common_rate(buffers)?;
    let samples = buffers.iter().flat_map(|b| b.samples.iter().copied()).collect();
    Ok(PcmBuffer {
        samples,
        sample_rate,
    })
}

/// Goertzel recurrence over a raw slice.
pub fn goertzel(samples: &[f64], freq_hz: f64, sample_rate: u32) -> f64 {
    let w = 2.0 * PI * freq_hz / sample_rate as f64;
    let coeff = 2.0 * w.cos();
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for &x in samples {
        let s0 = x + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    (s1 * s1 + s2 * s2 - coeff * s1 * s2).max(0.0)
}

/// Complex projection `sum x[n] exp(-i w n)`, n counted from the slice
/// start. Its squared magnitude is [`goertzel`].
pub fn dft_bin(samples: &[f64], freq_hz: f64, sample_rate: u32) -> Complex64 {
    let w = 2.0 * PI * freq_hz / sample_rate as f64;
    let coeff = 2.0 * w.cos();
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for &x in samples {
        let s0 = x + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    let y = Complex64::new(s1, 0.0) - Complex64::from_polar(s2, -w);
    y * Complex64::from_polar(1.0, -w * samples.len().saturating_sub(1) as f64)
}

/// Single-frequency energy over `window` using the Goertzel recurrence.
pub fn goertzel_power(buf: &PcmBuffer, freq_hz: f64, window: WindowSpec) -> Result<f64> {
    check_frequency(freq_hz, buf.sample_rate)?;
    window.check(buf.len())?;
    let s = &buf.samples[window.start..window.start + window.length];
    Ok(goertzel(s, freq_hz, buf.sample_rate))
}

/// Reference for [`goertzel_power`]: the same energy by direct correlation
/// with cosine and sine at the probe frequency. O(N) per probe with a
/// trigonometric call per sample; intended for tests and cross-checks.
pub fn dft_power_oracle(buf: &PcmBuffer, freq_hz: f64, window: WindowSpec) -> Result<f64> {
    check_frequency(freq_hz, buf.sample_rate)?;
    window.check(buf.len())?;
    let w = 2.0 * PI * freq_hz / buf.sample_rate as f64;
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for (i, &x) in buf.samples[window.start..window.start + window.length].iter().enumerate() {
        let (sin, cos) = (w * i as f64).sin_cos();
        re += x * cos;
        im -= x * sin;
    }
    Ok(re * re + im * im)
}

/// Sliding single-bin energies for one frequency via prefix sums of the
/// demodulated signal, so any window energy costs O(1).
pub struct ToneProjection {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ToneProjection {
    pub fn new(samples: &[f64], freq_hz: f64, sample_rate: u32) -> Self {
        const RESYNC: usize = 512;
        let w = 2.0 * PI * freq_hz / sample_rate as f64;
        let (step_im, step_re) = (-w).sin_cos();
        let mut re = Vec::with_capacity(samples.len() + 1);
        let mut im = Vec::with_capacity(samples.len() + 1);
        re.push(0.0);
        im.push(0.0);
        let (mut acc_re, mut acc_im) = (0.0, 0.0);
        let (mut pr, mut pi) = (1.0f64, 0.0f64);
        for (n, &x) in samples.iter().enumerate() {
            if n % RESYNC == 0 {
                let (s, c) = (-w * n as f64).sin_cos();
                pr = c;
                pi = s;
            }
            acc_re += x * pr;
            acc_im += x * pi;
            re.push(acc_re);
            im.push(acc_im);
            let nr = pr * step_re - pi * step_im;
            pi = pr * step_im + pi * step_re;
            pr = nr;
        }
        Self { re, im }
    }

    /// Energy of `[start, start + len)`. Panics when out of range.
    pub fn energy(&self, start: usize, len: usize) -> f64 {
        let dr = self.re[start + len] - self.re[start];
        let di = self.im[start + len] - self.im[start];
        dr * dr + di * di
    }
}

/// First and last sample index whose magnitude exceeds `rel` times the peak.
pub fn signal_extent(samples: &[f64], rel: f64) -> Option<(usize, usize)> {
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak == 0.0 {
        return None;
    }
    let thr = rel * peak;
    let first = samples.iter().position(|s| s.abs() > thr)?;
    let last = samples.iter().rposition(|s| s.abs() > thr)?;
    Some((first, last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SR: u32 = 44100;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn tone_length_and_peak_bin() {
        let t = synth_tone(1000.0, 0.020, 1.0, SR).unwrap();
        assert_eq!(t.len(), 882);
        // brute-force DFT over every bin 1..N/2; bin spacing is 50 Hz
        let n = t.len();
        let best = (1..n / 2)
            .map(|k| {
                let f = k as f64 * SR as f64 / n as f64;
                (k, dft_power_oracle(&t, f, WindowSpec::whole(&t)).unwrap())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(best.0 as f64 * 50.0, 1000.0);
    }

    #[test]
    fn zero_amplitude_is_silence() {
        let t = synth_tone(440.0, 0.05, 0.0, SR).unwrap();
        assert_eq!(t.len(), samples_for(0.05, SR));
        assert!(t.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn synth_rejects_bad_arguments() {
        assert!(matches!(synth_tone(23000.0, 0.02, 1.0, SR), Err(Error::InvalidFrequency { .. })));
        assert!(matches!(synth_tone(22050.0, 0.02, 1.0, SR), Err(Error::InvalidFrequency { .. })));
        assert!(matches!(synth_tone(1000.0, 0.0, 1.0, SR), Err(Error::InvalidDuration(_))));
        assert!(matches!(synth_tone(1000.0, -1.0, 1.0, SR), Err(Error::InvalidDuration(_))));
        assert!(matches!(synth_tone(1000.0, 0.02, 1.5, SR), Err(Error::InvalidAmplitude(_))));
    }

    #[test]
    fn ramps_start_and_end_at_zero() {
        let t = synth_tone(1000.0, 0.02, 1.0, SR).unwrap();
        assert_eq!(t.samples()[0], 0.0);
        assert!(t.samples()[881].abs() < 1e-3);
        assert!(t.samples().iter().all(|s| s.abs() <= 1.0));
    }

    #[test]
    fn mix_identity_and_symmetry() {
        let a = synth_tone(1000.0, 0.02, 0.7, SR).unwrap();
        assert_eq!(mix(std::slice::from_ref(&a)).unwrap(), a);
        let m = mix(&[a.clone(), a.clone()]).unwrap();
        for (x, y) in m.samples().iter().zip(a.samples()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn mix_pads_and_quarters_energy() {
        let a = synth_tone(700.0, 0.1, 1.0, SR).unwrap();
        let b = synth_tone(770.0, 0.1, 1.0, SR).unwrap();
        let m = mix(&[a.clone(), b.clone()]).unwrap();
        let w = WindowSpec::whole(&m);
        for (single, f) in [(&a, 700.0), (&b, 770.0)] {
            let e_single = dft_power_oracle(single, f, w).unwrap();
            let e_mix = dft_power_oracle(&m, f, w).unwrap();
            let ratio = e_mix / e_single;
            assert!((ratio - 0.25).abs() < 0.01, "ratio {ratio}");
        }
        let short = synth_tone(700.0, 0.01, 1.0, SR).unwrap();
        assert_eq!(mix(&[short, a]).unwrap().len(), 4410);
    }

    #[test]
    fn mix_and_concat_reject_mixed_rates() {
        let a = PcmBuffer::silence(10, 44100);
        let b = PcmBuffer::silence(10, 48000);
        assert!(matches!(mix(&[a.clone(), b.clone()]), Err(Error::SampleRateMismatch(..))));
        assert!(matches!(concat(&[a, b]), Err(Error::SampleRateMismatch(..))));
        assert!(matches!(mix(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn concat_lengths() {
        let sym = synth_tone(1000.0, 0.02, 1.0, SR).unwrap();
        let ten: Vec<_> = (0..10).map(|_| sym.clone()).collect();
        assert_eq!(concat(&ten).unwrap().len(), 8820);
        let b = synth_tone(1200.0, 0.03, 1.0, SR).unwrap();
        assert_eq!(concat(&[sym.clone(), b.clone()]).unwrap().len(), sym.len() + b.len());
        assert_eq!(concat(std::slice::from_ref(&sym)).unwrap(), sym);
    }

    #[test]
    fn dft_bin_matches_direct_sum() {
        let t = synth_tone(1234.5, 0.01, 0.7, SR).unwrap();
        for f in [300.0, 1234.5, 5000.0] {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &x) in t.samples().iter().enumerate() {
                let ph = 2.0 * PI * f * n as f64 / SR as f64;
                re += x * ph.cos();
                im -= x * ph.sin();
            }
            let z = dft_bin(t.samples(), f, SR);
            assert!((z.re - re).abs() < 1e-8 && (z.im - im).abs() < 1e-8, "{z} vs {re}+{im}i");
        }
    }

    #[test]
    fn goertzel_on_bin_energy() {
        let t = synth_tone(1000.0, 0.020, 1.0, SR).unwrap();
        let w = WindowSpec::whole(&t);
        let e = goertzel_power(&t, 1000.0, w).unwrap();
        let oracle = dft_power_oracle(&t, 1000.0, w).unwrap();
        assert!(rel_close(e, oracle, 1e-6));
        // On-bin projection of a ramped sinusoid is A/2 * sum(window);
        // each 88-sample raised-cosine ramp contributes half its length.
        let n: f64 = 882.0;
        let ramp = 88.0;
        let expected = (0.5 * (n - ramp)).powi(2);
        assert!((e / expected - 1.0).abs() < 0.02, "e={e} expected={expected}");
        // Unramped reference value, for scale: (N/2)^2.
        assert!(e < (n / 2.0).powi(2));
    }

    #[test]
    fn goertzel_silence_and_offbin() {
        let s = PcmBuffer::silence(500, SR);
        assert_eq!(goertzel_power(&s, 1000.0, WindowSpec::whole(&s)).unwrap(), 0.0);
        assert_eq!(dft_power_oracle(&s, 1000.0, WindowSpec::whole(&s)).unwrap(), 0.0);
        let t = synth_tone(1000.0, 0.020, 1.0, SR).unwrap();
        let w = WindowSpec::whole(&t);
        let on = dft_power_oracle(&t, 1000.0, w).unwrap();
        let off = dft_power_oracle(&t, 5000.0, w).unwrap();
        assert!(off < 0.01 * on);
        assert!(goertzel_power(&t, 5000.0, w).unwrap() < 0.01 * on);
    }

    #[test]
    fn oracle_peak_scan() {
        let t = synth_tone(2340.0, 0.1, 0.8, SR).unwrap();
        let w = WindowSpec::whole(&t);
        let peak = (0..=550)
            .map(|i| 500.0 + 10.0 * i as f64)
            .max_by(|&a, &b| {
                dft_power_oracle(&t, a, w)
                    .unwrap()
                    .total_cmp(&dft_power_oracle(&t, b, w).unwrap())
            })
            .unwrap();
        assert_eq!(peak, 2340.0);
    }

    #[test]
    fn window_bounds() {
        let t = synth_tone(1000.0, 0.020, 1.0, SR).unwrap();
        assert!(matches!(
            goertzel_power(&t, 1000.0, WindowSpec::new(800, 100)),
            Err(Error::WindowOutOfBounds { .. })
        ));
        assert!(goertzel_power(&t, 1000.0, WindowSpec::new(0, 0)).is_err());
        assert!(dft_power_oracle(&t, 1000.0, WindowSpec::new(882, 1)).is_err());
    }

    #[test]
    fn projection_matches_goertzel() {
        let t = concat(&[
            synth_tone(1500.0, 0.05, 0.5, SR).unwrap(),
            synth_tone(1700.0, 0.05, 0.5, SR).unwrap(),
        ])
        .unwrap();
        let p = ToneProjection::new(t.samples(), 1500.0, SR);
        for start in [0, 17, 1000, 2500] {
            let g = goertzel(&t.samples()[start..start + 1200], 1500.0, SR);
            assert!(rel_close(p.energy(start, 1200), g, 1e-9));
        }
    }

    #[test]
    fn extent_finds_signal() {
        let b = synth_tone(1000.0, 0.02, 1.0, SR).unwrap().padded(100, 50);
        let (a, z) = signal_extent(b.samples(), 1e-3).unwrap();
        assert!((100..110).contains(&a));
        assert!((100 + 870..100 + 882).contains(&z));
        assert!(signal_extent(&[0.0; 10], 1e-3).is_none());
    }

    #[test]
    fn pcm_rejects_out_of_range() {
        assert!(PcmBuffer::new(vec![0.5, 1.5], SR).is_err());
        assert!(PcmBuffer::new(vec![f64::NAN], SR).is_err());
        assert!(PcmBuffer::new(vec![], 0).is_err());
        assert_eq!(PcmBuffer::from_clamped(vec![2.0, -3.0], SR).unwrap().samples(), &[1.0, -1.0]);
    }

    proptest! {
        #[test]
        fn goertzel_matches_oracle(
            samples in prop::collection::vec(-1.0f64..1.0, 1..2000),
            freq in 20.0f64..20000.0,
            a in 0.0f64..1.0,
            b in 0.0f64..1.0,
        ) {
            let buf = PcmBuffer::new(samples, SR).unwrap();
            let n = buf.len();
            let start = ((a * n as f64) as usize).min(n - 1);
            let len = 1 + ((b * (n - start) as f64) as usize).min(n - start - 1);
            let w = WindowSpec::new(start, len);
            let g = goertzel_power(&buf, freq, w).unwrap();
            let o = dft_power_oracle(&buf, freq, w).unwrap();
            prop_assert!((g - o).abs() <= 1e-6 * o.max(1.0), "g={} o={}", g, o);
        }

        #[test]
        fn goertzel_scales_quadratically(
            samples in prop::collection::vec(-1.0f64..1.0, 16..1000),
            freq in 100.0f64..10000.0,
            c in 0.01f64..=1.0,
        ) {
            let buf = PcmBuffer::new(samples, SR).unwrap();
            let w = WindowSpec::whole(&buf);
            let e = goertzel_power(&buf, freq, w).unwrap();
            let es = goertzel_power(&buf.scaled(c).unwrap(), freq, w).unwrap();
            prop_assert!((es - c * c * e).abs() <= 1e-9 * (c * c * e).max(1e-300));
        }

        #[test]
        fn synth_peak_bounded(freq in 50.0f64..20000.0, dur in 0.001f64..0.2, amp in 0.0f64..=1.0) {
            let t = synth_tone(freq, dur, amp, SR).unwrap();
            prop_assert!(t.samples().iter().all(|s| s.abs() <= amp + 1e-12));
        }

        #[test]
        fn mix_stays_in_range(
            bufs in prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 0..200), 1..6)
        ) {
            let bufs: Vec<_> = bufs.into_iter().map(|s| PcmBuffer::new(s, SR).unwrap()).collect();
            let max_len = bufs.iter().map(PcmBuffer::len).max().unwrap();
            let m = mix(&bufs).unwrap();
            prop_assert_eq!(m.len(), max_len);
            prop_assert!(m.samples().iter().all(|s| s.abs() <= 1.0));
            let total: usize = bufs.iter().map(PcmBuffer::len).sum();
            prop_assert_eq!(concat(&bufs).unwrap().len(), total);
        }
    }
}
