//! Cricket voice: each symbol period holds one train of three short carrier
//! beeps. The train's onset slot (8 choices) and the beep amplitude
//! (4 choices) together carry 5 bits.

use crate::dsp::{check_frequency, goertzel, samples_for, tone_samples, ToneProjection, DEFAULT_SAMPLE_RATE};
use crate::framing::{emit_preamble, Calibration, MIN_FLOOR_RATIO};
use crate::{BitString, Error, PcmBuffer, Result};

pub const BITS_PER_SYMBOL: usize = 5;
/// Symbol interval of the single-tone preamble that precedes a cricket burst.
pub const PREAMBLE_SYMBOL_S: f64 = 0.050;

#[derive(Clone, Debug, PartialEq)]
pub struct CricketConfig {
    pub carrier_hz: f64,
    pub beep_s: f64,
    pub intra_gap_s: f64,
    pub symbol_period_s: f64,
    pub phase_slots: usize,
    pub slot_s: f64,
    pub amp_levels: Vec<f64>,
    pub sample_rate: u32,
}

impl Default for CricketConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 4500.0,
            beep_s: 0.015,
            intra_gap_s: 0.010,
            symbol_period_s: 0.225,
            phase_slots: 8,
            slot_s: 0.020,
            amp_levels: vec![1.0, 0.63, 0.40, 0.25],
            sample_rate: DEFAULT_SAMPLE_RATE,
        }
    }
}

impl CricketConfig {
    pub fn with_sample_rate(sample_rate: u32) -> Result<Self> {
        let cfg = Self {
            sample_rate,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_frequency(self.carrier_hz, self.sample_rate)?;
        if self.phase_slots * self.amp_levels.len() != 1 << BITS_PER_SYMBOL {
            return Err(Error::InvalidConfig("phase slots x amplitude levels must be 32".into()));
        }
        let levels_ok = self.amp_levels.windows(2).all(|w| w[0] > w[1])
            && self.amp_levels.iter().all(|&a| a > 0.0 && a <= 1.0);
        if !levels_ok {
            return Err(Error::InvalidConfig("amplitude levels must be strictly decreasing in (0, 1]".into()));
        }
        for d in [self.beep_s, self.intra_gap_s, self.symbol_period_s, self.slot_s] {
            if !(d > 0.0) {
                return Err(Error::InvalidDuration(d));
            }
        }
        let last_onset = (self.phase_slots - 1) as f64 * self.slot_s;
        if last_onset + self.triad_span_s() > self.symbol_period_s + 1e-12 {
            return Err(Error::InvalidConfig("triad spills past the symbol period".into()));
        }
        Ok(())
    }

    pub fn triad_span_s(&self) -> f64 {
        3.0 * self.beep_s + 2.0 * self.intra_gap_s
    }

    pub fn data_rate(&self) -> f64 {
        BITS_PER_SYMBOL as f64 / self.symbol_period_s
    }

    /// First sample of symbol `k`; rounding each boundary separately keeps
    /// fractional periods from drifting.
    pub fn symbol_start(&self, k: usize) -> usize {
        (k as f64 * self.symbol_period_s * self.sample_rate as f64).round() as usize
    }

    /// Number of whole symbol periods spanned by `len` samples.
    pub fn symbols_in(&self, len: usize) -> usize {
        (len as f64 / (self.symbol_period_s * self.sample_rate as f64)).round() as usize
    }

    fn beep_len(&self) -> usize {
        samples_for(self.beep_s, self.sample_rate)
    }

    fn beep_stride(&self) -> usize {
        samples_for(self.beep_s + self.intra_gap_s, self.sample_rate)
    }

    fn slot_len(&self) -> usize {
        samples_for(self.slot_s, self.sample_rate)
    }

    fn beep_starts(&self, slot: usize) -> [usize; 3] {
        let onset = slot * self.slot_len();
        std::array::from_fn(|j| onset + j * self.beep_stride())
    }

    /// The single-tone preamble used to calibrate the receiver.
    pub fn preamble(&self) -> Result<PcmBuffer> {
        emit_preamble(&[self.carrier_hz], PREAMBLE_SYMBOL_S, self.sample_rate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CricketSymbol {
    pub phase_slot: u8,
    pub amp_level: u8,
}

impl CricketSymbol {
    pub fn from_value(value: u8) -> Result<Self> {
        if value >= 32 {
            return Err(Error::InvalidArgument(format!("cricket symbol {value} out of range")));
        }
        Ok(Self {
            phase_slot: value / 4,
            amp_level: value % 4,
        })
    }

    pub fn value(self) -> u8 {
        self.phase_slot * 4 + self.amp_level
    }
}

fn write_triad(cfg: &CricketConfig, sym: CricketSymbol, out: &mut [f64]) {
    let amp = cfg.amp_levels[sym.amp_level as usize];
    let beep = tone_samples(cfg.carrier_hz, cfg.beep_len(), amp, cfg.sample_rate);
    for start in cfg.beep_starts(sym.phase_slot as usize) {
        out[start..start + beep.len()].copy_from_slice(&beep);
    }
}

/// One symbol period holding the triad for `sym`.
pub fn cricket_symbol_waveform(cfg: &CricketConfig, sym: CricketSymbol) -> PcmBuffer {
    let mut out = vec![0.0; cfg.symbol_start(1)];
    write_triad(cfg, sym, &mut out);
    PcmBuffer::from_clamped(out, cfg.sample_rate).expect("levels lie in (0, 1]")
}

/// 5 bits per symbol, big-endian, zero-padded to a whole symbol.
pub fn cricket_encode(cfg: &CricketConfig, bits: &BitString) -> PcmBuffer {
    let mut bits = bits.clone();
    bits.pad_to_multiple(BITS_PER_SYMBOL);
    let n = bits.len() / BITS_PER_SYMBOL;
    let mut out = vec![0.0; cfg.symbol_start(n)];
    for k in 0..n {
        let value = bits.read_bits(k * BITS_PER_SYMBOL, BITS_PER_SYMBOL).unwrap() as u8;
        let sym = CricketSymbol::from_value(value).unwrap();
        let start = cfg.symbol_start(k);
        write_triad(cfg, sym, &mut out[start..cfg.symbol_start(k + 1)]);
    }
    PcmBuffer::from_clamped(out, cfg.sample_rate).expect("levels lie in (0, 1]")
}

/// Decodes `cfg.symbols_in(buf.len())` symbol periods.
///
/// Per period the phase slot is the one whose three beep windows capture the
/// most carrier energy; the amplitude level is the one nearest in log energy
/// to the mean of those three beeps, with references scaled by the preamble
/// calibration. A period whose best slot stays below the midpoint between
/// the quietest level and the noise floor holds no triad.
pub fn cricket_decode(cfg: &CricketConfig, buf: &PcmBuffer, cal: &Calibration) -> Result<BitString> {
    cfg.validate()?;
    if buf.sample_rate() != cfg.sample_rate {
        return Err(Error::SampleRateMismatch(buf.sample_rate(), cfg.sample_rate));
    }
    let sr = cfg.sample_rate;
    let on = cal
        .on_energy_for(cfg.carrier_hz)
        .ok_or(Error::MissingCalibrationTone(cfg.carrier_hz))?;
    let noise = cal.noise_floor_for(cfg.carrier_hz).unwrap();

    // Clean references at full scale, then rescaled by the measured preamble.
    let pre_len = samples_for(PREAMBLE_SYMBOL_S, sr);
    let pre = cfg.preamble()?;
    let kappa = on / goertzel(&pre.samples()[..pre_len], cfg.carrier_hz, sr);
    let beep_ref = kappa * goertzel(&tone_samples(cfg.carrier_hz, cfg.beep_len(), 1.0, sr), cfg.carrier_hz, sr);

    let quietest = *cfg.amp_levels.last().unwrap();
    let e_low = beep_ref * quietest * quietest;
    let noise_beep = noise * cfg.beep_len() as f64 / cal.window_len().max(1) as f64;
    let threshold = (e_low * noise_beep.max(e_low * MIN_FLOOR_RATIO)).sqrt();

    let n = cfg.symbols_in(buf.len());
    let mut samples = buf.samples().to_vec();
    samples.resize(samples.len().max(cfg.symbol_start(n)), 0.0);
    let proj = ToneProjection::new(&samples, cfg.carrier_hz, sr);
    let level_logs: Vec<f64> = cfg.amp_levels.iter().map(|a| (beep_ref * a * a).ln()).collect();

    let mut bits = BitString::new();
    for k in 0..n {
        let start = cfg.symbol_start(k);
        let slot_energy = |slot: usize| -> f64 {
            cfg.beep_starts(slot)
                .iter()
                .map(|&b| proj.energy(start + b, cfg.beep_len()))
                .sum::<f64>()
                / 3.0
        };
        let (slot, mean) = (0..cfg.phase_slots)
            .map(|s| (s, slot_energy(s)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if mean <= threshold {
            return Err(Error::NoTriad(k));
        }
        let log_e = mean.ln();
        let level = level_logs
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - log_e).abs().total_cmp(&(b.1 - log_e).abs()))
            .map(|(i, _)| i)
            .unwrap();
        let sym = CricketSymbol {
            phase_slot: slot as u8,
            amp_level: level as u8,
        };
        bits.push_bits(sym.value() as u32, BITS_PER_SYMBOL);
    }
    Ok(bits)
}
