//! Parallel binary ASK over a tone bank and M-ary FSK.
//!
//! Four presets reproduce the published designs: `ask8_fast` and
//! `ask8_slow` (8 tones at 20 ms and 100 ms), `ask128` (harmonics of 70 Hz
//! from 700 Hz, 100 ms) and `fsk256` (20 Hz steps from 1000 Hz, 20 ms).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;

use crate::bits::BitString;
use crate::dsp::{check_frequency, dft_bin, goertzel, samples_for, tone_samples, PcmBuffer, DEFAULT_SAMPLE_RATE};
use crate::framing::Calibration;
use crate::{Error, Result};

/// Peak budget of an FSK symbol. ASK symbols give each tone 1/M instead.
pub const FSK_AMPLITUDE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Ask8Fast,
    Ask8Slow,
    Ask128,
    Fsk256,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Ask8Fast, Preset::Ask8Slow, Preset::Ask128, Preset::Fsk256];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ask8Fast => "ask8_fast",
            Preset::Ask8Slow => "ask8_slow",
            Preset::Ask128 => "ask128",
            Preset::Fsk256 => "fsk256",
        }
    }

    /// Fails only when the sample rate puts bank tones at or above Nyquist.
    pub fn config(self, sample_rate: u32) -> Result<ModemConfig> {
        let ask8: Vec<f64> = (0..8).map(|i| 1000.0 + 250.0 * i as f64).collect();
        match self {
            Preset::Ask8Fast => AskConfig::new(ask8, 0.020, sample_rate).map(ModemConfig::Ask),
            Preset::Ask8Slow => AskConfig::new(ask8, 0.100, sample_rate).map(ModemConfig::Ask),
            Preset::Ask128 => AskConfig::new(
                (0..128).map(|i| 700.0 + 70.0 * i as f64).collect(),
                0.100,
                sample_rate,
            )
            .map(ModemConfig::Ask),
            Preset::Fsk256 => FskConfig::new(
                (0..256).map(|k| 1000.0 + 20.0 * k as f64).collect(),
                0.020,
                sample_rate,
            )
            .map(ModemConfig::Fsk),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownVoice(s.to_string()))
    }
}

/// Looks up a preset by name at the default sample rate.
pub fn preset(name: &str) -> Result<ModemConfig> {
    name.parse::<Preset>()?.config(DEFAULT_SAMPLE_RATE)
}

fn validate_bank(tones: &[f64], symbol_duration_s: f64, sample_rate: u32) -> Result<()> {
    if tones.is_empty() {
        return Err(Error::InvalidConfig("tone bank is empty".into()));
    }
    if !(symbol_duration_s > 0.0) {
        return Err(Error::InvalidDuration(symbol_duration_s));
    }
    if samples_for(symbol_duration_s, sample_rate) == 0 {
        return Err(Error::InvalidConfig("symbol shorter than one sample".into()));
    }
    for &t in tones {
        check_frequency(t, sample_rate)?;
    }
    if tones.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("tone bank must be strictly increasing".into()));
    }
    Ok(())
}

/// Parallel on/off keying: bit i of each symbol gates `tone_bank[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AskConfig {
    tone_bank: Vec<f64>,
    symbol_duration_s: f64,
    sample_rate: u32,
}

impl AskConfig {
    pub fn new(tone_bank: Vec<f64>, symbol_duration_s: f64, sample_rate: u32) -> Result<Self> {
        validate_bank(&tone_bank, symbol_duration_s, sample_rate)?;
        Ok(Self {
            tone_bank,
            symbol_duration_s,
            sample_rate,
        })
    }

    pub fn tone_bank(&self) -> &[f64] {
        &self.tone_bank
    }

    pub fn symbol_duration_s(&self) -> f64 {
        self.symbol_duration_s
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn symbol_len(&self) -> usize {
        samples_for(self.symbol_duration_s, self.sample_rate)
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.tone_bank.len()
    }

    pub fn data_rate(&self) -> f64 {
        self.bits_per_symbol() as f64 / self.symbol_duration_s
    }

    /// True when some adjacent tones are closer than the 1/T resolution of a
    /// one-symbol window.
    pub fn is_sub_resolution(&self) -> bool {
        sub_resolution(&self.tone_bank, self.symbol_duration_s)
    }
}

/// One tone out of M per symbol, log2(M) bits each.
#[derive(Clone, Debug, PartialEq)]
pub struct FskConfig {
    tone_bank: Vec<f64>,
    symbol_duration_s: f64,
    sample_rate: u32,
}

impl FskConfig {
    pub fn new(tone_bank: Vec<f64>, symbol_duration_s: f64, sample_rate: u32) -> Result<Self> {
        validate_bank(&tone_bank, symbol_duration_s, sample_rate)?;
        let m = tone_bank.len();
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("FSK alphabet size {m} is not a power of two")));
        }
        Ok(Self {
            tone_bank,
            symbol_duration_s,
            sample_rate,
        })
    }

    pub fn tone_bank(&self) -> &[f64] {
        &self.tone_bank
    }

    pub fn symbol_duration_s(&self) -> f64 {
        self.symbol_duration_s
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn symbol_len(&self) -> usize {
        samples_for(self.symbol_duration_s, self.sample_rate)
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.tone_bank.len().trailing_zeros() as usize
    }

    pub fn data_rate(&self) -> f64 {
        self.bits_per_symbol() as f64 / self.symbol_duration_s
    }

    pub fn is_sub_resolution(&self) -> bool {
        sub_resolution(&self.tone_bank, self.symbol_duration_s)
    }
}

fn sub_resolution(tones: &[f64], t: f64) -> bool {
    tones.windows(2).any(|w| w[1] - w[0] < 1.0 / t - 1e-9)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModemConfig {
    Ask(AskConfig),
    Fsk(FskConfig),
}

impl ModemConfig {
    pub fn data_rate(&self) -> f64 {
        match self {
            ModemConfig::Ask(c) => c.data_rate(),
            ModemConfig::Fsk(c) => c.data_rate(),
        }
    }

    pub fn tone_bank(&self) -> &[f64] {
        match self {
            ModemConfig::Ask(c) => c.tone_bank(),
            ModemConfig::Fsk(c) => c.tone_bank(),
        }
    }

    pub fn symbol_duration_s(&self) -> f64 {
        match self {
            ModemConfig::Ask(c) => c.symbol_duration_s(),
            ModemConfig::Fsk(c) => c.symbol_duration_s(),
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        match self {
            ModemConfig::Ask(c) => c.bits_per_symbol(),
            ModemConfig::Fsk(c) => c.bits_per_symbol(),
        }
    }
}

/// Data rate in bits per second.
pub fn data_rate(config: &ModemConfig) -> f64 {
    config.data_rate()
}

type BankKey = (Vec<u64>, usize, u32);

fn bank_key(tones: &[f64], n: usize, sample_rate: u32) -> BankKey {
    (tones.iter().map(|f| f.to_bits()).collect(), n, sample_rate)
}

/// Process-wide memo for per-bank tables that are costly to build.
fn memo<V>(cache: &OnceLock<Mutex<HashMap<BankKey, Arc<V>>>>, key: BankKey, build: impl FnOnce() -> V) -> Arc<V> {
    let cache = cache.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return Arc::clone(v);
    }
    let v = Arc::new(build());
    cache.lock().unwrap().insert(key, Arc::clone(&v));
    v
}

/// Ramped per-tone symbol waveforms at amplitude 1/M, one row per bank tone.
fn ask_tone_table(tones: &[f64], n: usize, sample_rate: u32) -> Arc<Vec<Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<BankKey, Arc<Vec<Vec<f64>>>>>> = OnceLock::new();
    memo(&CACHE, bank_key(tones, n, sample_rate), || {
        let amplitude = 1.0 / tones.len() as f64;
        tones.iter().map(|&f| tone_samples(f, n, amplitude, sample_rate)).collect()
    })
}

/// Per-tone energies of one symbol window with the bank's mutual leakage
/// removed.
///
/// Ramped tones one or a few bins apart are not orthogonal over a symbol, so
/// the raw projection at one tone depends on which neighbours are sounding.
/// With `G[k][j]` the projection of unit ramped tone `j` at tone `k`, the
/// window's projections `y` satisfy `y = G a`; the reported energy of tone `k`
/// is `|a_k G[k][k]|^2`, the energy tone `k` would show on its own.
#[derive(Debug)]
pub(crate) struct ToneSeparator {
    tones: Vec<f64>,
    sample_rate: u32,
    inverse: Vec<Complex64>,
    diag: Vec<Complex64>,
}

impl ToneSeparator {
    /// Shared separator for a bank and window length; built once per process.
    pub(crate) fn cached(tones: &[f64], window_len: usize, sample_rate: u32) -> Arc<ToneSeparator> {
        static CACHE: OnceLock<Mutex<HashMap<BankKey, Arc<ToneSeparator>>>> = OnceLock::new();
        memo(&CACHE, bank_key(tones, window_len, sample_rate), || {
            Self::new(tones, window_len, sample_rate)
        })
    }

    fn new(tones: &[f64], window_len: usize, sample_rate: u32) -> Self {
        let m = tones.len();
        let mut gram = vec![Complex64::new(0.0, 0.0); m * m];
        for (j, &fj) in tones.iter().enumerate() {
            let unit = tone_samples(fj, window_len, 1.0, sample_rate);
            for (k, &fk) in tones.iter().enumerate() {
                gram[k * m + j] = dft_bin(&unit, fk, sample_rate);
            }
        }
        let diag = (0..m).map(|k| gram[k * m + k]).collect();
        Self {
            tones: tones.to_vec(),
            sample_rate,
            inverse: invert(gram, m),
            diag,
        }
    }

    pub(crate) fn energies(&self, window: &[f64]) -> Vec<f64> {
        let m = self.tones.len();
        let y: Vec<Complex64> = self.tones.iter().map(|&f| dft_bin(window, f, self.sample_rate)).collect();
        (0..m)
            .map(|k| {
                let row = &self.inverse[k * m..(k + 1) * m];
                let a: Complex64 = row.iter().zip(&y).map(|(g, v)| g * v).sum();
                (a * self.diag[k]).norm_sqr()
            })
            .collect()
    }
}

/// Gauss-Jordan inverse with partial pivoting of a row-major `m x m` matrix.
/// A singular matrix falls back to the identity-scaled diagonal inverse.
fn invert(mut a: Vec<Complex64>, m: usize) -> Vec<Complex64> {
    let diag: Vec<Complex64> = (0..m).map(|k| a[k * m + k]).collect();
    let mut inv = vec![Complex64::new(0.0, 0.0); m * m];
    for k in 0..m {
        inv[k * m + k] = Complex64::new(1.0, 0.0);
    }
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&r1, &r2| a[r1 * m + col].norm().total_cmp(&a[r2 * m + col].norm()))
            .unwrap();
        if a[pivot * m + col].norm() < 1e-12 {
            let mut fallback = vec![Complex64::new(0.0, 0.0); m * m];
            for k in 0..m {
                fallback[k * m + k] = 1.0 / diag[k];
            }
            return fallback;
        }
        for c in 0..m {
            a.swap(col * m + c, pivot * m + c);
            inv.swap(col * m + c, pivot * m + c);
        }
        let p = 1.0 / a[col * m + col];
        for c in 0..m {
            a[col * m + c] *= p;
            inv[col * m + c] *= p;
        }
        for r in 0..m {
            if r != col {
                let f = a[r * m + col];
                if f != Complex64::new(0.0, 0.0) {
                    for c in 0..m {
                        let (ac, ic) = (a[col * m + c], inv[col * m + c]);
                        a[r * m + c] -= f * ac;
                        inv[r * m + c] -= f * ic;
                    }
                }
            }
        }
    }
    inv
}

/// Synthesizes ASK symbols from per-symbol on/off masks.
pub(crate) fn ask_symbols<I>(cfg: &AskConfig, masks: I) -> Vec<f64>
where
    I: IntoIterator,
    I::Item: AsRef<[bool]>,
{
    let n = cfg.symbol_len();
    let table = ask_tone_table(&cfg.tone_bank, n, cfg.sample_rate);
    let mut out = Vec::new();
    for mask in masks {
        let start = out.len();
        out.resize(start + n, 0.0);
        let sym = &mut out[start..];
        for (row, _) in table.iter().zip(mask.as_ref()).filter(|(_, &on)| on) {
            for (acc, s) in sym.iter_mut().zip(row) {
                *acc += s;
            }
        }
    }
    out
}

pub fn ask_modulate(cfg: &AskConfig, bits: &BitString) -> PcmBuffer {
    let mut bits = bits.clone();
    bits.pad_to_multiple(cfg.bits_per_symbol());
    let samples = ask_symbols(cfg, bits.chunks(cfg.bits_per_symbol()));
    PcmBuffer::from_clamped(samples, cfg.sample_rate).expect("sum of 1/M tones stays in range")
}

/// Per-tone decision thresholds: geometric mean of calibrated on-energy and
/// noise floor, in bank order.
fn ask_thresholds(cfg: &AskConfig, cal: &Calibration) -> Result<Vec<f64>> {
    cfg.tone_bank
        .iter()
        .map(|&f| cal.threshold(f).ok_or(Error::MissingCalibrationTone(f)))
        .collect()
}

pub(crate) fn ask_demodulate_slice(cfg: &AskConfig, samples: &[f64], cal: &Calibration) -> Result<BitString> {
    let n = cfg.symbol_len();
    if samples.len() % n != 0 {
        return Err(Error::Misaligned {
            len: samples.len(),
            symbol_len: n,
        });
    }
    let thresholds = ask_thresholds(cfg, cal)?;
    let sep = ToneSeparator::cached(&cfg.tone_bank, n, cfg.sample_rate);
    let mut bits = BitString::new();
    for sym in samples.chunks_exact(n) {
        for (e, &thr) in sep.energies(sym).into_iter().zip(&thresholds) {
            bits.push(e > thr);
        }
    }
    Ok(bits)
}

/// Returns `len(tone_bank)` bits per symbol interval.
pub fn ask_demodulate(cfg: &AskConfig, buf: &PcmBuffer, cal: &Calibration) -> Result<BitString> {
    check_rate(cfg.sample_rate, buf)?;
    ask_demodulate_slice(cfg, buf.samples(), cal)
}

fn check_rate(expected: u32, buf: &PcmBuffer) -> Result<()> {
    if buf.sample_rate() != expected {
        return Err(Error::SampleRateMismatch(expected, buf.sample_rate()));
    }
    Ok(())
}

pub(crate) fn fsk_symbols(cfg: &FskConfig, values: &[usize]) -> Vec<f64> {
    let n = cfg.symbol_len();
    let mut out = Vec::with_capacity(values.len() * n);
    for &v in values {
        out.extend(tone_samples(cfg.tone_bank[v], n, FSK_AMPLITUDE, cfg.sample_rate));
    }
    out
}

/// Splits bits into log2(M)-bit symbol values, zero padding the tail.
pub(crate) fn bits_to_values(bits: &BitString, width: usize) -> Vec<usize> {
    let mut bits = bits.clone();
    bits.pad_to_multiple(width);
    (0..bits.len() / width)
        .map(|i| bits.read_bits(i * width, width).unwrap() as usize)
        .collect()
}

pub fn fsk_modulate_bits(cfg: &FskConfig, bits: &BitString) -> PcmBuffer {
    let values = bits_to_values(bits, cfg.bits_per_symbol());
    PcmBuffer::new(fsk_symbols(cfg, &values), cfg.sample_rate).expect("FSK amplitude below 1")
}

/// Value v of each symbol sounds `tone_bank[v]` alone for one interval.
pub fn fsk_modulate(cfg: &FskConfig, payload: &[u8]) -> PcmBuffer {
    fsk_modulate_bits(cfg, &BitString::from_bytes(payload))
}

/// Index of the strongest bank tone; ties go to the lowest index.
pub(crate) fn fsk_argmax(cfg: &FskConfig, sym: &[f64]) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &f) in cfg.tone_bank.iter().enumerate() {
        let e = goertzel(sym, f, cfg.sample_rate);
        if e > best.1 {
            best = (k, e);
        }
    }
    best.0
}

pub(crate) fn fsk_demodulate_slice(cfg: &FskConfig, samples: &[f64]) -> Result<BitString> {
    let n = cfg.symbol_len();
    if samples.len() % n != 0 {
        return Err(Error::Misaligned {
            len: samples.len(),
            symbol_len: n,
        });
    }
    let width = cfg.bits_per_symbol();
    let mut bits = BitString::new();
    for sym in samples.chunks_exact(n) {
        bits.push_bits(fsk_argmax(cfg, sym) as u32, width);
    }
    Ok(bits)
}

pub fn fsk_demodulate_bits(cfg: &FskConfig, buf: &PcmBuffer) -> Result<BitString> {
    check_rate(cfg.sample_rate, buf)?;
    fsk_demodulate_slice(cfg, buf.samples())
}

/// Decoded bytes; a trailing partial byte (possible when log2(M) does not
/// divide 8) is dropped.
pub fn fsk_demodulate(cfg: &FskConfig, buf: &PcmBuffer) -> Result<Vec<u8>> {
    Ok(fsk_demodulate_bits(cfg, buf)?.to_bytes())
}
