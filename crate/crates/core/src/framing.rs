//! Frame format, acoustic preamble and calibration.
//!
//! Wire layout: `len:u16be ‖ payload ‖ crc:u16be`, where the CRC is
//! CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no xor-out)
//! over `len ‖ payload`.
//!
//! The preamble is eight symbol intervals over a tone bank:
//! all tones on for 2T, silence for T, then the landmark pattern 1,0,1,1,0.
//! The first three intervals feed [`Calibration`]; the whole on/off shape is
//! what [`detect_preamble`] correlates against.

use crate::dsp::{ramp_len, samples_for, PcmBuffer, ToneProjection, WindowSpec};
use crate::modem::{ask_symbols, AskConfig, ToneSeparator};
use crate::{Error, Result};

pub const MAX_PAYLOAD: usize = u16::MAX as usize;
pub const HEADER_LEN: usize = 2;
pub const CRC_LEN: usize = 2;

/// On/off state of each preamble interval.
pub const PREAMBLE_PATTERN: [bool; 8] = [true, true, false, true, false, true, true, false];
pub const PREAMBLE_SYMBOLS: usize = PREAMBLE_PATTERN.len();

/// Minimum normalised correlation between interval energies and the pattern.
pub const SYNC_CORRELATION: f64 = 0.9;
/// Weakest "on" interval must beat the strongest "off" interval by this factor.
pub const SYNC_CONTRAST: f64 = 10.0;
/// Strongest "on" interval may exceed the weakest by at most this factor.
pub const SYNC_ON_SPREAD: f64 = 4.0;
/// The preamble must start within this many seconds of the buffer start.
pub const SYNC_SEARCH_S: f64 = 10.0;

/// Lowest noise floor the ASK threshold will assume, relative to on-energy.
/// Keeps the decision level at or below -10 dB from the on level when the
/// measured floor is near zero (clean channels, quantization only).
pub const MIN_FLOOR_RATIO: f64 = 1e-2;
/// Largest number of bank tones the sync scan listens to; bigger banks are
/// subsampled evenly. Calibration always covers the whole bank.
pub const SCAN_TONES: usize = 8;
/// The scan steps by T divided by this.
pub const SCAN_HOP_DIVISOR: usize = 16;
/// Leading preamble symbols used for sample-accurate alignment.
const ALIGN_SYMBOLS: usize = 3;

const CRC_TABLE: [u16; 256] = {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u16) << 8;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 0x8000 != 0 { (crc << 1) ^ 0x1021 } else { crc << 1 };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
};

pub fn crc16_ccitt_false(data: &[u8]) -> u16 {
    data.iter().fold(0xFFFF, |crc, &b| {
        (crc << 8) ^ CRC_TABLE[((crc >> 8) as u8 ^ b) as usize]
    })
}

/// A payload with its framing. Construct with [`Frame::new`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    payload: Vec<u8>,
}

impl Frame {
    pub fn new(payload: Vec<u8>) -> Result<Self> {
        if payload.len() > MAX_PAYLOAD {
            return Err(Error::PayloadTooLarge(payload.len()));
        }
        Ok(Self { payload })
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn into_payload(self) -> Vec<u8> {
        self.payload
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len() + CRC_LEN
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&(self.payload.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.payload);
        let crc = crc16_ccitt_false(&out);
        out.extend_from_slice(&crc.to_be_bytes());
        out
    }

    /// Parses exactly one frame. Extra or missing bytes are errors.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN + CRC_LEN {
            return Err(Error::Truncated {
                needed: HEADER_LEN + CRC_LEN,
                available: bytes.len(),
            });
        }
        let declared = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
        let needed = HEADER_LEN + declared + CRC_LEN;
        if bytes.len() < needed {
            return Err(Error::Truncated {
                needed,
                available: bytes.len(),
            });
        }
        let body = &bytes[..HEADER_LEN + declared];
        let expected = u16::from_be_bytes([bytes[needed - 2], bytes[needed - 1]]);
        let computed = crc16_ccitt_false(body);
        if expected != computed {
            return Err(Error::CrcMismatch { expected, computed });
        }
        if bytes.len() > needed {
            return Err(Error::LengthMismatch {
                declared,
                available: bytes.len() - HEADER_LEN - CRC_LEN,
            });
        }
        Ok(Self {
            payload: bytes[HEADER_LEN..HEADER_LEN + declared].to_vec(),
        })
    }
}

/// Total frame size announced by a two-byte header.
pub fn frame_len_from_header(header: [u8; 2]) -> usize {
    HEADER_LEN + u16::from_be_bytes(header) as usize + CRC_LEN
}

pub fn build_frame(payload: &[u8]) -> Result<Vec<u8>> {
    Ok(Frame::new(payload.to_vec())?.to_bytes())
}

pub fn parse_frame(bytes: &[u8]) -> Result<Vec<u8>> {
    Ok(Frame::parse(bytes)?.into_payload())
}

/// Per-tone reference energies measured from a preamble.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    tones: Vec<f64>,
    on_energy: Vec<f64>,
    noise_floor: Vec<f64>,
    window_len: usize,
}

impl Calibration {
    /// Requires `on_energy[i] > noise_floor[i] >= 0` for every tone.
    pub fn new(tones: Vec<f64>, on_energy: Vec<f64>, noise_floor: Vec<f64>, window_len: usize) -> Result<Self> {
        if tones.len() != on_energy.len() || tones.len() != noise_floor.len() {
            return Err(Error::InvalidConfig("calibration vectors differ in length".into()));
        }
        for ((&f, &on), &noise) in tones.iter().zip(&on_energy).zip(&noise_floor) {
            if !(noise >= 0.0 && on > noise) {
                return Err(Error::CalibrationFailed(f));
            }
        }
        Ok(Self {
            tones,
            on_energy,
            noise_floor,
            window_len,
        })
    }

    pub fn tones(&self) -> &[f64] {
        &self.tones
    }

    pub fn on_energy(&self) -> &[f64] {
        &self.on_energy
    }

    pub fn noise_floor(&self) -> &[f64] {
        &self.noise_floor
    }

    /// Length in samples of the windows the energies were measured over.
    pub fn window_len(&self) -> usize {
        self.window_len
    }

    fn index_of(&self, freq_hz: f64) -> Option<usize> {
        self.tones.iter().position(|&t| (t - freq_hz).abs() < 1e-6)
    }

    pub fn on_energy_for(&self, freq_hz: f64) -> Option<f64> {
        self.index_of(freq_hz).map(|i| self.on_energy[i])
    }

    pub fn noise_floor_for(&self, freq_hz: f64) -> Option<f64> {
        self.index_of(freq_hz).map(|i| self.noise_floor[i])
    }

    /// Geometric mean of on-energy and (regularised) noise floor.
    pub fn threshold(&self, freq_hz: f64) -> Option<f64> {
        let i = self.index_of(freq_hz)?;
        let on = self.on_energy[i];
        let floor = self.noise_floor[i].max(on * MIN_FLOOR_RATIO);
        Some((on * floor).sqrt())
    }
}

/// Preamble over `bank` with symbol interval `symbol_duration_s`; 8T long.
pub fn emit_preamble(bank: &[f64], symbol_duration_s: f64, sample_rate: u32) -> Result<PcmBuffer> {
    let cfg = AskConfig::new(bank.to_vec(), symbol_duration_s, sample_rate)?;
    let masks = PREAMBLE_PATTERN.map(|on| vec![on; bank.len()]);
    PcmBuffer::from_clamped(ask_symbols(&cfg, masks), sample_rate)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyncResult {
    pub preamble_start: usize,
    pub payload_offset: usize,
    pub correlation: f64,
    pub cal: Calibration,
}

/// Summed bank energy of the window starting at every sample, computed
/// lazily in blocks.
struct BankEnergy<'a> {
    samples: &'a [f64],
    tones: &'a [f64],
    sample_rate: u32,
    window: usize,
    values: Vec<f64>,
}

impl<'a> BankEnergy<'a> {
    fn new(samples: &'a [f64], tones: &'a [f64], sample_rate: u32, window: usize) -> Self {
        Self {
            samples,
            tones,
            sample_rate,
            window,
            values: Vec::new(),
        }
    }

    fn positions(&self) -> usize {
        (self.samples.len() + 1).saturating_sub(self.window)
    }

    fn get(&mut self, pos: usize) -> f64 {
        if pos >= self.values.len() {
            self.extend(pos + 1);
        }
        self.values[pos]
    }

    fn extend(&mut self, upto: usize) {
        let start = self.values.len();
        let block = (self.sample_rate as usize / 2).max(4 * self.window);
        let end = upto.max(start + block).min(self.positions());
        assert!(upto <= end, "bank energy position out of range");
        let seg = &self.samples[start..end - 1 + self.window];
        let mut acc = vec![0.0; end - start];
        for &f in self.tones {
            let proj = ToneProjection::new(seg, f, self.sample_rate);
            for (i, a) in acc.iter_mut().enumerate() {
                *a += proj.energy(i, self.window);
            }
        }
        self.values.extend(acc);
    }

    fn intervals(&mut self, offset: usize) -> [f64; PREAMBLE_SYMBOLS] {
        std::array::from_fn(|j| self.get(offset + j * self.window))
    }
}

fn scan_tones(bank: &[f64]) -> Vec<f64> {
    if bank.len() <= SCAN_TONES {
        return bank.to_vec();
    }
    let last = (bank.len() - 1) as f64;
    (0..SCAN_TONES)
        .map(|j| bank[(j as f64 * last / (SCAN_TONES - 1) as f64).round() as usize])
        .collect()
}

fn pattern_correlation(e: &[f64; PREAMBLE_SYMBOLS]) -> f64 {
    let n = PREAMBLE_SYMBOLS as f64;
    let t: Vec<f64> = PREAMBLE_PATTERN.iter().map(|&b| b as u8 as f64).collect();
    let me = e.iter().sum::<f64>() / n;
    let mt = t.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in e.iter().zip(&t) {
        sxy += (x - me) * (y - mt);
        sxx += (x - me) * (x - me);
        syy += (y - mt) * (y - mt);
    }
    if sxx <= 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

fn split_on_off(e: &[f64; PREAMBLE_SYMBOLS]) -> (Vec<f64>, Vec<f64>) {
    let on = e.iter().zip(PREAMBLE_PATTERN).filter(|(_, p)| *p).map(|(x, _)| *x).collect();
    let off = e.iter().zip(PREAMBLE_PATTERN).filter(|(_, p)| !*p).map(|(x, _)| *x).collect();
    (on, off)
}

fn contrast(e: &[f64; PREAMBLE_SYMBOLS]) -> f64 {
    let (on, off) = split_on_off(e);
    on.iter().sum::<f64>() / on.len() as f64 - off.iter().sum::<f64>() / off.len() as f64
}

fn well_formed(e: &[f64; PREAMBLE_SYMBOLS]) -> bool {
    let (on, off) = split_on_off(e);
    let on_min = on.iter().copied().fold(f64::INFINITY, f64::min);
    let on_max = on.iter().copied().fold(0.0, f64::max);
    let off_max = off.iter().copied().fold(0.0, f64::max);
    on_min > 0.0 && on_min >= SYNC_CONTRAST * off_max && on_max <= SYNC_ON_SPREAD * on_min
}

/// Locates the preamble and measures calibration from it.
///
/// Scans offsets at a T/16 hop for a pattern correlation of at least
/// [`SYNC_CORRELATION`], refines the first hit to the sample that maximises
/// on/off contrast, then checks the on/off energy ratios before accepting.
pub fn detect_preamble(buf: &PcmBuffer, bank: &[f64], symbol_duration_s: f64) -> Result<SyncResult> {
    let cfg = AskConfig::new(bank.to_vec(), symbol_duration_s, buf.sample_rate())?;
    let sym = cfg.symbol_len();
    let span = PREAMBLE_SYMBOLS * sym;
    let hop = (sym / SCAN_HOP_DIVISOR).max(1);
    let search_end = buf.len().min(samples_for(SYNC_SEARCH_S, buf.sample_rate()) + span);
    let samples = &buf.samples()[..search_end];
    let Some(max_offset) = search_end.checked_sub(span) else {
        return Err(Error::SyncFailure);
    };
    let scan = scan_tones(bank);
    let mut energy = BankEnergy::new(samples, &scan, buf.sample_rate(), sym);

    let mut offset = 0;
    while offset <= max_offset {
        let e = energy.intervals(offset);
        if pattern_correlation(&e) >= SYNC_CORRELATION {
            let coarse = refine(&mut energy, offset, hop, sym, max_offset);
            let best = align(samples, &cfg, coarse, ramp_len(sym, buf.sample_rate()) + hop / 4, max_offset);
            let e = energy.intervals(best);
            let correlation = pattern_correlation(&e);
            if correlation >= SYNC_CORRELATION && well_formed(&e) {
                let cal = measure_calibration(samples, bank, buf.sample_rate(), best, sym)?;
                return Ok(SyncResult {
                    preamble_start: best,
                    payload_offset: best + span,
                    correlation,
                    cal,
                });
            }
        }
        offset += hop;
    }
    Err(Error::SyncFailure)
}

/// Calibration measured from a preamble known to start at `preamble_start`.
pub fn calibrate_at(buf: &PcmBuffer, bank: &[f64], symbol_duration_s: f64, preamble_start: usize) -> Result<Calibration> {
    let sym = AskConfig::new(bank.to_vec(), symbol_duration_s, buf.sample_rate())?.symbol_len();
    let len = PREAMBLE_SYMBOLS * sym;
    WindowSpec::new(preamble_start, len).check(buf.len())?;
    measure_calibration(buf.samples(), bank, buf.sample_rate(), preamble_start, sym)
}

fn refine(energy: &mut BankEnergy<'_>, hit: usize, hop: usize, sym: usize, max_offset: usize) -> usize {
    let mut best_in = |lo: usize, hi: usize, step: usize| {
        let mut best = (lo, f64::NEG_INFINITY);
        let mut o = lo;
        while o <= hi {
            let c = contrast(&energy.intervals(o));
            if c > best.1 {
                best = (o, c);
            }
            o += step;
        }
        best.0
    };
    let step = (hop / 8).max(1);
    let coarse = best_in(hit.saturating_sub(hop), (hit + sym).min(max_offset), step);
    best_in(coarse.saturating_sub(step), (coarse + step).min(max_offset), 1)
}

/// Snaps `center` to the peak of the normalised cross-correlation with the
/// first symbols of the known preamble waveform. Interval energies are flat
/// while a shift stays inside the ramps; the waveform itself is not.
fn align(samples: &[f64], cfg: &AskConfig, center: usize, radius: usize, max_offset: usize) -> usize {
    let sym = cfg.symbol_len();
    let masks = PREAMBLE_PATTERN[..ALIGN_SYMBOLS].iter().map(|&on| vec![on; cfg.tone_bank().len()]);
    let template = ask_symbols(cfg, masks);
    let len = ALIGN_SYMBOLS * sym;
    let (lo, hi) = (center.saturating_sub(radius), (center + radius).min(max_offset));
    let mut best = (center, f64::NEG_INFINITY);
    for o in lo..=hi {
        let x = &samples[o..o + len];
        let power: f64 = x.iter().map(|v| v * v).sum();
        if power == 0.0 {
            continue;
        }
        let c = x.iter().zip(&template).map(|(a, b)| a * b).sum::<f64>() / power.sqrt();
        if c > best.1 {
            best = (o, c);
        }
    }
    best.0
}

fn measure_calibration(samples: &[f64], bank: &[f64], sample_rate: u32, start: usize, sym: usize) -> Result<Calibration> {
    let n_on = PREAMBLE_PATTERN.iter().filter(|&&p| p).count() as f64;
    let n_off = PREAMBLE_SYMBOLS as f64 - n_on;
    let sep = ToneSeparator::cached(bank, sym, sample_rate);
    let mut on_energy = vec![0.0; bank.len()];
    let mut noise_floor = vec![0.0; bank.len()];
    for (j, &p) in PREAMBLE_PATTERN.iter().enumerate() {
        let acc = if p { &mut on_energy } else { &mut noise_floor };
        for (a, e) in acc.iter_mut().zip(sep.energies(&samples[start + j * sym..start + (j + 1) * sym])) {
            *a += e;
        }
    }
    on_energy.iter_mut().for_each(|e| *e /= n_on);
    noise_floor.iter_mut().for_each(|e| *e /= n_off);
    Calibration::new(bank.to_vec(), on_energy, noise_floor, sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::concat;
    use crate::modem::{ask_modulate, Preset};
    use crate::BitString;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Bit-at-a-time CRC, independent of the table-driven implementation.
    fn crc_bitwise(data: &[u8]) -> u16 {
        let mut crc: u16 = 0xFFFF;
        for &byte in data {
            for i in (0..8).rev() {
                let bit = (byte >> i) & 1 == 1;
                let top = crc & 0x8000 != 0;
                crc <<= 1;
                if bit ^ top {
                    crc ^= 0x1021;
                }
            }
        }
        crc
    }

    fn ask8_bank() -> Vec<f64> {
        Preset::Ask8Fast.config(44100).unwrap().tone_bank().to_vec()
    }

    #[test]
    fn crc_check_value() {
        assert_eq!(crc_bitwise(b"123456789"), 0x29B1);
        assert_eq!(crc16_ccitt_false(b"123456789"), 0x29B1);
        assert_eq!(crc16_ccitt_false(b""), 0xFFFF);
    }

    #[test]
    fn empty_payload_frame() {
        let f = build_frame(b"").unwrap();
        let crc = crc_bitwise(&[0, 0]).to_be_bytes();
        assert_eq!(f, vec![0, 0, crc[0], crc[1]]);
        assert_eq!(parse_frame(&f).unwrap(), b"");
    }

    #[test]
    fn oversized_payload() {
        assert!(matches!(build_frame(&vec![0; 65536]), Err(Error::PayloadTooLarge(65536))));
        assert_eq!(build_frame(&vec![7; 65535]).unwrap().len(), 65539);
    }

    #[test]
    fn single_bit_flips_are_rejected() {
        let frame = build_frame(b"twelve bytes").unwrap();
        assert_eq!(frame.len(), 16);
        for bit in 0..frame.len() * 8 {
            let mut corrupt = frame.clone();
            corrupt[bit / 8] ^= 0x80 >> (bit % 8);
            match parse_frame(&corrupt) {
                Err(Error::CrcMismatch { .. }) => {}
                // a flipped length bit that grows the declared size reads as truncation
                Err(Error::Truncated { .. }) if bit < 16 => {}
                other => panic!("bit {bit}: {other:?}"),
            }
        }
    }

    #[test]
    fn bursts_are_rejected() {
        let frame = build_frame(b"burst error check payload").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let total = frame.len() * 8;
        for _ in 0..2000 {
            let len = rng.random_range(1..=16usize);
            let start = rng.random_range(16..=total - len);
            let mut corrupt = frame.clone();
            // burst: first and last bits flipped, interior random
            for b in start..start + len {
                let flip = b == start || b == start + len - 1 || rng.random_bool(0.5);
                if flip {
                    corrupt[b / 8] ^= 0x80 >> (b % 8);
                }
            }
            assert!(matches!(parse_frame(&corrupt), Err(Error::CrcMismatch { .. })));
        }
    }

    #[test]
    fn truncation_and_trailing_bytes() {
        let frame = build_frame(b"hello").unwrap();
        for cut in 0..frame.len() {
            assert!(matches!(parse_frame(&frame[..cut]), Err(Error::Truncated { .. })), "cut {cut}");
        }
        let mut long = frame.clone();
        long.push(0);
        assert!(matches!(parse_frame(&long), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn preamble_duration_and_calibration() {
        let bank = ask8_bank();
        let pre = emit_preamble(&bank, 0.02, 44100).unwrap();
        assert_eq!(pre.len(), 8 * 882);
        let sync = detect_preamble(&pre, &bank, 0.02).unwrap();
        assert_eq!(sync.payload_offset, 8 * 882);
        for (&on, &noise) in sync.cal.on_energy().iter().zip(sync.cal.noise_floor()) {
            assert!(on > 10.0 * noise);
        }
    }

    #[test]
    fn detects_after_leading_silence() {
        let bank = ask8_bank();
        let cfg = crate::modem::AskConfig::new(bank.clone(), 0.02, 44100).unwrap();
        let payload = ask_modulate(&cfg, &BitString::from_bytes(b"\xff\x00\xaa\x55"));
        let pre = emit_preamble(&bank, 0.02, 44100).unwrap();
        let tx = concat(&[pre, payload]).unwrap();
        for lead in [0usize, 1, 137, 441, 44100] {
            let rx = tx.padded(lead, 1000);
            let sync = detect_preamble(&rx, &bank, 0.02).unwrap();
            let err = sync.payload_offset as i64 - (lead + 8 * 882) as i64;
            assert!(err.abs() <= 1, "lead {lead}: off by {err}");
        }
    }

    #[test]
    fn alignment_is_sample_accurate_for_every_bank() {
        for preset in Preset::ALL {
            let cfg = preset.config(44100).unwrap();
            let (bank, t) = (cfg.tone_bank().to_vec(), cfg.symbol_duration_s());
            let pre = emit_preamble(&bank, t, 44100).unwrap();
            for lead in [0usize, 3, 1000, 12345] {
                let sync = detect_preamble(&pre.padded(lead, 0), &bank, t).unwrap();
                let err = sync.preamble_start as i64 - lead as i64;
                assert!(err.abs() <= 1, "{preset} lead {lead}: off by {err}");
            }
        }
    }

    #[test]
    fn silence_and_short_buffers_fail() {
        let bank = ask8_bank();
        assert!(matches!(
            detect_preamble(&PcmBuffer::silence(44100, 44100), &bank, 0.02),
            Err(Error::SyncFailure)
        ));
        assert!(matches!(
            detect_preamble(&PcmBuffer::silence(100, 44100), &bank, 0.02),
            Err(Error::SyncFailure)
        ));
    }

    #[test]
    fn noise_does_not_sync() {
        let bank = ask8_bank();
        let cfg = crate::modem::AskConfig::new(bank.clone(), 0.02, 44100).unwrap();
        let phantom = concat(&[
            emit_preamble(&bank, 0.02, 44100).unwrap(),
            ask_modulate(&cfg, &BitString::from_bytes(&[0x5a; 32])),
        ])
        .unwrap();
        let power = phantom.samples().iter().map(|s| s * s).sum::<f64>() / phantom.len() as f64;
        let normal = Normal::new(0.0, power.sqrt()).unwrap();
        let mut false_alarms = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise: Vec<f64> = (0..phantom.len()).map(|_| normal.sample(&mut rng)).collect();
            let buf = PcmBuffer::from_clamped(noise, 44100).unwrap();
            if detect_preamble(&buf, &bank, 0.02).is_ok() {
                false_alarms += 1;
            }
        }
        assert!(false_alarms <= 1, "{false_alarms} false alarms");
    }

    #[test]
    fn calibration_validation() {
        assert!(Calibration::new(vec![1000.0], vec![1.0], vec![1.0], 10).is_err());
        assert!(Calibration::new(vec![1000.0], vec![1.0], vec![-0.1], 10).is_err());
        let c = Calibration::new(vec![1000.0], vec![100.0], vec![1.0], 10).unwrap();
        assert_eq!(c.threshold(1000.0), Some(10.0));
        assert_eq!(c.threshold(999.0), None);
        let clean = Calibration::new(vec![1000.0], vec![100.0], vec![0.0], 10).unwrap();
        assert_eq!(clean.threshold(1000.0), Some(10.0));
    }

    proptest! {
        #[test]
        fn frame_round_trip(payload in prop::collection::vec(any::<u8>(), 0..300)) {
            let f = build_frame(&payload).unwrap();
            prop_assert_eq!(f.len(), payload.len() + 4);
            prop_assert_eq!(crc16_ccitt_false(&payload), crc_bitwise(&payload));
            prop_assert_eq!(parse_frame(&f).unwrap(), payload);
        }
    }
}
