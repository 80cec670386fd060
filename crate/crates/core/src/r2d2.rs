//! Text voice: letters are beeps, digits are grunts (simultaneous tone
//! subsets), space and three punctuation marks are frequency sweeps.

use std::borrow::Cow;
use std::f64::consts::PI;

use crate::dsp::{apply_ramp, check_frequency, goertzel, ramp_len, samples_for, tone_samples, DEFAULT_SAMPLE_RATE};
use crate::{Error, PcmBuffer, Result};

pub const BEEP_S: f64 = 0.100;
pub const CHIRP_S: f64 = 0.250;
pub const GRUNT_S: f64 = 0.200;
pub const AMPLITUDE: f64 = 0.8;

pub const CHIRP_LOW_HZ: f64 = 4200.0;
pub const CHIRP_HIGH_HZ: f64 = 5200.0;

/// Look-ahead used to decide the class of the next symbol.
pub const CLASSIFY_S: f64 = 0.080;

const BEEP_LINE_MIN: f64 = 0.5;
const GRUNT_LINE_MIN: f64 = 0.15;
const GRUNT_TOTAL_MIN: f64 = 0.5;
const CHIRP_BAND_MIN: f64 = 0.5;
const CHIRP_MOVE_HZ: f64 = 100.0;
/// Windows whose peak is below this fraction of the buffer peak carry no
/// evidence of any class.
const SILENCE_REL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolClass {
    Beep,
    Chirp,
    Grunt,
}

impl SymbolClass {
    pub fn duration_s(self) -> f64 {
        match self {
            SymbolClass::Beep => BEEP_S,
            SymbolClass::Chirp => CHIRP_S,
            SymbolClass::Grunt => GRUNT_S,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChirpShape {
    Up,
    Down,
    UpDown,
    DownUp,
}

impl ChirpShape {
    /// Instantaneous frequency at fraction `x` in [0, 1] of the sweep.
    fn freq_at(self, x: f64) -> f64 {
        let span = CHIRP_HIGH_HZ - CHIRP_LOW_HZ;
        let rise = |u: f64| CHIRP_LOW_HZ + span * u;
        let fall = |u: f64| CHIRP_HIGH_HZ - span * u;
        match self {
            ChirpShape::Up => rise(x),
            ChirpShape::Down => fall(x),
            ChirpShape::UpDown if x < 0.5 => rise(2.0 * x),
            ChirpShape::UpDown => fall(2.0 * x - 1.0),
            ChirpShape::DownUp if x < 0.5 => fall(2.0 * x),
            ChirpShape::DownUp => rise(2.0 * x - 1.0),
        }
    }

    fn from_moves(first_rises: bool, second_rises: bool) -> Self {
        match (first_rises, second_rises) {
            (true, true) => ChirpShape::Up,
            (false, false) => ChirpShape::Down,
            (true, false) => ChirpShape::UpDown,
            (false, true) => ChirpShape::DownUp,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct R2d2Alphabet {
    pub beep_freqs: [f64; 26],
    pub chirp_shapes: [(char, ChirpShape); 4],
    pub grunt_bank: [f64; 4],
    /// Indices into `grunt_bank` for digits 0-9.
    pub grunt_combos: [Vec<usize>; 10],
}

impl Default for R2d2Alphabet {
    fn default() -> Self {
        Self::standard()
    }
}

impl R2d2Alphabet {
    pub fn standard() -> Self {
        let mut pairs = Vec::new();
        let mut triples = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                pairs.push(vec![a, b]);
                for c in b + 1..4 {
                    triples.push(vec![a, b, c]);
                }
            }
        }
        let mut combos = pairs.into_iter().chain(triples);
        Self {
            beep_freqs: std::array::from_fn(|i| 1500.0 + 100.0 * i as f64),
            chirp_shapes: [
                (' ', ChirpShape::Up),
                ('.', ChirpShape::Down),
                (',', ChirpShape::UpDown),
                ('?', ChirpShape::DownUp),
            ],
            grunt_bank: [500.0, 600.0, 700.0, 800.0],
            grunt_combos: std::array::from_fn(|_| combos.next().unwrap()),
        }
    }

    /// All 40 characters in table order: letters, digits, chirp characters.
    pub fn symbols(&self) -> Vec<char> {
        ('a'..='z')
            .chain('0'..='9')
            .chain(self.chirp_shapes.iter().map(|(c, _)| *c))
            .collect()
    }

    /// Class of `ch` after lowercasing, or `None` outside the alphabet.
    pub fn class_of(&self, ch: char) -> Option<SymbolClass> {
        match ch.to_ascii_lowercase() {
            'a'..='z' => Some(SymbolClass::Beep),
            '0'..='9' => Some(SymbolClass::Grunt),
            c if self.chirp_shapes.iter().any(|(s, _)| *s == c) => Some(SymbolClass::Chirp),
            _ => None,
        }
    }

    fn chirp_shape(&self, ch: char) -> Option<ChirpShape> {
        self.chirp_shapes.iter().find(|(c, _)| *c == ch).map(|(_, s)| *s)
    }

    fn chirp_char(&self, shape: ChirpShape) -> char {
        self.chirp_shapes.iter().find(|(_, s)| *s == shape).map(|(c, _)| *c).unwrap()
    }
}

fn validate(text: &str, alphabet: &R2d2Alphabet) -> Result<Vec<(char, SymbolClass)>> {
    text.chars()
        .enumerate()
        .map(|(position, ch)| {
            alphabet
                .class_of(ch)
                .map(|class| (ch.to_ascii_lowercase(), class))
                .ok_or(Error::UnsupportedChar { ch, position })
        })
        .collect()
}

fn chirp_samples(shape: ChirpShape, n: usize, sample_rate: u32) -> Vec<f64> {
    let sr = sample_rate as f64;
    let mut phase: f64 = 0.0;
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let s = AMPLITUDE * phase.sin();
            phase += 2.0 * PI * shape.freq_at(i as f64 / n as f64) / sr;
            s
        })
        .collect();
    apply_ramp(&mut out, ramp_len(n, sample_rate));
    out
}

fn symbol_samples(alphabet: &R2d2Alphabet, ch: char, class: SymbolClass, sample_rate: u32) -> Vec<f64> {
    let n = samples_for(class.duration_s(), sample_rate);
    match class {
        SymbolClass::Beep => {
            let f = alphabet.beep_freqs[(ch as u8 - b'a') as usize];
            tone_samples(f, n, AMPLITUDE, sample_rate)
        }
        SymbolClass::Grunt => {
            let combo = &alphabet.grunt_combos[(ch as u8 - b'0') as usize];
            let amp = AMPLITUDE / combo.len() as f64;
            let mut out = vec![0.0; n];
            for &i in combo {
                for (o, s) in out.iter_mut().zip(tone_samples(alphabet.grunt_bank[i], n, amp, sample_rate)) {
                    *o += s;
                }
            }
            out
        }
        SymbolClass::Chirp => chirp_samples(alphabet.chirp_shape(ch).unwrap(), n, sample_rate),
    }
}

/// Encodes text at the default sample rate.
pub fn r2d2_encode(text: &str) -> Result<PcmBuffer> {
    r2d2_encode_at(text, DEFAULT_SAMPLE_RATE)
}

pub fn r2d2_encode_at(text: &str, sample_rate: u32) -> Result<PcmBuffer> {
    check_frequency(CHIRP_HIGH_HZ, sample_rate)?;
    let alphabet = R2d2Alphabet::standard();
    let mut out = Vec::new();
    for (ch, class) in validate(text, &alphabet)? {
        out.extend(symbol_samples(&alphabet, ch, class, sample_rate));
    }
    PcmBuffer::from_clamped(out, sample_rate)
}

/// Window of `len` samples at `pos`, zero-padded past the end.
fn window(samples: &[f64], pos: usize, len: usize) -> Cow<'_, [f64]> {
    let end = pos + len;
    if end <= samples.len() {
        Cow::Borrowed(&samples[pos..end])
    } else {
        let mut w = samples.get(pos..).unwrap_or(&[]).to_vec();
        w.resize(len, 0.0);
        Cow::Owned(w)
    }
}

fn peak(samples: &[f64]) -> f64 {
    samples.iter().fold(0.0, |m, s| m.max(s.abs()))
}

/// Fraction of the window's energy carried by a single line at `freq_hz`.
fn line_fraction(w: &[f64], total: f64, freq_hz: f64, sample_rate: u32) -> f64 {
    2.0 * goertzel(w, freq_hz, sample_rate) / (w.len() as f64 * total)
}

/// Energy-weighted mean frequency over exact DFT bins spanning the chirp band,
/// together with the fraction of the window's energy that lies in that band.
fn chirp_centroid(w: &[f64], sample_rate: u32) -> (f64, f64) {
    let total: f64 = w.iter().map(|s| s * s).sum();
    let df = sample_rate as f64 / w.len() as f64;
    let lo = ((CHIRP_LOW_HZ - 100.0) / df).floor() as usize;
    let hi = ((CHIRP_HIGH_HZ + 100.0) / df).ceil() as usize;
    let (mut sum, mut weighted) = (0.0, 0.0);
    for k in lo..=hi {
        let f = k as f64 * df;
        let g = goertzel(w, f, sample_rate);
        sum += g;
        weighted += g * f;
    }
    if sum <= 0.0 || total <= 0.0 {
        return (0.0, 0.0);
    }
    // Parseval: positive-frequency bins carry half of N * sum(x^2).
    let band = 2.0 * sum / (w.len() as f64 * total);
    (weighted / sum, band)
}

fn classify(w: &[f64], alphabet: &R2d2Alphabet, sample_rate: u32) -> Option<SymbolClass> {
    let total: f64 = w.iter().map(|s| s * s).sum();
    if total <= 0.0 {
        return None;
    }
    let beep_max = alphabet
        .beep_freqs
        .iter()
        .map(|&f| line_fraction(w, total, f, sample_rate))
        .fold(0.0, f64::max);
    if beep_max >= BEEP_LINE_MIN {
        return Some(SymbolClass::Beep);
    }
    let grunt: Vec<f64> = alphabet.grunt_bank.iter().map(|&f| line_fraction(w, total, f, sample_rate)).collect();
    let lines = grunt.iter().filter(|&&g| g >= GRUNT_LINE_MIN).count();
    if lines >= 2 && grunt.iter().sum::<f64>() >= GRUNT_TOTAL_MIN {
        return Some(SymbolClass::Grunt);
    }
    let half = w.len() / 2;
    let (c1, b1) = chirp_centroid(&w[..half], sample_rate);
    let (c2, b2) = chirp_centroid(&w[half..2 * half], sample_rate);
    if b1 >= CHIRP_BAND_MIN && b2 >= CHIRP_BAND_MIN && (c2 - c1).abs() >= CHIRP_MOVE_HZ {
        return Some(SymbolClass::Chirp);
    }
    None
}

fn decode_symbol(w: &[f64], class: SymbolClass, alphabet: &R2d2Alphabet, sample_rate: u32) -> char {
    match class {
        SymbolClass::Beep => {
            let mut best = (0, f64::NEG_INFINITY);
            for (i, &f) in alphabet.beep_freqs.iter().enumerate() {
                let e = goertzel(w, f, sample_rate);
                if e > best.1 {
                    best = (i, e);
                }
            }
            (b'a' + best.0 as u8) as char
        }
        SymbolClass::Grunt => {
            let e: Vec<f64> = alphabet.grunt_bank.iter().map(|&f| goertzel(w, f, sample_rate).sqrt()).collect();
            // Compare normalised line amplitudes against each subset's profile.
            let sum: f64 = e.iter().sum();
            let v: Vec<f64> = e.iter().map(|x| x / sum.max(f64::MIN_POSITIVE)).collect();
            let mut best = (0, f64::INFINITY);
            for (digit, combo) in alphabet.grunt_combos.iter().enumerate() {
                let k = combo.len() as f64;
                let d: f64 = (0..4)
                    .map(|i| {
                        let t = if combo.contains(&i) { 1.0 / k } else { 0.0 };
                        (v[i] - t).powi(2)
                    })
                    .sum();
                if d < best.1 {
                    best = (digit, d);
                }
            }
            (b'0' + best.0 as u8) as char
        }
        SymbolClass::Chirp => {
            let n = w.len();
            let sub = samples_for(0.050, sample_rate).min(n / 3);
            let c = |start: usize| chirp_centroid(&w[start..start + sub], sample_rate).0;
            let (a, b, z) = (c(0), c((n - sub) / 2), c(n - sub));
            alphabet.chirp_char(ChirpShape::from_moves(b > a, z > b))
        }
    }
}

/// Greedy left-to-right decode of a buffer that starts on a symbol boundary.
///
/// Decoding stops when the remainder is exhausted or silent. A final symbol
/// cut short by a few samples is zero-padded.
pub fn r2d2_decode(buf: &PcmBuffer) -> Result<String> {
    let sr = buf.sample_rate();
    let alphabet = R2d2Alphabet::standard();
    let samples = buf.samples();
    let floor = SILENCE_REL * peak(samples);
    let look = samples_for(CLASSIFY_S, sr);
    let mut out = String::new();
    let mut pos = 0;
    while pos < samples.len() {
        if peak(&samples[pos..]) <= floor {
            break;
        }
        let w = window(samples, pos, look);
        let class = if peak(&w) > floor { classify(&w, &alphabet, sr) } else { None };
        let class = class.ok_or(Error::Unclassifiable(pos))?;
        let n = samples_for(class.duration_s(), sr);
        out.push(decode_symbol(&window(samples, pos, n), class, &alphabet, sr));
        pos += n;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SentenceStats {
    pub duration_s: f64,
    pub info_bps: f64,
}

/// Duration and information rate counting only letters and digits, each
/// worth log2(40) bits.
pub fn r2d2_sentence_stats(text: &str) -> Result<SentenceStats> {
    let alphabet = R2d2Alphabet::standard();
    let classes = validate(text, &alphabet)?;
    if classes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let duration_s: f64 = classes.iter().map(|(_, c)| c.duration_s()).sum();
    let word_chars = classes.iter().filter(|(_, c)| *c != SymbolClass::Chirp).count();
    let bits = (alphabet.symbols().len() as f64).log2();
    Ok(SentenceStats {
        duration_s,
        info_bps: word_chars as f64 * bits / duration_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::synth_tone;
    use proptest::prelude::*;

    fn canonical() -> String {
        let words: Vec<&str> = "hello world robot beeps droid sound quick brown foxes jumps grand finis"
            .split(' ')
            .collect();
        assert_eq!(words.len(), 12);
        format!("{}.", words.join(" "))
    }

    #[test]
    fn alphabet_shape() {
        let a = R2d2Alphabet::standard();
        let syms = a.symbols();
        assert_eq!(syms.len(), 40);
        let mut dedup = syms.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 40);
        assert_eq!(a.grunt_combos[0], vec![0, 1]);
        assert_eq!(a.grunt_combos[5], vec![2, 3]);
        assert_eq!(a.grunt_combos[6], vec![0, 1, 2]);
        assert_eq!(a.grunt_combos[9], vec![1, 2, 3]);
        // bands disjoint
        let beep_lo = a.beep_freqs[0];
        let beep_hi = a.beep_freqs[25];
        assert!(a.grunt_bank.iter().all(|&g| g < beep_lo));
        assert!(CHIRP_LOW_HZ > beep_hi);
    }

    #[test]
    fn durations_are_exact() {
        assert_eq!(r2d2_encode("a").unwrap().len(), 4410);
        assert_eq!(r2d2_encode(" ").unwrap().len(), 11025);
        assert_eq!(r2d2_encode("7").unwrap().len(), 8820);
        assert!(r2d2_encode("").unwrap().is_empty());
        let s = r2d2_encode(&canonical()).unwrap();
        assert!((s.duration_s() - 9.0).abs() < 1e-9);
    }

    #[test]
    fn single_letter_is_a_tone() {
        let a = r2d2_encode("a").unwrap();
        let expected = tone_samples(1500.0, 4410, AMPLITUDE, 44100);
        assert_eq!(a.samples(), expected.as_slice());
    }

    #[test]
    fn uppercase_and_rejections() {
        assert_eq!(r2d2_encode("AbC").unwrap(), r2d2_encode("abc").unwrap());
        match r2d2_encode("ab!c") {
            Err(Error::UnsupportedChar { ch: '!', position: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(r2d2_encode("é").is_err());
    }

    #[test]
    fn every_symbol_decodes() {
        let a = R2d2Alphabet::standard();
        for ch in a.symbols() {
            let s = ch.to_string();
            assert_eq!(r2d2_decode(&r2d2_encode(&s).unwrap()).unwrap(), s, "symbol {ch:?}");
        }
    }

    #[test]
    fn bare_tone_decodes_as_z() {
        let t = synth_tone(4000.0, 0.1, 0.5, 44100).unwrap();
        assert_eq!(r2d2_decode(&t).unwrap(), "z");
    }

    #[test]
    fn mixed_segmentation() {
        for s in ["r2d2", "hello, world?", "2024. 99 luftballons", canonical().as_str()] {
            assert_eq!(r2d2_decode(&r2d2_encode(s).unwrap()).unwrap(), s);
        }
    }

    #[test]
    fn silence_gap_is_unclassifiable() {
        let a = r2d2_encode("ab").unwrap();
        let mut samples = a.samples()[..4410].to_vec();
        samples.extend(vec![0.0; 8000]);
        samples.extend(&a.samples()[4410..]);
        let buf = PcmBuffer::new(samples, 44100).unwrap();
        assert!(matches!(r2d2_decode(&buf), Err(Error::Unclassifiable(4410))));
        // trailing silence is fine
        let padded = a.padded(0, 20000);
        assert_eq!(r2d2_decode(&padded).unwrap(), "ab");
        // and an empty buffer decodes to nothing
        assert_eq!(r2d2_decode(&PcmBuffer::empty(44100)).unwrap(), "");
    }

    #[test]
    fn sentence_stats() {
        let st = r2d2_sentence_stats(&canonical()).unwrap();
        assert!((st.duration_s - 9.0).abs() < 1e-12);
        assert!((st.info_bps - 35.48).abs() < 0.01, "{}", st.info_bps);
        let a = r2d2_sentence_stats("a").unwrap();
        assert!((a.duration_s - 0.1).abs() < 1e-12);
        assert!((a.info_bps - 53.22).abs() < 0.01);
        assert!(matches!(r2d2_sentence_stats(""), Err(Error::EmptyInput)));
        assert!(r2d2_sentence_stats("a#").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn round_trip(s in "[a-z0-9 .,?]{0,12}") {
            let audio = r2d2_encode(&s).unwrap();
            prop_assert_eq!(r2d2_decode(&audio).unwrap(), s);
        }

        #[test]
        fn scaled_round_trip(s in "[a-z0-9 .,?]{1,6}", gain in 0.05f64..1.0) {
            let audio = r2d2_encode(&s).unwrap().scaled(gain).unwrap();
            prop_assert_eq!(r2d2_decode(&audio).unwrap(), s);
        }
    }
}
