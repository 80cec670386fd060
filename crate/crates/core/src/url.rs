//! URL voice. The scheme picks the frequency band, so a listener can tell a
//! mail address from a web link without decoding anything; the URL itself is
//! dictionary-coded, framed and sent as 8-tone ASK inside that band.

use crate::dsp::{ToneProjection, DEFAULT_SAMPLE_RATE};
use crate::modem::AskConfig;
use crate::voice::Transport;
use crate::{BitString, Error, PcmBuffer, Result};

pub const CODE_BITS: usize = 6;
pub const LITERAL_BITS: usize = 7;
pub const ESCAPE: u32 = 0;
pub const END: u32 = 63;
pub const MAX_ENTRIES: usize = 62;

pub const MAILTO_BASE_HZ: f64 = 1000.0;
pub const HTTP_BASE_HZ: f64 = 2000.0;
pub const TONE_SPACING_HZ: f64 = 50.0;
pub const BAND_TONES: usize = 8;
/// Width of each scheme's band region.
pub const BAND_WIDTH_HZ: f64 = 400.0;
pub const SYMBOL_S: f64 = 0.020;
/// The winning band must carry at least this multiple of the other's energy.
pub const DOMINANCE: f64 = 2.0;

/// Substrings coded as single 6-bit tokens, in code order starting at 1.
const STANDARD_ENTRIES: [&str; 58] = [
    "http://", "mailto:", "www.", ".com", ".org", ".net", ".edu", ".gov", ".html", ".htm", ".php", ".pdf", ".jpg",
    ".gif", ".info", ".io", ".uk", ".de", "index", "home", "news", "mail", "info", "user", "search", "blog", "docs",
    "images", "login", "page", "about", "help", "the", "ing", "/", ".", "@", "-", "_", "?", "=", "&", "%", "#", "~",
    ":", "e", "o", "t", "i", "n", "s", "l", "h", "m", "u", "0", "1",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeClass {
    Mailto,
    Http,
    Other,
}

impl SchemeClass {
    /// Lowest tone of the scheme's band; `None` for `Other`.
    pub fn band_base_hz(self) -> Option<f64> {
        match self {
            SchemeClass::Mailto => Some(MAILTO_BASE_HZ),
            SchemeClass::Http => Some(HTTP_BASE_HZ),
            SchemeClass::Other => None,
        }
    }

    pub fn tone_bank(self) -> Option<Vec<f64>> {
        self.band_base_hz()
            .map(|base| (0..BAND_TONES).map(|i| base + TONE_SPACING_HZ * i as f64).collect())
    }
}

pub fn classify_scheme(url: &str) -> SchemeClass {
    let starts = |p: &str| url.get(..p.len()).is_some_and(|head| head.eq_ignore_ascii_case(p));
    if starts("http://") {
        SchemeClass::Http
    } else if starts("mailto:") {
        SchemeClass::Mailto
    } else {
        SchemeClass::Other
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UrlDictionary {
    entries: Vec<String>,
}

impl Default for UrlDictionary {
    fn default() -> Self {
        Self::standard()
    }
}

impl UrlDictionary {
    pub fn new(entries: Vec<String>) -> Result<Self> {
        if entries.len() > MAX_ENTRIES {
            return Err(Error::InvalidConfig(format!(
                "{} dictionary entries exceed the {MAX_ENTRIES} available codes",
                entries.len()
            )));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.is_empty() || !e.is_ascii() {
                return Err(Error::InvalidConfig(format!("entry {i} must be non-empty ASCII")));
            }
            if entries[..i].contains(e) {
                return Err(Error::InvalidConfig(format!("duplicate entry `{e}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn standard() -> Self {
        Self::new(STANDARD_ENTRIES.iter().map(|s| s.to_string()).collect()).expect("built-in dictionary is valid")
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    /// One entry per line, in code order. Blank lines are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(|l| l.strip_suffix('\r').unwrap_or(l))
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect(),
        )
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Longest entry that prefixes `rest`, as (code, length).
    fn longest_match(&self, rest: &str) -> Option<(u32, usize)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| rest.starts_with(e.as_str()))
            .max_by_key(|(i, e)| (e.len(), std::cmp::Reverse(*i)))
            .map(|(i, e)| (i as u32 + 1, e.len()))
    }
}

/// Greedy longest-match tokens as 6-bit codes; anything else is ESCAPE plus
/// a 7-bit literal. Always terminated by END.
pub fn url_compress(url: &str, dict: &UrlDictionary) -> Result<BitString> {
    if let Some((position, ch)) = url.chars().enumerate().find(|(_, c)| !c.is_ascii()) {
        return Err(Error::NonAscii { ch, position });
    }
    let mut bits = BitString::new();
    let mut pos = 0;
    while pos < url.len() {
        match dict.longest_match(&url[pos..]) {
            Some((code, len)) => {
                bits.push_bits(code, CODE_BITS);
                pos += len;
            }
            None => {
                bits.push_bits(ESCAPE, CODE_BITS);
                bits.push_bits(url.as_bytes()[pos] as u32, LITERAL_BITS);
                pos += 1;
            }
        }
    }
    bits.push_bits(END, CODE_BITS);
    Ok(bits)
}

/// Inverse of [`url_compress`]. Bits after END are ignored.
pub fn url_decompress(bits: &BitString, dict: &UrlDictionary) -> Result<String> {
    let mut out = String::new();
    let mut pos = 0;
    loop {
        let code = bits.read_bits(pos, CODE_BITS).ok_or(Error::MissingEnd)?;
        pos += CODE_BITS;
        match code {
            END => return Ok(out),
            ESCAPE => {
                let lit = bits.read_bits(pos, LITERAL_BITS).ok_or(Error::MissingEnd)?;
                pos += LITERAL_BITS;
                out.push(lit as u8 as char);
            }
            c => {
                let entry = dict.entries.get(c as usize - 1).ok_or(Error::UnknownCode(c as u8))?;
                out.push_str(entry);
            }
        }
    }
}

fn transport(scheme: SchemeClass, sample_rate: u32) -> Result<Transport> {
    let bank = scheme.tone_bank().ok_or(Error::UnsupportedScheme)?;
    Ok(Transport::Ask(AskConfig::new(bank, SYMBOL_S, sample_rate)?))
}

pub fn url_encode_audio(url: &str) -> Result<PcmBuffer> {
    url_encode_audio_at(url, DEFAULT_SAMPLE_RATE)
}

/// Compressed, framed and sent in the band that belongs to the URL's scheme.
pub fn url_encode_audio_at(url: &str, sample_rate: u32) -> Result<PcmBuffer> {
    let t = transport(classify_scheme(url), sample_rate)?;
    let bits = url_compress(url, &UrlDictionary::standard())?;
    t.encode_framed(&bits.to_bytes_padded())
}

/// Summed tone energy of each band over consecutive symbol-length windows.
fn band_energies(buf: &PcmBuffer) -> (f64, f64) {
    let sr = buf.sample_rate();
    let win = crate::dsp::samples_for(SYMBOL_S, sr);
    let band = |scheme: SchemeClass| -> f64 {
        let bank = scheme.tone_bank().unwrap();
        bank.iter()
            .filter(|&&f| f < sr as f64 / 2.0)
            .map(|&f| {
                let proj = ToneProjection::new(buf.samples(), f, sr);
                (0..buf.len() / win).map(|k| proj.energy(k * win, win)).sum::<f64>()
            })
            .sum()
    };
    (band(SchemeClass::Mailto), band(SchemeClass::Http))
}

/// Scheme read from which band is sounding, without demodulating anything.
pub fn url_classify_audio(buf: &PcmBuffer) -> SchemeClass {
    let (mailto, http) = band_energies(buf);
    if mailto > 0.0 && mailto >= DOMINANCE * http {
        SchemeClass::Mailto
    } else if http > 0.0 && http >= DOMINANCE * mailto {
        SchemeClass::Http
    } else {
        SchemeClass::Other
    }
}

/// Classifies the band, then synchronises, deframes and decompresses.
pub fn url_decode_audio(buf: &PcmBuffer) -> Result<String> {
    let scheme = url_classify_audio(buf);
    if scheme == SchemeClass::Other {
        return Err(Error::SyncFailure);
    }
    let bytes = transport(scheme, buf.sample_rate())?.decode_framed(buf)?;
    url_decompress(&BitString::from_bytes(&bytes), &UrlDictionary::standard())
}
