//! Byte-level send/receive over every voice, framed or not.
//!
//! Byte voices (the four modem presets and `cricket`) send a preamble and
//! then the payload. Framed payloads are length/CRC frames; unframed ones get
//! a single `1` bit after the data so the receiver can find the end from the
//! audio alone. `r2d2` carries text, and a framed r2d2 message is the frame
//! spelled out in lowercase hex. `url` is always framed.

use std::fmt;
use std::str::FromStr;

use crate::cricket::{cricket_decode, cricket_encode, CricketConfig, PREAMBLE_SYMBOL_S};
use crate::dsp::{concat, signal_extent};
use crate::framing::{
    build_frame, calibrate_at, detect_preamble, emit_preamble, frame_len_from_header, parse_frame, Calibration,
    HEADER_LEN,
};
use crate::modem::{ask_demodulate_slice, ask_modulate, fsk_demodulate_slice, fsk_modulate_bits, AskConfig, FskConfig, ModemConfig, Preset};
use crate::r2d2::{r2d2_decode, r2d2_encode_at};
use crate::url::{url_decode_audio, url_encode_audio_at};
use crate::{BitString, Error, PcmBuffer, Result};

/// Samples quieter than this fraction of the peak count as silence when
/// locating where a transmission ends.
pub const EXTENT_REL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Voice {
    Ask8Fast,
    Ask8Slow,
    Ask128,
    Fsk256,
    R2d2,
    Cricket,
    Url,
}

impl Voice {
    pub const ALL: [Voice; 7] = [
        Voice::Ask8Fast,
        Voice::Ask8Slow,
        Voice::Ask128,
        Voice::Fsk256,
        Voice::R2d2,
        Voice::Cricket,
        Voice::Url,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Voice::R2d2 => "r2d2",
            Voice::Cricket => "cricket",
            Voice::Url => "url",
            other => other.preset().unwrap().name(),
        }
    }

    pub fn preset(self) -> Option<Preset> {
        match self {
            Voice::Ask8Fast => Some(Preset::Ask8Fast),
            Voice::Ask8Slow => Some(Preset::Ask8Slow),
            Voice::Ask128 => Some(Preset::Ask128),
            Voice::Fsk256 => Some(Preset::Fsk256),
            _ => None,
        }
    }

    /// Whether arbitrary bytes can be sent (as opposed to text or URLs).
    pub fn carries_bytes(self) -> bool {
        !matches!(self, Voice::R2d2 | Voice::Url)
    }

    pub(crate) fn transport(self, sample_rate: u32) -> Result<Option<Transport>> {
        Ok(match self {
            Voice::R2d2 | Voice::Url => None,
            Voice::Cricket => Some(Transport::Cricket(CricketConfig::with_sample_rate(sample_rate)?)),
            v => Some(match v.preset().unwrap().config(sample_rate)? {
                ModemConfig::Ask(c) => Transport::Ask(c),
                ModemConfig::Fsk(c) => Transport::Fsk(c),
            }),
        })
    }

    /// Length in samples of the preamble a byte voice sends first.
    pub fn preamble_len(self, sample_rate: u32) -> Result<usize> {
        match self.transport(sample_rate)? {
            Some(t) => Ok(t.preamble()?.len()),
            None => Err(Error::InvalidArgument(format!("{self} sends no separate preamble"))),
        }
    }

    /// Encodes `payload`. For `r2d2` and `url` the payload is the text itself.
    pub fn encode(self, payload: &[u8], framed: bool, sample_rate: u32) -> Result<PcmBuffer> {
        match self {
            Voice::R2d2 => {
                let text = if framed {
                    to_hex(&build_frame(payload)?)
                } else {
                    as_text(payload)?.to_owned()
                };
                r2d2_encode_at(&text, sample_rate)
            }
            Voice::Url => url_encode_audio_at(as_text(payload)?, sample_rate),
            _ => {
                let t = self.transport(sample_rate)?.unwrap();
                if framed {
                    t.encode_framed(payload)
                } else {
                    t.encode_unframed(payload)
                }
            }
        }
    }

    pub fn decode(self, audio: &PcmBuffer, framed: bool) -> Result<Vec<u8>> {
        match self {
            Voice::R2d2 => {
                let Some((first, _)) = signal_extent(audio.samples(), EXTENT_REL) else {
                    return Ok(Vec::new());
                };
                let text = r2d2_decode(&audio.slice(first, audio.len() - first)?)?;
                if framed {
                    parse_frame(&from_hex(&text)?)
                } else {
                    Ok(text.into_bytes())
                }
            }
            Voice::Url => Ok(url_decode_audio(audio)?.into_bytes()),
            _ => {
                let t = self.transport(audio.sample_rate())?.unwrap();
                if framed {
                    t.decode_framed(audio)
                } else {
                    t.decode_unframed(audio)
                }
            }
        }
    }

    /// Demodulates the first `n_bits` after the preamble, for error counting.
    ///
    /// Uses the detected preamble when sync succeeds; otherwise falls back to
    /// `known_preamble_start`. Returns the bits and whether sync succeeded.
    pub fn receive_bits(self, audio: &PcmBuffer, n_bits: usize, known_preamble_start: usize) -> Result<(BitString, bool)> {
        let t = self
            .transport(audio.sample_rate())?
            .ok_or_else(|| Error::InvalidArgument(format!("{self} does not carry raw bits")))?;
        let bank = t.sync_bank();
        let (body_start, cal, synced) = match detect_preamble(audio, &bank, t.sync_symbol_s()) {
            Ok(sync) => (sync.payload_offset, sync.cal, true),
            Err(Error::SyncFailure) => {
                let cal = calibrate_at(audio, &bank, t.sync_symbol_s(), known_preamble_start)?;
                (known_preamble_start + t.preamble()?.len(), cal, false)
            }
            Err(e) => return Err(e),
        };
        let n = n_bits.div_ceil(t.bits_per_symbol());
        let mut bits = t.demodulate(&audio.samples()[body_start.min(audio.len())..], n, &cal)?;
        bits.truncate(n_bits);
        Ok((bits, synced))
    }
}

impl fmt::Display for Voice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Voice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Voice::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownVoice(s.to_owned()))
    }
}

fn as_text(payload: &[u8]) -> Result<&str> {
    std::str::from_utf8(payload).map_err(|e| Error::InvalidArgument(format!("payload is not text: {e}")))
}

fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn from_hex(text: &str) -> Result<Vec<u8>> {
    let bad = || Error::InvalidArgument(format!("received text `{text}` is not a hex frame"));
    if text.len() % 2 != 0 || !text.is_ascii() {
        return Err(bad());
    }
    (0..text.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&text[i..i + 2], 16).map_err(|_| bad()))
        .collect()
}

/// A bit pipe with a preamble: one of the modems or the cricket voice.
#[derive(Clone, Debug)]
pub(crate) enum Transport {
    Ask(AskConfig),
    Fsk(FskConfig),
    Cricket(CricketConfig),
}

impl Transport {
    fn sample_rate(&self) -> u32 {
        match self {
            Transport::Ask(c) => c.sample_rate(),
            Transport::Fsk(c) => c.sample_rate(),
            Transport::Cricket(c) => c.sample_rate,
        }
    }

    /// Tones sounded by the preamble. FSK uses 8 tones spread over its bank.
    fn sync_bank(&self) -> Vec<f64> {
        match self {
            Transport::Ask(c) => c.tone_bank().to_vec(),
            Transport::Fsk(c) => {
                let bank = c.tone_bank();
                if bank.len() < 8 {
                    return bank.to_vec();
                }
                let stride = bank.len() / 8;
                (0..8).map(|j| bank[stride / 2 + j * stride]).collect()
            }
            Transport::Cricket(c) => vec![c.carrier_hz],
        }
    }

    fn sync_symbol_s(&self) -> f64 {
        match self {
            Transport::Ask(c) => c.symbol_duration_s(),
            Transport::Fsk(c) => c.symbol_duration_s(),
            Transport::Cricket(_) => PREAMBLE_SYMBOL_S,
        }
    }

    fn preamble(&self) -> Result<PcmBuffer> {
        emit_preamble(&self.sync_bank(), self.sync_symbol_s(), self.sample_rate())
    }

    fn bits_per_symbol(&self) -> usize {
        match self {
            Transport::Ask(c) => c.bits_per_symbol(),
            Transport::Fsk(c) => c.bits_per_symbol(),
            Transport::Cricket(_) => crate::cricket::BITS_PER_SYMBOL,
        }
    }

    /// Samples occupied by `n` symbols.
    fn span(&self, n: usize) -> usize {
        match self {
            Transport::Ask(c) => n * c.symbol_len(),
            Transport::Fsk(c) => n * c.symbol_len(),
            Transport::Cricket(c) => c.symbol_start(n),
        }
    }

    fn whole_symbols(&self, len: usize) -> usize {
        match self {
            Transport::Ask(c) => len / c.symbol_len(),
            Transport::Fsk(c) => len / c.symbol_len(),
            Transport::Cricket(c) => (len as f64 / (c.symbol_period_s * c.sample_rate as f64)).floor() as usize,
        }
    }

    /// Number of symbols needed to reach sample index `last`.
    fn symbols_through(&self, last: usize) -> usize {
        match self {
            Transport::Ask(c) => last / c.symbol_len() + 1,
            Transport::Fsk(c) => last / c.symbol_len() + 1,
            Transport::Cricket(c) => (last as f64 / (c.symbol_period_s * c.sample_rate as f64)).floor() as usize + 1,
        }
    }

    fn modulate(&self, bits: &BitString) -> PcmBuffer {
        match self {
            Transport::Ask(c) => ask_modulate(c, bits),
            Transport::Fsk(c) => fsk_modulate_bits(c, bits),
            Transport::Cricket(c) => cricket_encode(c, bits),
        }
    }

    /// Demodulates `n` symbols from `body`, zero-padding a short tail.
    fn demodulate(&self, body: &[f64], n: usize, cal: &Calibration) -> Result<BitString> {
        let len = self.span(n);
        let mut samples = body[..len.min(body.len())].to_vec();
        samples.resize(len, 0.0);
        match self {
            Transport::Ask(c) => ask_demodulate_slice(c, &samples, cal),
            Transport::Fsk(c) => fsk_demodulate_slice(c, &samples),
            Transport::Cricket(c) => cricket_decode(c, &PcmBuffer::from_clamped(samples, c.sample_rate)?, cal),
        }
    }

    fn with_preamble(&self, bits: &BitString) -> Result<PcmBuffer> {
        concat(&[self.preamble()?, self.modulate(bits)])
    }

    pub(crate) fn encode_framed(&self, payload: &[u8]) -> Result<PcmBuffer> {
        self.with_preamble(&BitString::from_bytes(&build_frame(payload)?))
    }

    fn encode_unframed(&self, payload: &[u8]) -> Result<PcmBuffer> {
        let mut bits = BitString::from_bytes(payload);
        bits.push(true);
        self.with_preamble(&bits)
    }

    fn sync<'a>(&self, audio: &'a PcmBuffer) -> Result<(&'a [f64], Calibration)> {
        let sync = detect_preamble(audio, &self.sync_bank(), self.sync_symbol_s())?;
        Ok((&audio.samples()[sync.payload_offset..], sync.cal))
    }

    pub(crate) fn decode_framed(&self, audio: &PcmBuffer) -> Result<Vec<u8>> {
        let (body, cal) = self.sync(audio)?;
        let bps = self.bits_per_symbol();
        let header_bits = HEADER_LEN * 8;
        let header = self.demodulate(body, header_bits.div_ceil(bps), &cal)?.to_bytes();
        let frame_len = frame_len_from_header([header[0], header[1]]);
        let frame_bits = frame_len * 8;
        let n = frame_bits.div_ceil(bps);
        if self.span(n) > body.len() {
            return Err(Error::Truncated {
                needed: frame_len,
                available: self.whole_symbols(body.len()) * bps / 8,
            });
        }
        let mut bits = self.demodulate(body, n, &cal)?;
        bits.truncate(frame_bits);
        parse_frame(&bits.to_bytes())
    }

    fn decode_unframed(&self, audio: &PcmBuffer) -> Result<Vec<u8>> {
        let (body, cal) = self.sync(audio)?;
        let Some((_, last)) = signal_extent(body, EXTENT_REL) else {
            return Err(Error::MissingEnd);
        };
        let mut bits = self.demodulate(body, self.symbols_through(last), &cal)?.into_inner();
        while bits.last() == Some(&false) {
            bits.pop();
        }
        if bits.pop().is_none() || bits.len() % 8 != 0 {
            return Err(Error::MissingEnd);
        }
        Ok(BitString::from(bits).to_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for v in Voice::ALL {
            assert_eq!(v.name().parse::<Voice>().unwrap(), v);
        }
        assert!(matches!("kazoo".parse::<Voice>(), Err(Error::UnknownVoice(_))));
    }

    #[test]
    fn fsk_sync_bank_is_spread() {
        let t = Voice::Fsk256.transport(44100).unwrap().unwrap();
        let bank = t.sync_bank();
        assert_eq!(bank.len(), 8);
        assert_eq!(bank[0], 1000.0 + 20.0 * 16.0);
        assert_eq!(bank[7], 1000.0 + 20.0 * (16.0 + 7.0 * 32.0));
    }

    #[test]
    fn byte_voices_round_trip() {
        let payloads: [&[u8]; 4] = [b"", b"\x00", b"hello world\x00\x00", &[0xFF; 33]];
        for v in Voice::ALL.into_iter().filter(|v| v.carries_bytes()) {
            for p in payloads {
                for framed in [false, true] {
                    let audio = v.encode(p, framed, 44100).unwrap().padded(1234, 777);
                    assert_eq!(v.decode(&audio, framed).unwrap(), p, "{v} framed={framed} {p:?}");
                }
            }
        }
    }

    #[test]
    fn text_voices_round_trip() {
        let audio = Voice::R2d2.encode(b"beep 42.", false, 44100).unwrap().padded(5000, 5000);
        assert_eq!(Voice::R2d2.decode(&audio, false).unwrap(), b"beep 42.");
        let audio = Voice::R2d2.encode(b"\x00\xffbinary", true, 44100).unwrap().padded(300, 0);
        assert_eq!(Voice::R2d2.decode(&audio, true).unwrap(), b"\x00\xffbinary");
        let url = b"mailto:someone@example.org";
        let audio = Voice::Url.encode(url, true, 44100).unwrap();
        assert_eq!(Voice::Url.decode(&audio, true).unwrap(), url);
    }

    #[test]
    fn corrupted_frame_is_rejected() {
        let audio = Voice::Ask8Fast.encode(b"payload", true, 44100).unwrap();
        let t = Voice::Ask8Fast.transport(44100).unwrap().unwrap();
        let sym = t.span(1);
        let body = t.preamble().unwrap().len();
        // Silence one symbol in the middle of the payload.
        let mut samples = audio.into_samples();
        samples[body + 4 * sym..body + 5 * sym].fill(0.0);
        let audio = PcmBuffer::new(samples, 44100).unwrap();
        assert!(matches!(
            Voice::Ask8Fast.decode(&audio, true),
            Err(Error::CrcMismatch { .. })
        ));
    }

    #[test]
    fn silence_fails_sync() {
        let s = PcmBuffer::silence(44100, 44100);
        for v in [Voice::Ask8Fast, Voice::Fsk256, Voice::Cricket] {
            assert!(matches!(v.decode(&s, true), Err(Error::SyncFailure)));
        }
    }

    #[test]
    fn receive_bits_with_and_without_sync() {
        let frame = build_frame(b"abc").unwrap();
        let audio = Voice::Ask128.encode(b"abc", true, 44100).unwrap();
        let (bits, synced) = Voice::Ask128.receive_bits(&audio, frame.len() * 8, 0).unwrap();
        assert!(synced);
        assert_eq!(bits.to_bytes(), frame);
    }
}
