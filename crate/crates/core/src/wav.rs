//! 16-bit mono PCM WAV boundary.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::{Error, PcmBuffer, Result};

const FULL_SCALE: f64 = i16::MAX as f64;

fn spec(sample_rate: u32) -> WavSpec {
    WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    }
}

/// Quantizes to 16 bits: `round(x * 32767)`.
pub fn quantize(x: f64) -> i16 {
    (x * FULL_SCALE).round().clamp(i16::MIN as f64, FULL_SCALE) as i16
}

pub fn dequantize(q: i16) -> f64 {
    (q as f64 / FULL_SCALE).max(-1.0)
}

pub fn write_wav_to<W: Write + Seek>(writer: W, buf: &PcmBuffer) -> Result<()> {
    let mut w = WavWriter::new(writer, spec(buf.sample_rate()))?;
    for &s in buf.samples() {
        w.write_sample(quantize(s))?;
    }
    w.finalize()?;
    Ok(())
}

pub fn write_wav(path: impl AsRef<Path>, buf: &PcmBuffer) -> Result<()> {
    write_wav_to(BufWriter::new(File::create(path)?), buf)
}

/// Reads mono WAV. 16-bit files invert [`quantize`]; other integer widths and
/// 32-bit float are accepted and scaled to [-1, 1].
pub fn read_wav_from<R: Read>(reader: R) -> Result<PcmBuffer> {
    let r = WavReader::new(reader)?;
    let s = r.spec();
    if s.channels != 1 {
        return Err(Error::InvalidArgument(format!("expected mono audio, found {} channels", s.channels)));
    }
    let samples: Vec<f64> = match (s.sample_format, s.bits_per_sample) {
        (SampleFormat::Int, 16) => r.into_samples::<i16>().map(|x| x.map(dequantize)).collect::<Result<_, _>>()?,
        (SampleFormat::Int, bits) => {
            let scale = ((1i64 << (bits - 1)) - 1) as f64;
            r.into_samples::<i32>().map(|x| x.map(|v| v as f64 / scale)).collect::<Result<_, _>>()?
        }
        (SampleFormat::Float, _) => r.into_samples::<f32>().map(|x| x.map(f64::from)).collect::<Result<_, _>>()?,
    };
    PcmBuffer::from_clamped(samples, s.sample_rate)
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<PcmBuffer> {
    read_wav_from(BufReader::new(File::open(path)?))
}
