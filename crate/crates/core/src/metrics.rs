//! Rates, bit errors, and the BER-versus-SNR sweep.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{apply_channel, ChannelSpec};
use crate::dsp::{samples_for, DEFAULT_SAMPLE_RATE};
use crate::framing::build_frame;
use crate::voice::Voice;
use crate::{BitString, Error, Result};

/// Silence added on each side of every sweep transmission.
pub const SWEEP_PAD_S: f64 = 0.1;

/// Bits per second of a phoneme inventory spoken at `phonemes_per_s`.
pub fn phoneme_rate(num_phonemes: u64, phonemes_per_s: f64) -> Result<f64> {
    if num_phonemes < 2 {
        return Err(Error::InvalidArgument(format!("{num_phonemes} phonemes carry no information")));
    }
    if !(phonemes_per_s > 0.0) || !phonemes_per_s.is_finite() {
        return Err(Error::InvalidArgument(format!("phoneme rate {phonemes_per_s} must be positive")));
    }
    Ok((num_phonemes as f64).log2() * phonemes_per_s)
}

pub fn bit_errors(sent: &BitString, received: &BitString) -> Result<usize> {
    if sent.len() != received.len() {
        return Err(Error::LengthDiffers(sent.len(), received.len()));
    }
    Ok(sent.iter().zip(received.iter()).filter(|(a, b)| a != b).count())
}

pub fn bit_error_rate(sent: &BitString, received: &BitString) -> Result<f64> {
    let errors = bit_errors(sent, received)?;
    if sent.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(errors as f64 / sent.len() as f64)
}

pub fn throughput(payload_bits: usize, audio_duration_s: f64) -> Result<f64> {
    if !(audio_duration_s > 0.0) {
        return Err(Error::InvalidDuration(audio_duration_s));
    }
    Ok(payload_bits as f64 / audio_duration_s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub trials: usize,
    pub total_bits: usize,
    pub bit_errors: usize,
    pub ber: f64,
    /// Fraction of trials that synchronised and passed the CRC.
    pub mean_decode_status: f64,
}

pub const CSV_HEADER: &str = "snr_db,trials,total_bits,bit_errors,ber,mean_decode_status";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.snr_db, r.trials, r.total_bits, r.bit_errors, r.ber, r.mean_decode_status
        )
        .unwrap();
    }
    out
}

/// Seed of one trial.
pub fn trial_seed(seed: u64, snr_index: usize, trial_index: usize) -> u64 {
    seed ^ (snr_index as u64 * 1_000_000 + trial_index as u64)
}

struct Trial {
    bits: usize,
    errors: usize,
    decoded: bool,
}

fn run_trial(voice: Voice, snr_db: f64, payload_bytes: usize, seed: u64) -> Result<Trial> {
    let sr = DEFAULT_SAMPLE_RATE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payload: Vec<u8> = (0..payload_bytes).map(|_| rng.random()).collect();
    let pad = samples_for(SWEEP_PAD_S, sr);
    let tx = voice.encode(&payload, true, sr)?.padded(pad, pad);
    let spec = ChannelSpec {
        snr_db: snr_db.is_finite().then_some(snr_db),
        seed: rng.random(),
        ..ChannelSpec::default()
    };
    let rx = apply_channel(&spec, &tx)?;

    let decoded = matches!(voice.decode(&rx, true), Ok(p) if p == payload);
    let sent = BitString::from_bytes(&build_frame(&payload)?);
    // A receiver that cannot even calibrate hears every tone as off.
    let received = match voice.receive_bits(&rx, sent.len(), pad) {
        Ok((bits, _)) => bits,
        Err(Error::CalibrationFailed(_)) => BitString::from(vec![false; sent.len()]),
        Err(e) => return Err(e),
    };
    Ok(Trial {
        bits: sent.len(),
        errors: bit_errors(&sent, &received)?,
        decoded,
    })
}

/// Framed end-to-end trips per SNR. `f64::INFINITY` means no noise.
///
/// Bit errors are counted on the frame bits demodulated at the detected
/// preamble, or at the known transmit offset when sync fails, so BER keeps
/// measuring the channel while sync/CRC failures show up in
/// `mean_decode_status`.
pub fn sweep_ber(voice: &str, snr_list: &[f64], trials: usize, payload_bytes: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let voice: Voice = voice.parse()?;
    if !voice.carries_bytes() {
        return Err(Error::InvalidArgument(format!("{voice} does not carry arbitrary bytes")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    snr_list
        .iter()
        .enumerate()
        .map(|(si, &snr)| {
            let (mut bits, mut errors, mut ok) = (0, 0, 0);
            for t in 0..trials {
                let trial = run_trial(voice, snr, payload_bytes, trial_seed(seed, si, t))?;
                bits += trial.bits;
                errors += trial.errors;
                ok += trial.decoded as usize;
            }
            Ok(SweepRow {
                snr_db: snr,
                trials,
                total_bits: bits,
                bit_errors: errors,
                ber: errors as f64 / bits as f64,
                mean_decode_status: ok as f64 / trials as f64,
            })
        })
        .collect()
}
