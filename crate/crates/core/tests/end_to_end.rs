use dvoice::channel::{apply_channel, ChannelSpec};
use dvoice::dsp::DEFAULT_SAMPLE_RATE;
use dvoice::voice::Voice;
use dvoice::wav::{read_wav, write_wav};
use dvoice::Error;
use proptest::prelude::*;

const SR: u32 = DEFAULT_SAMPLE_RATE;

fn byte_voices() -> impl Iterator<Item = Voice> {
    Voice::ALL.into_iter().filter(|v| v.carries_bytes())
}

#[test]
fn every_voice_survives_a_wav_file() {
    let dir = tempfile::tempdir().unwrap();
    for voice in Voice::ALL {
        let payload: &[u8] = match voice {
            Voice::R2d2 => b"beep boop 42?",
            Voice::Url => b"mailto:someone@example.org",
            _ => b"\x00\xffpayload\x7f",
        };
        let path = dir.path().join(format!("{voice}.wav"));
        write_wav(&path, &voice.encode(payload, voice.carries_bytes(), SR).unwrap()).unwrap();
        let audio = read_wav(&path).unwrap();
        assert_eq!(voice.decode(&audio, voice.carries_bytes()).unwrap(), payload, "{voice}");
    }
}

#[test]
fn quiet_and_lightly_noisy_channels() {
    let payload = b"through the air";
    for voice in byte_voices() {
        let tx = voice.encode(payload, true, SR).unwrap().padded(2205, 2205);
        let spec = ChannelSpec {
            snr_db: Some(25.0),
            gain: 0.1,
            seed: 11,
            ..ChannelSpec::default()
        };
        let rx = apply_channel(&spec, &tx).unwrap();
        assert_eq!(voice.decode(&rx, true).unwrap(), payload, "{voice}");
    }
}

#[test]
fn cut_off_frames_report_truncation() {
    for voice in byte_voices() {
        let tx = voice.encode(&[7; 40], true, SR).unwrap();
        let cut = tx.slice(0, tx.len() * 3 / 4).unwrap();
        assert!(matches!(voice.decode(&cut, true), Err(Error::Truncated { .. })), "{voice}");
    }
}

#[test]
fn silence_alone_never_syncs() {
    let silence = dvoice::PcmBuffer::silence(SR as usize, SR);
    for voice in byte_voices() {
        assert!(matches!(voice.decode(&silence, true), Err(Error::SyncFailure)), "{voice}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn framed_decode_ignores_surrounding_silence(
        voice_index in 0usize..5,
        payload in prop::collection::vec(any::<u8>(), 0..12),
        lead_s in 0.0f64..9.0,
        tail_s in 0.0f64..3.0,
    ) {
        let voice = byte_voices().nth(voice_index).unwrap();
        let tx = voice.encode(&payload, true, SR).unwrap();
        let audio = tx.padded((lead_s * SR as f64) as usize, (tail_s * SR as f64) as usize);
        prop_assert_eq!(voice.decode(&audio, true).unwrap(), payload);
    }

    #[test]
    fn unframed_decode_ignores_surrounding_silence(
        voice_index in 0usize..5,
        payload in prop::collection::vec(any::<u8>(), 0..12),
        lead in 0usize..44100,
        tail in 0usize..44100,
    ) {
        let voice = byte_voices().nth(voice_index).unwrap();
        let audio = voice.encode(&payload, false, SR).unwrap().padded(lead, tail);
        prop_assert_eq!(voice.decode(&audio, false).unwrap(), payload);
    }
}

#[test]
fn no_padding_at_all() {
    for voice in byte_voices() {
        for framed in [false, true] {
            for payload in [&b""[..], b"x", b"sixteen byte msg"] {
                let audio = voice.encode(payload, framed, SR).unwrap();
                assert_eq!(voice.decode(&audio, framed).unwrap(), payload, "{voice} framed={framed}");
            }
        }
    }
}
