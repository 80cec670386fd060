use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use dvoice::channel::{apply_channel, ChannelSpec};
use dvoice::cricket::{CricketConfig, BITS_PER_SYMBOL};
use dvoice::dsp::DEFAULT_SAMPLE_RATE;
use dvoice::metrics::{sweep_ber, sweep_csv};
use dvoice::modem::ModemConfig;
use dvoice::r2d2::{self, R2d2Alphabet};
use dvoice::url::{self, SchemeClass};
use dvoice::voice::Voice;
use dvoice::wav::{read_wav, write_wav};
use dvoice::Error;

#[derive(Parser)]
#[command(name = "dv", version, about = "Send data as audible sound")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a payload into a WAV file.
    Encode(EncodeArgs),
    /// Recover the payload from a WAV file and write it to stdout.
    Decode(DecodeArgs),
    /// Pass a WAV file through a simulated air channel.
    Simulate(SimulateArgs),
    /// Bit error rate against SNR, as CSV.
    Sweep(SweepArgs),
    /// Describe a voice's tones and rate.
    Info(InfoArgs),
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    voice: Voice,
    /// Payload file.
    #[arg(long = "in", conflicts_with = "text", required_unless_present = "text")]
    input: Option<PathBuf>,
    /// Payload given inline.
    #[arg(long)]
    text: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    framed: bool,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE)]
    sample_rate: u32,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    voice: Voice,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    framed: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Signal-to-noise ratio in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<f64>,
    /// Frequency to suppress; repeatable.
    #[arg(long)]
    notch: Vec<f64>,
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long)]
    clip: Option<f64>,
    /// Channel description file; flags given alongside it take precedence.
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    voice: Voice,
    /// LO:HI:STEP in dB, or a comma-separated list (`inf` for no noise).
    #[arg(long, allow_hyphen_values = true)]
    snr: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 32)]
    payload_bytes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct InfoArgs {
    #[arg(long)]
    voice: Voice,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Code 2 is reserved for sync failures.
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dv: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::SyncFailure) => 2,
        Some(Error::CrcMismatch { .. } | Error::Truncated { .. } | Error::LengthMismatch { .. }) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Info(a) => {
            print!("{}", info(a.voice)?);
            Ok(())
        }
    }
}

fn encode(a: EncodeArgs) -> anyhow::Result<()> {
    let payload = match (a.input, a.text) {
        (Some(path), _) => std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(text)) => text.into_bytes(),
        (None, None) => bail!("one of --in or --text is required"),
    };
    let audio = a.voice.encode(&payload, a.framed, a.sample_rate)?;
    write_wav(&a.out, &audio)?;
    Ok(())
}

fn decode(a: DecodeArgs) -> anyhow::Result<()> {
    let audio = read_wav(&a.input)?;
    let payload = a.voice.decode(&audio, a.framed)?;
    let mut out = std::io::stdout().lock();
    out.write_all(&payload)?;
    out.flush()?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let mut spec = match &a.channel {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ChannelSpec::parse(&text)?
        }
        None => ChannelSpec::default(),
    };
    if let Some(snr) = a.snr {
        spec.snr_db = snr.is_finite().then_some(snr);
    }
    spec.notches.extend(a.notch);
    if let Some(g) = a.gain {
        spec.gain = g;
    }
    if let Some(c) = a.clip {
        spec.clip = c;
    }
    spec.seed = a.seed;
    let audio = read_wav(&a.input)?;
    write_wav(&a.out, &apply_channel(&spec, &audio)?)?;
    Ok(())
}

fn parse_snr_list(s: &str) -> anyhow::Result<Vec<f64>> {
    let num = |t: &str| -> anyhow::Result<f64> {
        match t.trim() {
            "inf" | "none" => Ok(f64::INFINITY),
            t => t.parse().with_context(|| format!("bad SNR value `{t}`")),
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
                bail!("SNR range needs LO <= HI and a positive STEP");
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| lo + step * i as f64).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => bail!("SNR must be LO:HI:STEP or a comma-separated list"),
    }
}

fn sweep(a: SweepArgs) -> anyhow::Result<()> {
    let snrs = parse_snr_list(&a.snr)?;
    let rows = sweep_ber(a.voice.name(), &snrs, a.trials, a.payload_bytes, a.seed)?;
    let csv = sweep_csv(&rows);
    match a.csv {
        Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

/// Integers print bare; anything else to one decimal.
fn num(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round())
    } else {
        format!("{x:.1}")
    }
}

fn tone_list(tones: &[f64]) -> String {
    tones.iter().map(|&t| num(t)).collect::<Vec<_>>().join(" ")
}

fn bank_summary(tones: &[f64]) -> String {
    let (lo, hi) = (tones[0], tones[tones.len() - 1]);
    if tones.len() < 2 {
        return format!("1 tone at {} Hz", num(lo));
    }
    format!(
        "{} tones, {}..{} Hz step {} Hz",
        tones.len(),
        num(lo),
        num(hi),
        num(tones[1] - tones[0])
    )
}

fn info(voice: Voice) -> anyhow::Result<String> {
    let mut s = format!("voice: {voice}\n");
    let mut line = |k: &str, v: String| s.push_str(&format!("{k}: {v}\n"));
    match voice {
        Voice::R2d2 => {
            let a = R2d2Alphabet::standard();
            line("modulation", "beeps (letters), grunts (digits), chirps (space . , ?)".into());
            line("tone bank", format!("beeps {}", bank_summary(&a.beep_freqs)));
            line("beep tones (Hz)", tone_list(&a.beep_freqs));
            line("grunt tones (Hz)", tone_list(&a.grunt_bank));
            line(
                "chirp band",
                format!("{}..{} Hz", num(r2d2::CHIRP_LOW_HZ), num(r2d2::CHIRP_HIGH_HZ)),
            );
            line(
                "symbol duration",
                format!(
                    "beep {} s, grunt {} s, chirp {} s",
                    r2d2::BEEP_S,
                    r2d2::GRUNT_S,
                    r2d2::CHIRP_S
                ),
            );
            line("bits/symbol", format!("{:.2} (40 symbols)", 40f64.log2()));
            let sentence = "hello world robot beeps droid sound quick brown foxes jumps grand finis.";
            let stats = r2d2::r2d2_sentence_stats(sentence)?;
            line("data rate", format!("{} bps (60-letter sentence)", num(stats.info_bps)));
        }
        Voice::Cricket => {
            let c = CricketConfig::default();
            line("modulation", "triadic beep train, onset phase x amplitude".into());
            line("tone bank", format!("1 tone at {} Hz", num(c.carrier_hz)));
            line("tones (Hz)", num(c.carrier_hz));
            line("symbol duration", format!("{} s", c.symbol_period_s));
            line(
                "bits/symbol",
                format!(
                    "{BITS_PER_SYMBOL} ({} onset slots x {} amplitudes)",
                    c.phase_slots,
                    c.amp_levels.len()
                ),
            );
            line("data rate", format!("{} bps", num(c.data_rate())));
        }
        Voice::Url => {
            let mailto = SchemeClass::Mailto.tone_bank().unwrap();
            let http = SchemeClass::Http.tone_bank().unwrap();
            line("modulation", format!("{}-tone binary ASK in a per-scheme band", url::BAND_TONES));
            line("tone bank", format!("mailto {}; http {}", bank_summary(&mailto), bank_summary(&http)));
            line("mailto tones (Hz)", tone_list(&mailto));
            line("http tones (Hz)", tone_list(&http));
            line("symbol duration", format!("{} s", url::SYMBOL_S));
            line("bits/symbol", url::BAND_TONES.to_string());
            line(
                "data rate",
                format!("{} bps (dictionary-coded)", num(url::BAND_TONES as f64 / url::SYMBOL_S)),
            );
        }
        v => {
            let cfg = v.preset().unwrap().config(DEFAULT_SAMPLE_RATE)?;
            let kind = match &cfg {
                ModemConfig::Ask(c) => format!("{}-tone binary ASK", c.tone_bank().len()),
                ModemConfig::Fsk(c) => format!("{}-ary FSK", c.tone_bank().len()),
            };
            line("modulation", kind);
            line("tone bank", bank_summary(cfg.tone_bank()));
            line("tones (Hz)", tone_list(cfg.tone_bank()));
            line("symbol duration", format!("{} s", cfg.symbol_duration_s()));
            line("bits/symbol", cfg.bits_per_symbol().to_string());
            line("data rate", format!("{} bps", num(cfg.data_rate())));
        }
    }
    Ok(s)
}
