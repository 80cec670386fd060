//! Audible data modems ("digital voices").
//!
//! Every voice turns bytes or text into a mono [`PcmBuffer`] and back:
//!
//! * multi-tone binary ASK (`ask8_fast`, `ask8_slow`, `ask128`) and 256-ary FSK
//!   (`fsk256`) in [`modem`],
//! * a 40-symbol text voice built from beeps, chirps and grunts in [`r2d2`],
//! * a phase/amplitude keyed triadic beep train in [`cricket`],
//! * dictionary-coded URLs sent in a scheme-dependent band in [`url`].
//!
//! [`framing`] supplies the acoustic preamble, calibration and CRC frame,
//! [`channel`] a reproducible simulated air path, and [`metrics`] rate and
//! bit-error bookkeeping including the SNR sweep harness.
//!
//! ```
//! use dvoice::voice::Voice;
//!
//! let audio = Voice::Fsk256.encode(b"hello", true, 44100).unwrap();
//! let decoded = Voice::Fsk256.decode(&audio, true).unwrap();
//! assert_eq!(decoded, b"hello");
//! ```

pub mod bits;
pub mod channel;
pub mod cricket;
pub mod dsp;
pub mod error;
pub mod framing;
pub mod metrics;
pub mod modem;
pub mod r2d2;
pub mod url;
pub mod voice;
pub mod wav;

pub use bits::BitString;
pub use dsp::{PcmBuffer, WindowSpec};
pub use error::{Error, Result};
