/// Errors returned by synthesis, demodulation, framing and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("frequency {freq_hz} Hz is outside (0, {nyquist_hz}) Hz")]
    InvalidFrequency { freq_hz: f64, nyquist_hz: f64 },

    #[error("duration must be positive, got {0} s")]
    InvalidDuration(f64),

    #[error("amplitude {0} is outside [0, 1]")]
    InvalidAmplitude(f64),

    #[error("sample {value} at index {index} is outside [-1, 1] or not finite")]
    SampleOutOfRange { index: usize, value: f64 },

    #[error("sample rate must be positive")]
    InvalidSampleRate,

    #[error("sample rates differ: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),

    #[error("empty input")]
    EmptyInput,

    #[error("window [{start}, {start}+{len}) does not fit a buffer of {buf_len} samples")]
    WindowOutOfBounds {
        start: usize,
        len: usize,
        buf_len: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown preset or voice `{0}`")]
    UnknownVoice(String),

    #[error("buffer of {len} samples is not a whole number of {symbol_len}-sample symbols")]
    Misaligned { len: usize, symbol_len: usize },

    #[error("calibration has no entry for tone {0} Hz")]
    MissingCalibrationTone(f64),

    #[error("calibration failed: on-energy does not exceed the noise floor at {0} Hz")]
    CalibrationFailed(f64),

    #[error("unsupported character {ch:?} at position {position}")]
    UnsupportedChar { ch: char, position: usize },

    #[error("no symbol class recognised at sample offset {0}")]
    Unclassifiable(usize),

    #[error("no beep triad found in symbol period {0}")]
    NoTriad(usize),

    #[error("url contains non-ASCII or unprintable character {ch:?} at position {position}")]
    NonAscii { ch: char, position: usize },

    #[error("code stream ended before the END code")]
    MissingEnd,

    #[error("unknown dictionary code {0}")]
    UnknownCode(u8),

    #[error("only mailto: and http:// urls have an acoustic band")]
    UnsupportedScheme,

    #[error("payload of {0} bytes exceeds the 65535-byte frame limit")]
    PayloadTooLarge(usize),

    #[error("frame CRC mismatch: expected {expected:#06x}, computed {computed:#06x}")]
    CrcMismatch { expected: u16, computed: u16 },

    #[error("frame truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },

    #[error("frame declares {declared} payload bytes but {available} bytes follow the header")]
    LengthMismatch { declared: usize, available: usize },

    #[error("no preamble found")]
    SyncFailure,

    #[error("cannot scale noise to a target SNR on an all-zero signal")]
    ZeroSignal,

    #[error("bit strings differ in length: {0} vs {1}")]
    LengthDiffers(usize, usize),

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
