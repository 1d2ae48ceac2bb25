use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("frame spill: (N_c-1)*T_c + T_p > T_f ({spill} ns > {t_f} ns)")]
    FrameSpill { spill: f64, t_f: f64 },

    #[error("pulse unresolvable: T_p*f_s = {samples} samples, need at least {min}")]
    PulseUnresolvable { samples: f64, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nonzero support exceeds symbol time ({end} ns > {t_s} ns)")]
    SupportExceedsSymbol { end: f64, t_s: f64 },

    #[error("sample rate mismatch: {0} GHz vs {1} GHz")]
    SampleRateMismatch(f64, f64),

    #[error("length mismatch: {0} vs {1} samples")]
    LengthMismatch(usize, usize),

    #[error("signal too short: need {need} samples, have {have}")]
    SignalTooShort { need: usize, have: usize },

    #[error("channel draw produced no taps after {0} attempts")]
    DegenerateChannel(u32),

    #[error("trial {trial} (seed {seed:#018x}): {source}")]
    Trial { trial: u64, seed: u64, source: Box<Error> },
}
