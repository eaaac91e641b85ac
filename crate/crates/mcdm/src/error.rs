//! Crate-wide error type.

use thiserror::Error;

/// Errors raised anywhere in the modem or harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Waveform, layout, or packet parameters violate an invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A vector did not have the length an operation requires.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Subcarrier index outside `[0, K)`.
    #[error("subcarrier index {index} out of range (K = {len})")]
    IndexOutOfRange { index: usize, len: usize },

    /// An all-zero shift-register state never leaves zero.
    #[error("PN seed 0 is a degenerate shift-register state")]
    ZeroSeed,

    /// Noise scaling needs a nonzero-power reference signal.
    #[error("signal has no energy over its occupied span")]
    ZeroPowerSignal,

    /// The sync search window does not fit in the received signal.
    #[error("sync window of {window} lags needs {needed} samples, signal has {len}")]
    WindowTooLarge {
        window: usize,
        needed: usize,
        len: usize,
    },

    /// CFO correlation had no energy to take a phase from.
    #[error("no correlation energy in CFO training window")]
    NoCfoSignal,

    /// Channel interpolation needs at least two pilot estimates.
    #[error("channel interpolation needs at least 2 pilots, layout has {0}")]
    TooFewPilots(usize),

    /// A received segment is shorter than one symbol plus guard.
    #[error("symbol segment too short: need {needed} samples, got {got}")]
    SegmentTooShort { needed: usize, got: usize },

    /// Raw I/Q file contents are not an even number of f32 values.
    #[error("corrupt I/Q file {path}: {reason}")]
    CorruptIq { path: String, reason: String },

    /// Sweep/CLI configuration problem.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Config file syntax error.
    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
