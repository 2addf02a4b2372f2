use thiserror::Error;

use crate::modes::WaveVector;

/// Errors raised by the spectral, Galerkin and transform layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("wavevector {0} lies outside the truncation ball")]
    OutsideBall(WaveVector),
    #[error("projection undefined at n=0")]
    ZeroWaveVector,
    #[error("mode sets differ (N={0} vs N={1})")]
    ModeSetMismatch(u32, u32),
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("reality violation at n={0}")]
    Reality(WaveVector),
    #[error("solenoidality violation at n={0}")]
    Solenoidality(WaveVector),
    #[error("zero mode must vanish")]
    NonzeroMean,
    #[error("non-finite coefficient at n={0}")]
    NonFinite(WaveVector),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Gevrey weight overflows at sigma={sigma} for |n|={radius}")]
    WeightOverflow { sigma: f64, radius: f64 },
    #[error("{0}")]
    Checkpoint(String),
    #[error("unsupported checkpoint version {0}")]
    CheckpointVersion(u32),
    #[error("trace archive: {0}")]
    Trace(String),
    #[error("blow-up detected at t={t}")]
    BlowUp {
        t: f64,
        last_valid: Box<crate::field::MhdState<f64>>,
    },
    #[error("Phi bisection did not converge (residual {residual:e})")]
    PhiNoConvergence { residual: f64 },
    #[error("Phi is undefined for a non-finite or negative Gevrey norm")]
    PhiUndefined,
    #[error("constant {0} is not available in the table")]
    MissingConstant(String),
    #[error("trace too sparse: gap {gap} exceeds {limit}")]
    TraceTooSparse { gap: f64, limit: f64 },
    #[error("time {0} is outside the trace")]
    TimeOutOfRange(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
