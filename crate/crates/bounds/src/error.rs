use amhd_core::CoreError;

use crate::ids::BoundId;

#[derive(Debug, thiserror::Error)]
pub enum BoundsError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{id} is defined for {range}, got s={s}")]
    Domain { id: BoundId, s: f64, range: &'static str },
    #[error("unknown bound id {0:?}; valid ids: {valid}", valid = crate::ids::valid_ids())]
    UnknownBound(String),
    #[error("insufficient spectral range: {0}")]
    InsufficientRange(String),
    #[error("{0}")]
    Trace(String),
}

pub type Result<T> = std::result::Result<T, BoundsError>;
