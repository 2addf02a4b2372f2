//! Fourier–Galerkin MHD on the periodic cube, with spectral norms, the
//! analyticity transforms and the constants they need.
//!
//! Numerical kernels are generic over [`Real`] (`f32` or `f64`); trace
//! archives, constants and reports are `f64`.

pub mod constants;
pub mod error;
pub mod field;
pub mod galerkin;
pub mod grid;
pub mod modes;
pub mod norms;
pub mod scalar;
pub mod transform;
pub mod verdict;

pub use error::{CoreError, Result};
pub use field::{leray_project, MhdState, SpectralField};
pub use modes::{ModeSet, WaveVector};
pub use scalar::Real;
pub use verdict::Verdict;

pub type Field = SpectralField<f64>;
pub type State = MhdState<f64>;
pub type Field32 = SpectralField<f32>;
pub type State32 = MhdState<f32>;
