//! The truncated Fourier–Galerkin MHD system and its integration.

pub mod checkpoint;
pub mod initial;
pub mod rhs;
pub mod simulate;
pub mod stepper;
pub mod trace;
