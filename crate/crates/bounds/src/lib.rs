//! A priori bound verification and analyticity tracking along Galerkin MHD
//! trajectories.

pub mod chain;
pub mod error;
pub mod harness;
pub mod ids;
pub mod report;
pub mod sample;
pub mod tracker;
pub mod xi;

pub use error::{BoundsError, Result};
pub use harness::{
    d2_report, prepare_table, verify_integral, verify_pointwise, verify_trace, BoundRequest, Harness, HarnessSettings,
};
pub use ids::BoundId;
pub use report::{series_csv, BoundReport};
pub use sample::StateSample;
pub use xi::{xi_chain_rule, xi_fields, XiFields};
