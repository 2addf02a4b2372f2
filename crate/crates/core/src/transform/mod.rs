//! Analyticity transforms: the time-growing Gevrey weight and the
//! `Phi`-transform with its energy bound.

pub mod foias_temam;
pub mod phi;
pub mod sigma;
pub mod theorem2;
