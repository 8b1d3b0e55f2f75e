//! Computational laboratory for harmonic analysis on the Walsh group.

pub mod dyadic;
pub mod error;
pub mod scalar;
pub mod systems;
pub mod transforms;
pub mod kernels;
pub mod weights;
pub mod means;
pub mod analysis;
pub mod verification;
pub mod cli;

pub use error::{DslabError, Result};
