//! Detection statistics for a polarization-entangled QKD link under a
//! beam-splitter tap, with tunable frequency entanglement ζ.
//!
//! The pipeline runs partitions → Ξ(ζ, n) → 𝒢 kernels → outcome
//! probabilities → sifting and entropy metrics → μ sweeps.

pub mod config;
pub mod detection;
pub mod entanglement;
pub mod error;
pub mod gfunctions;
pub mod metrics;
pub mod numeric;
pub mod partitions;
pub mod sweep;

pub use error::{Error, Result};
