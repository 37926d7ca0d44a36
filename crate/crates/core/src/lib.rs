//! Time-inhomogeneous Pólya urns and their generalized gamma limits.
//!
//! The crate provides exact and simulated laws for urns with periodic
//! immigration, the generalized gamma family with its Stein potential,
//! power-bias and equilibrium transforms, Rémy tree growth, bijections
//! between trees and lattice paths, numerical Stein solutions with explicit
//! Kolmogorov bounds, and convergence-rate experiments.

pub mod error;
pub mod ggdist;
pub mod laws;
pub mod pmf;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stats;
pub mod stein;
pub mod transforms;
pub mod trees;
pub mod urns;
pub mod walks;

pub use error::{Error, Result};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use ggdist::{GGParams, Potential};
pub use pmf::{ExactPmf, Rational, Scalar};
pub use rng::StreamRng;
pub use urns::{Identity, UrnSpec};
