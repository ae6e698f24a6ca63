//! Pseudo-Nash equilibrium machinery: empirical-mean dominance testing,
//! a synchronous protocol-game runtime with pluggable ideal and concrete
//! cryptography, three worked games, and closed-form analysis of the
//! Halpern–Teague rational secret-sharing family.

pub mod analysis;
pub mod crypto;
pub mod dominance;
pub mod error;
pub mod games;
pub mod rng;
pub mod runtime;

pub use dominance::{DominanceParams, DominanceReport, UtilityEnsemble, Verdict};
pub use error::{Error, Result};
