//! Discretized Gaussian constellations over bosonic thermal channels:
//! divergence bounds, Holevo and private-information rates in truncated
//! Fock space, and multilevel polar coding under heterodyne detection.

pub mod channel;
pub mod chi2;
pub mod constellations;
pub mod error;
pub mod fock;
pub mod polar;
pub mod rates;

pub use error::{Error, Result};
