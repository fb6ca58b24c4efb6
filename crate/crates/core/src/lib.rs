//! Classical solitons, normal modes and Gaussian-state entanglement in the
//! Frenkel-Kontorova chain.

pub mod classical;
pub mod elliptic;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod modes;
pub mod squeeze;
pub mod tridiag;

pub use error::{Error, Result};
