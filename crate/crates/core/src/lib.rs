//! Quantum phase diagrams of finite atom-field systems: n-level atoms coupled
//! to ℓ field modes, solved exactly by truncated diagonalisation and
//! variationally with coherent and symmetry-adapted trial states.

pub mod analysis;
pub mod basis;
pub mod coherent;
pub mod eigen;
pub mod error;
pub mod model;
pub mod operator;
pub mod optimize;
pub mod output;
pub mod phase;
pub mod reduced_basis;
pub mod reduction;
pub mod sas;
pub mod solver;
pub mod state;
pub mod sweep;
pub mod variational;

pub use error::{Error, Result};
