pub mod eigen;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod ladder;
pub mod metric;
pub mod perturbation;
pub mod verify;

pub use error::{Error, Result};
