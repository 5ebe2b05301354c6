//! Pseudospectral laboratory for the zero-energy Novikov–Veselov equation on
//! the 2π-periodic torus.

#![forbid(unsafe_code)]

pub mod cli;
pub mod error;
pub mod evolution;
pub mod invariants;
pub mod nonlinearity;
pub mod probe;
pub mod sweep;
pub mod torus;
pub mod verify;

pub use error::{LabError, Result};
