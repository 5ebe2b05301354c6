//! Exact-arithmetic kernel for a computational lab around the zero-energy
//! Novikov–Veselov equation on the torus.
//!
//! Everything here is integer or rational arithmetic on the frequency
//! lattice ℤ² (plus a handful of float evaluations with documented error):
//!
//! * [`freq`]: lattice frequencies, the dispersion phase φ(ξ,η) = ξ³ − 3ξη²,
//!   and the unimodular multipliers of ∂̄⁻¹∂ and ∂⁻¹∂̄.
//! * [`symbol`]: the bilinear symbol `m` of the symmetrized nonlinearity, the
//!   resonance function `r`, and verifiers for the identities between them.
//! * [`lattice`]: exact integral-point counting on the hyperbola and cubic
//!   curve families, the resonance sums, and curve classification.
//! * [`kform`]: a small polynomial algebra used to expand the resonance
//!   relation under the half-shift substitution.
//! * [`fit`]: log–log slope fitting and the exponent sweep driver.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod fit;
pub mod freq;
pub mod kform;
pub mod lattice;
pub mod symbol;

pub use error::{Error, Result};
pub use freq::{d_inv_dbar, dbar_inv_d, phase, phase_modified, FrequencyPair, PhaseParams};
pub use symbol::{resonance, symbol, symbol_exact, SymbolTriple};
