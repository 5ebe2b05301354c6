//! Lattice frequencies and the linear symbols attached to them.

use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// An integer frequency vector ζ = (ξ, η).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyPair {
    pub xi: i64,
    pub eta: i64,
}

impl FrequencyPair {
    pub const ZERO: FrequencyPair = FrequencyPair { xi: 0, eta: 0 };

    pub const fn new(xi: i64, eta: i64) -> Self {
        FrequencyPair { xi, eta }
    }

    pub const fn is_zero(self) -> bool {
        self.xi == 0 && self.eta == 0
    }

    /// |ζ|² computed exactly.
    pub fn norm_sq(self) -> i128 {
        let (xi, eta) = (self.xi as i128, self.eta as i128);
        xi * xi + eta * eta
    }

    pub fn norm(self) -> f64 {
        (self.xi as f64).hypot(self.eta as f64)
    }

    /// The Japanese bracket ⟨ζ⟩ = (1 + |ζ|²)^{1/2}.
    pub fn japanese(self) -> f64 {
        (1.0 + self.norm_sq() as f64).sqrt()
    }

    /// Euclidean inner product, exact.
    pub fn dot(self, other: FrequencyPair) -> i128 {
        self.xi as i128 * other.xi as i128 + self.eta as i128 * other.eta as i128
    }

    pub fn checked_add(self, other: FrequencyPair) -> Option<FrequencyPair> {
        Some(FrequencyPair::new(
            self.xi.checked_add(other.xi)?,
            self.eta.checked_add(other.eta)?,
        ))
    }

    pub fn checked_scale(self, factor: i64) -> Option<FrequencyPair> {
        Some(FrequencyPair::new(
            self.xi.checked_mul(factor)?,
            self.eta.checked_mul(factor)?,
        ))
    }
}

impl Add for FrequencyPair {
    type Output = FrequencyPair;
    fn add(self, rhs: FrequencyPair) -> FrequencyPair {
        FrequencyPair::new(self.xi + rhs.xi, self.eta + rhs.eta)
    }
}

impl Sub for FrequencyPair {
    type Output = FrequencyPair;
    fn sub(self, rhs: FrequencyPair) -> FrequencyPair {
        FrequencyPair::new(self.xi - rhs.xi, self.eta - rhs.eta)
    }
}

impl Neg for FrequencyPair {
    type Output = FrequencyPair;
    fn neg(self) -> FrequencyPair {
        FrequencyPair::new(-self.xi, -self.eta)
    }
}

impl From<(i64, i64)> for FrequencyPair {
    fn from((xi, eta): (i64, i64)) -> Self {
        FrequencyPair::new(xi, eta)
    }
}

impl fmt::Display for FrequencyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.xi, self.eta)
    }
}

/// φ(ξ, η) = ξ³ − 3ξη² evaluated exactly, as an `i128`.
pub(crate) fn phase_i128(z: FrequencyPair) -> Option<i128> {
    let xi = z.xi as i128;
    let eta = z.eta as i128;
    let xi2 = xi.checked_mul(xi)?;
    let eta2 = eta.checked_mul(eta)?;
    // ξ(ξ² − 3η²)
    let inner = xi2.checked_sub(eta2.checked_mul(3)?)?;
    xi.checked_mul(inner)
}

/// The dispersion phase φ(ξ, η) = ξ³ − 3ξη².
///
/// Exact in integer arithmetic; values that do not fit in an `i64` are
/// reported as [`Error::Overflow`] rather than wrapped.
pub fn phase(z: FrequencyPair) -> Result<i64> {
    phase_i128(z)
        .and_then(|v| i64::try_from(v).ok())
        .ok_or(Error::Overflow("phase"))
}

/// Parameters of the mean-shifted phase. `phi0 == 0` selects the plain phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseParams {
    pub phi0: f64,
}

impl PhaseParams {
    pub const PLAIN: PhaseParams = PhaseParams { phi0: 0.0 };

    pub fn new(phi0: f64) -> Self {
        PhaseParams { phi0 }
    }

    pub fn is_plain(&self) -> bool {
        self.phi0 == 0.0
    }
}

/// φ̃(ζ) = φ(ζ)·(1 + 3·φ₀/|ζ|²), the phase seen by the mean-zero part of a
/// field whose mean is parametrized by φ₀.
pub fn phase_modified(z: FrequencyPair, params: PhaseParams) -> Result<f64> {
    if z.is_zero() {
        return Err(Error::ZeroFrequency);
    }
    let phi = phase_i128(z).ok_or(Error::Overflow("phase"))? as f64;
    if params.is_plain() {
        return Ok(phi);
    }
    Ok(phi * (1.0 + 3.0 * params.phi0 / z.norm_sq() as f64))
}

/// Symbol of ∂̄⁻¹∂: (iξ+η)/(iξ−η) = (ξ²−η²−2iξη)/(ξ²+η²), and 0 at ζ = 0.
pub fn dbar_inv_d(z: FrequencyPair) -> Complex64 {
    if z.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    let xi = z.xi as f64;
    let eta = z.eta as f64;
    let n2 = z.norm_sq() as f64;
    Complex64::new((xi * xi - eta * eta) / n2, -2.0 * xi * eta / n2)
}

/// Symbol of ∂⁻¹∂̄, the complex conjugate of [`dbar_inv_d`].
pub fn d_inv_dbar(z: FrequencyPair) -> Complex64 {
    dbar_inv_d(z).conj()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_examples() {
        assert_eq!(phase(FrequencyPair::new(0, 7)), Ok(0));
        assert_eq!(phase(FrequencyPair::new(1, 1)), Ok(-2));
        assert_eq!(phase(FrequencyPair::new(2, 3)), Ok(-46));
    }

    #[test]
    fn phase_fits_for_million_sized_inputs() {
        let big = 1_000_000;
        let z = FrequencyPair::new(big, big);
        assert_eq!(phase(z), Ok(-2 * big * big * big));
        assert_eq!(phase(FrequencyPair::new(-big, big)), Ok(2 * big * big * big));
    }

    #[test]
    fn phase_overflow_is_reported() {
        let z = FrequencyPair::new(3_000_000, 0);
        assert_eq!(phase(z), Err(Error::Overflow("phase")));
        let z = FrequencyPair::new(i64::MAX, 1);
        assert!(phase(z).is_err());
    }

    #[test]
    fn modified_phase_examples() {
        let p = |phi0| PhaseParams::new(phi0);
        assert_eq!(phase_modified(FrequencyPair::new(1, 0), p(0.0)), Ok(1.0));
        assert_eq!(phase_modified(FrequencyPair::new(1, 0), p(1.0)), Ok(4.0));
        assert_eq!(phase_modified(FrequencyPair::new(1, 1), p(2.0)), Ok(-8.0));
        assert_eq!(
            phase_modified(FrequencyPair::ZERO, p(1.0)),
            Err(Error::ZeroFrequency)
        );
    }

    #[test]
    fn multiplier_examples() {
        assert_eq!(dbar_inv_d(FrequencyPair::new(1, 0)), Complex64::new(1.0, 0.0));
        assert_eq!(dbar_inv_d(FrequencyPair::new(0, 1)), Complex64::new(-1.0, 0.0));
        assert_eq!(dbar_inv_d(FrequencyPair::new(1, 1)), Complex64::new(0.0, -1.0));
        assert_eq!(dbar_inv_d(FrequencyPair::ZERO), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn phase_is_odd_on_a_box() {
        for xi in -40..=40 {
            for eta in -40..=40 {
                let z = FrequencyPair::new(xi, eta);
                assert_eq!(phase(-z).unwrap(), -phase(z).unwrap());
            }
        }
    }

    #[test]
    fn multipliers_are_unimodular_and_mutually_inverse() {
        for xi in -20..=20 {
            for eta in -20..=20 {
                let z = FrequencyPair::new(xi, eta);
                if z.is_zero() {
                    continue;
                }
                let a = dbar_inv_d(z);
                let b = d_inv_dbar(z);
                assert!((a.norm() - 1.0).abs() < 1e-15);
                assert_eq!(b, a.conj());
                assert!((a * b - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }
}
