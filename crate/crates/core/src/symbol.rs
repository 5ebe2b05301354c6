//! The bilinear symbol `m`, the resonance function `r`, and verifiers for
//! the algebraic relations between them.
//!
//! For ζ = ζ₁ + ζ₂ the symmetrized nonlinearity acts in frequency space as
//! `i·Σ m(ζ₁,ζ₂) û(ζ₁) v̂(ζ₂)` with
//!
//! ```text
//! m = ξ(A₁ + A₂) − η(C₁ + C₂),   Aⱼ = (ξⱼ² − ηⱼ²)/|ζⱼ|²,  Cⱼ = 2ξⱼηⱼ/|ζⱼ|²
//! r = 3(ξ(ξ₁ξ₂ − η₁η₂) − η(ξ₁η₂ + ξ₂η₁))
//! ```
//!
//! and the two are tied by `m = (2/3)·(ζ₁·ζ₂)/(|ζ₁|²|ζ₂|²)·r`.

use num_rational::Ratio;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::freq::{phase_i128, FrequencyPair};

/// A pair of interacting frequencies; the output frequency is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymbolTriple {
    #[cfg_attr(feature = "serde", serde(rename = "zeta1"))]
    pub first: FrequencyPair,
    #[cfg_attr(feature = "serde", serde(rename = "zeta2"))]
    pub second: FrequencyPair,
}

impl SymbolTriple {
    pub const fn new(first: FrequencyPair, second: FrequencyPair) -> Self {
        SymbolTriple { first, second }
    }

    /// ζ = ζ₁ + ζ₂.
    pub fn output(&self) -> FrequencyPair {
        self.first + self.second
    }

    pub fn swapped(&self) -> Self {
        SymbolTriple::new(self.second, self.first)
    }

    fn check_nonzero(&self) -> Result<()> {
        if self.first.is_zero() || self.second.is_zero() {
            Err(Error::ZeroFrequency)
        } else {
            Ok(())
        }
    }
}

impl From<((i64, i64), (i64, i64))> for SymbolTriple {
    fn from((a, b): ((i64, i64), (i64, i64))) -> Self {
        SymbolTriple::new(a.into(), b.into())
    }
}

const OVF_R: Error = Error::Overflow("resonance");
const OVF_M: Error = Error::Overflow("symbol");

pub(crate) fn resonance_i128(t: &SymbolTriple) -> Option<i128> {
    let (x1, y1) = (t.first.xi as i128, t.first.eta as i128);
    let (x2, y2) = (t.second.xi as i128, t.second.eta as i128);
    let x = x1.checked_add(x2)?;
    let y = y1.checked_add(y2)?;
    let re = x1.checked_mul(x2)?.checked_sub(y1.checked_mul(y2)?)?;
    let im = x1.checked_mul(y2)?.checked_add(x2.checked_mul(y1)?)?;
    let inner = x.checked_mul(re)?.checked_sub(y.checked_mul(im)?)?;
    inner.checked_mul(3)
}

/// The resonance function `r(ζ₁, ζ₂)` in exact integer arithmetic.
pub fn resonance(t: &SymbolTriple) -> Result<i64> {
    resonance_i128(t)
        .and_then(|v| i64::try_from(v).ok())
        .ok_or(OVF_R)
}

/// φ(ζ₁+ζ₂) − φ(ζ₁) − φ(ζ₂), the defining form of the resonance function.
pub fn resonance_from_phase(t: &SymbolTriple) -> Result<i64> {
    let z = t.first.checked_add(t.second).ok_or(OVF_R)?;
    let v = phase_i128(z)
        .zip(phase_i128(t.first))
        .zip(phase_i128(t.second))
        .and_then(|((p, p1), p2)| p.checked_sub(p1)?.checked_sub(p2))
        .ok_or(OVF_R)?;
    i64::try_from(v).map_err(|_| OVF_R)
}

/// Numerator of `m` over the common denominator |ζ₁|²|ζ₂|².
fn symbol_numerator(t: &SymbolTriple) -> Option<(i128, i128)> {
    let (x1, y1) = (t.first.xi as i128, t.first.eta as i128);
    let (x2, y2) = (t.second.xi as i128, t.second.eta as i128);
    let x = x1.checked_add(x2)?;
    let y = y1.checked_add(y2)?;
    let n1 = x1.checked_mul(x1)?.checked_add(y1.checked_mul(y1)?)?;
    let n2 = x2.checked_mul(x2)?.checked_add(y2.checked_mul(y2)?)?;
    let a1 = x1.checked_mul(x1)?.checked_sub(y1.checked_mul(y1)?)?;
    let a2 = x2.checked_mul(x2)?.checked_sub(y2.checked_mul(y2)?)?;
    let c1 = x1.checked_mul(y1)?.checked_mul(2)?;
    let c2 = x2.checked_mul(y2)?.checked_mul(2)?;
    let a = a1.checked_mul(n2)?.checked_add(a2.checked_mul(n1)?)?;
    let c = c1.checked_mul(n2)?.checked_add(c2.checked_mul(n1)?)?;
    let num = x.checked_mul(a)?.checked_sub(y.checked_mul(c)?)?;
    Some((num, n1.checked_mul(n2)?))
}

/// `m(ζ₁, ζ₂)` as an exact reduced fraction, evaluated on the displayed
/// rational form over a common denominator.
pub fn symbol_exact(t: &SymbolTriple) -> Result<Ratio<i128>> {
    t.check_nonzero()?;
    let (num, den) = symbol_numerator(t).ok_or(OVF_M)?;
    Ok(Ratio::new(num, den))
}

/// `m(ζ₁, ζ₂)` in `f64`, term by term as displayed.
pub fn symbol(t: &SymbolTriple) -> Result<f64> {
    t.check_nonzero()?;
    Ok(symbol_f64(t.first, t.second))
}

/// Unchecked float evaluation; both arguments must be nonzero.
#[inline]
pub fn symbol_f64(z1: FrequencyPair, z2: FrequencyPair) -> f64 {
    let (x1, y1) = (z1.xi as f64, z1.eta as f64);
    let (x2, y2) = (z2.xi as f64, z2.eta as f64);
    let n1 = x1 * x1 + y1 * y1;
    let n2 = x2 * x2 + y2 * y2;
    let a = (x1 * x1 - y1 * y1) / n1 + (x2 * x2 - y2 * y2) / n2;
    let c = 2.0 * x1 * y1 / n1 + 2.0 * x2 * y2 / n2;
    (x1 + x2) * a - (y1 + y2) * c
}

/// `m` through the factored form (2/3)·(ζ₁·ζ₂)·r/(|ζ₁|²|ζ₂|²), in `f64`.
pub fn symbol_factored(t: &SymbolTriple) -> Result<f64> {
    t.check_nonzero()?;
    let r = resonance_i128(t).ok_or(OVF_R)? as f64;
    let dot = t.first.dot(t.second) as f64;
    let den = t.first.norm_sq() as f64 * t.second.norm_sq() as f64;
    Ok(2.0 / 3.0 * dot * r / den)
}

/// `3·m·|ζ₁|²|ζ₂|² == 2·(ζ₁·ζ₂)·r`, decided in integer arithmetic.
pub fn identity_holds_exactly(t: &SymbolTriple) -> Result<bool> {
    t.check_nonzero()?;
    let (num, _) = symbol_numerator(t).ok_or(OVF_M)?;
    let r = resonance_i128(t).ok_or(OVF_R)?;
    let lhs = num.checked_mul(3).ok_or(OVF_M)?;
    let rhs = t
        .first
        .dot(t.second)
        .checked_mul(2)
        .and_then(|d| d.checked_mul(r))
        .ok_or(OVF_M)?;
    Ok(lhs == rhs)
}

/// Result of [`verify_m_r_identity`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityReport {
    pub samples: u64,
    /// Largest `|m − m_factored| / (1 + |m|)` seen in float evaluation.
    pub max_deviation: f64,
    pub worst_witness: Option<SymbolTriple>,
    /// Samples on which the integer cross-multiplied identity failed.
    pub exact_failures: u64,
    pub skipped: u64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Relative tolerance used by [`verify_m_r_identity`].
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Checks the m–r identity on every supplied pair, both exactly and in
/// float arithmetic. Pairs with a zero frequency are skipped and counted.
pub fn verify_m_r_identity<I>(pairs: I) -> Result<IdentityReport>
where
    I: IntoIterator<Item = SymbolTriple>,
{
    let mut report = IdentityReport {
        samples: 0,
        max_deviation: 0.0,
        worst_witness: None,
        exact_failures: 0,
        skipped: 0,
        tolerance: IDENTITY_TOLERANCE,
        pass: false,
    };
    for t in pairs {
        if t.first.is_zero() || t.second.is_zero() {
            report.skipped += 1;
            continue;
        }
        report.samples += 1;
        if !identity_holds_exactly(&t)? {
            report.exact_failures += 1;
        }
        let m = symbol(&t)?;
        let f = symbol_factored(&t)?;
        let dev = (m - f).abs() / (1.0 + m.abs());
        if report.worst_witness.is_none() || dev > report.max_deviation {
            report.max_deviation = dev;
            report.worst_witness = Some(t);
        }
    }
    report.pass = report.samples > 0
        && report.exact_failures == 0
        && report.max_deviation < IDENTITY_TOLERANCE;
    Ok(report)
}

/// Which constant the resonance bound is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundConstant {
    /// The sharp constant `2·3^{−θ}`.
    Analytic,
    /// The constant-free reading, `C = 1`.
    ConstantFree,
    Explicit(f64),
}

impl BoundConstant {
    pub fn value(self, theta: f64) -> f64 {
        match self {
            BoundConstant::Analytic => sharp_bound_constant(theta),
            BoundConstant::ConstantFree => 1.0,
            BoundConstant::Explicit(c) => c,
        }
    }
}

/// Smallest `C` with `|m| ≤ C·|ζ|^{1−θ}|ζ₁|^{−θ}|ζ₂|^{−θ}|r|^θ` on ℤ²,
/// attained at ζ₁ = ζ₂ = (1, 0).
pub fn sharp_bound_constant(theta: f64) -> f64 {
    2.0 * 3f64.powf(-theta)
}

/// Result of [`verify_resonance_bound`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundReport {
    pub theta: f64,
    pub samples: u64,
    /// Constant the check was run against.
    pub constant: f64,
    /// Largest observed `|m| / (|ζ|^{1−θ}|ζ₁|^{−θ}|ζ₂|^{−θ}|r|^θ)`: the
    /// smallest constant that works on the sample.
    pub max_ratio: f64,
    pub worst_witness: Option<SymbolTriple>,
    /// Samples where `|m| > C·rhs`.
    pub violations: u64,
    pub first_violation: Option<SymbolTriple>,
    /// Samples with `r² > 9|ζ|²|ζ₁|²|ζ₂|²` (decided exactly).
    pub r_bound_violations: u64,
    /// Samples with `r = 0` but `m ≠ 0`.
    pub zero_resonance_violations: u64,
    pub pass: bool,
}

/// The sample that realizes the sharp constant; always checked first.
pub const EXTREMAL_PAIR: SymbolTriple =
    SymbolTriple::new(FrequencyPair::new(1, 0), FrequencyPair::new(1, 0));

/// Checks `|m| ≤ C·|ζ|^{1−θ}|ζ₁|^{−θ}|ζ₂|^{−θ}|r|^θ` and the ingredient
/// `|r| ≤ 3|ζ||ζ₁||ζ₂|` on the extremal pair followed by every supplied pair.
/// Pairs with ζ₁, ζ₂ or ζ equal to zero are skipped.
pub fn verify_resonance_bound<I>(theta: f64, constant: BoundConstant, pairs: I) -> Result<BoundReport>
where
    I: IntoIterator<Item = SymbolTriple>,
{
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Precondition("theta must lie in (0, 1)"));
    }
    let c = constant.value(theta);
    let slack = 1.0 + 1e-12;
    let mut rep = BoundReport {
        theta,
        samples: 0,
        constant: c,
        max_ratio: 0.0,
        worst_witness: None,
        violations: 0,
        first_violation: None,
        r_bound_violations: 0,
        zero_resonance_violations: 0,
        pass: false,
    };
    for t in core::iter::once(EXTREMAL_PAIR).chain(pairs) {
        let z = t.output();
        if t.first.is_zero() || t.second.is_zero() || z.is_zero() {
            continue;
        }
        rep.samples += 1;
        let r = resonance_i128(&t).ok_or(OVF_R)?;
        let n = z.norm_sq();
        let n1 = t.first.norm_sq();
        let n2 = t.second.norm_sq();
        let bound_sq = n
            .checked_mul(n1)
            .and_then(|v| v.checked_mul(n2))
            .and_then(|v| v.checked_mul(9));
        // an overflowing right side is larger than any representable r²
        if let (Some(b), Some(r2)) = (bound_sq, r.checked_mul(r)) {
            if r2 > b {
                rep.r_bound_violations += 1;
            }
        }
        let m = symbol_exact(&t)?;
        if r == 0 {
            if *m.numer() != 0 {
                rep.zero_resonance_violations += 1;
            }
            continue;
        }
        let m = (*m.numer() as f64 / *m.denom() as f64).abs();
        let rhs = (n as f64).powf((1.0 - theta) / 2.0)
            * (n1 as f64).powf(-theta / 2.0)
            * (n2 as f64).powf(-theta / 2.0)
            * (r as f64).abs().powf(theta);
        let ratio = m / rhs;
        if rep.worst_witness.is_none() || ratio > rep.max_ratio {
            rep.max_ratio = ratio;
            rep.worst_witness = Some(t);
        }
        if ratio > c * slack {
            rep.violations += 1;
            rep.first_violation.get_or_insert(t);
        }
    }
    rep.pass = rep.violations == 0 && rep.r_bound_violations == 0 && rep.zero_resonance_violations == 0;
    Ok(rep)
}
