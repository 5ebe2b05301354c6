//! Exact integral-point counting on the hyperbola and cubic families.
//!
//! All structure-aware counters walk the window column by column: at a
//! fixed abscissa the curve equation is a quadratic (or lower) polynomial in
//! the other coordinate, whose integer roots are found exactly with a
//! perfect-square discriminant test. This is `O(width)` per curve. The
//! [`brute`] module holds the `O(area)` enumeration used as an oracle.

pub mod brute;
mod classify;
mod count;
mod roots;
mod sweep;
mod window;

use alloc::vec::Vec;

pub use classify::{classify_cubic, BranchAsymptote, CubicClassification, IsolatedPoint};
pub use count::{
    count, count_cubic, count_hyperbola, k_condition_displayed, k_condition_expanded, sigma1_count,
    sigma3_count, Sigma1Report,
};
pub use roots::{integer_roots, IntRoots};
pub use sweep::{fit_exponent, Draw, ExponentReport};
pub use window::{HalfPoint, Window, COORD_LIMIT};

/// One member of the counted curve families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "variant", rename_all = "snake_case"))]
pub enum Curve {
    /// `a(x² − y²) + 2bxy = c`, with `c ≠ 0` and `(a, b) ≠ (0, 0)`.
    Hyperbola { a: i64, b: i64, c: i64 },
    /// `(x + a)(x² − y²) = 2(y + b)xy`.
    Cubic { a: i64, b: i64 },
    /// `φ(ζ₁) + φ(ζ − ζ₁) = τ` in the unknown ζ₁, with ζ = (xi, eta).
    KCurve { xi: i64, eta: i64, tau: i64 },
    /// The cubic with `(a, b) = (2ξ₁, 2η₁)` in the shifted unknowns
    /// `(ξ − 2ξ₁, η − 2η₁)`, with the ξ = ξ₁ = 0 interactions removed.
    Sigma3 { xi1: i64, eta1: i64 },
}

impl Curve {
    pub fn name(&self) -> &'static str {
        match self {
            Curve::Hyperbola { .. } => "hyperbola",
            Curve::Cubic { .. } => "cubic",
            Curve::KCurve { .. } => "kcurve",
            Curve::Sigma3 { .. } => "sigma3",
        }
    }

    /// `(a, b, c_or_tau)` in the column layout of sweep output.
    pub fn parameters(&self) -> (i64, i64, Option<i64>) {
        match *self {
            Curve::Hyperbola { a, b, c } => (a, b, Some(c)),
            Curve::Cubic { a, b } => (a, b, None),
            Curve::KCurve { xi, eta, tau } => (xi, eta, Some(tau)),
            Curve::Sigma3 { xi1, eta1 } => (xi1, eta1, None),
        }
    }
}

/// A curve together with the window it is counted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveSpec {
    pub curve: Curve,
    pub window: Window,
}

impl CurveSpec {
    pub fn new(curve: Curve, window: Window) -> Self {
        CurveSpec { curve, window }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DegeneracyKind {
    /// The solution set contains a whole line, and it was counted.
    LineInFamily,
    /// The solution set contains a whole line, removed by the ξ = ξ₁ = 0 factor.
    ExcludedByProjector,
}

/// Maximum number of solution points retained in a [`CountReport`].
pub const MAX_WITNESSES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountReport {
    pub spec: CurveSpec,
    pub count: u64,
    pub degenerate: bool,
    pub degeneracy_kind: Option<DegeneracyKind>,
    /// The first solutions found, in column order, at most [`MAX_WITNESSES`].
    pub witnesses: Vec<(i64, i64)>,
}

impl CountReport {
    pub(crate) fn empty(spec: CurveSpec) -> Self {
        CountReport { spec, count: 0, degenerate: false, degeneracy_kind: None, witnesses: Vec::new() }
    }

    pub(crate) fn push(&mut self, x: i64, y: i64) {
        self.count += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push((x, y));
        }
    }
}
