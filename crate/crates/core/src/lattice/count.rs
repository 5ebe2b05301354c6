use num_rational::Ratio;

use super::roots::{integer_roots, IntRoots};
use super::{CountReport, Curve, CurveSpec, DegeneracyKind, Window, MAX_WITNESSES};
use crate::error::{Error, Result};

const OVF: Error = Error::Overflow("lattice slice");

/// Walks the window column by column. `coeffs(x)` returns the quadratic in
/// y whose integer roots are the solutions on that column, and `keep`
/// filters individual points. Returns whether any column was an entire line.
fn walk(
    window: &Window,
    report: &mut CountReport,
    mut coeffs: impl FnMut(i128) -> Option<(i128, i128, i128)>,
    keep: impl Fn(i64, i64) -> bool,
) -> Result<bool> {
    window.validate()?;
    let (x0, x1) = window.x_range();
    let mut saw_line = false;
    for x in x0..=x1 {
        let Some((lo, hi)) = window.y_range(x) else { continue };
        if hi < lo {
            continue;
        }
        let (a, b, c) = coeffs(x as i128).ok_or(OVF)?;
        match integer_roots(a, b, c).ok_or(OVF)? {
            IntRoots::All => {
                saw_line = true;
                if !keep(x, lo) {
                    continue;
                }
                let n = (hi - lo + 1) as u64;
                let room = MAX_WITNESSES.saturating_sub(report.witnesses.len()) as i64;
                for y in lo..=hi.min(lo.saturating_add(room - 1)) {
                    report.witnesses.push((x, y));
                }
                report.count += n;
            }
            roots => roots.for_each(|y| {
                if lo as i128 <= y && y <= hi as i128 && keep(x, y as i64) {
                    report.push(x, y as i64);
                }
            }),
        }
    }
    Ok(saw_line)
}

fn mul3(a: i128, b: i128, c: i128) -> Option<i128> {
    a.checked_mul(b)?.checked_mul(c)
}

/// Integral points on `a(x² − y²) + 2bxy = c` inside the window.
pub fn count_hyperbola(a: i64, b: i64, c: i64, window: Window) -> Result<CountReport> {
    if c == 0 {
        return Err(Error::DegenerateCurve("hyperbola requires c != 0"));
    }
    if a == 0 && b == 0 {
        return Err(Error::DegenerateCurve("hyperbola requires (a, b) != (0, 0)"));
    }
    let spec = CurveSpec::new(Curve::Hyperbola { a, b, c }, window);
    let mut report = CountReport::empty(spec);
    let (a, b, c) = (a as i128, b as i128, c as i128);
    // −a·y² + 2bx·y + (a·x² − c) = 0
    walk(
        &window,
        &mut report,
        |x| Some((-a, mul3(2, b, x)?, mul3(a, x, x)?.checked_sub(c)?)),
        |_, _| true,
    )?;
    Ok(report)
}

/// Integral points on `(x + a)(x² − y²) = 2(y + b)xy` inside the window.
///
/// For `a = 0` the whole line `x = 0` solves the equation; with
/// `exclude_line` set those points are omitted. For `a ≠ 0` there is no line
/// family and the flag has no effect.
pub fn count_cubic(a: i64, b: i64, window: Window, exclude_line: bool) -> Result<CountReport> {
    let spec = CurveSpec::new(Curve::Cubic { a, b }, window);
    cubic_into(a, b, window, exclude_line, spec, (0, 0))
}

fn cubic_into(
    a: i64,
    b: i64,
    window: Window,
    exclude_line: bool,
    spec: CurveSpec,
    offset: (i64, i64),
) -> Result<CountReport> {
    let mut report = CountReport::empty(spec);
    let drop_line = exclude_line && a == 0;
    let (ai, bi) = (a as i128, b as i128);
    // (3x + a)·y² + 2bx·y − (x + a)·x² = 0
    let saw_line = walk(
        &window,
        &mut report,
        |x| {
            let lead = x.checked_mul(3)?.checked_add(ai)?;
            let lin = mul3(2, bi, x)?;
            let cst = mul3(x.checked_add(ai)?, x, x)?.checked_neg()?;
            Some((lead, lin, cst))
        },
        |x, _| !(drop_line && x == 0),
    )?;
    if saw_line || a == 0 {
        report.degenerate = true;
        report.degeneracy_kind = Some(if exclude_line {
            DegeneracyKind::ExcludedByProjector
        } else {
            DegeneracyKind::LineInFamily
        });
    }
    if offset != (0, 0) {
        for w in report.witnesses.iter_mut() {
            *w = (w.0 + offset.0, w.1 + offset.1);
        }
    }
    Ok(report)
}

/// `Σ₃(ξ₁, η₁)`: frequencies (ξ, η) in the window with
/// `(x + 2ξ₁)(x² − y²) = 2(y + 2η₁)xy` for `(x, y) = (ξ − 2ξ₁, η − 2η₁)`,
/// excluding ξ = 0 when ξ₁ = 0. Witnesses are reported as (ξ, η).
pub fn sigma3_count(xi1: i64, eta1: i64, window: Window) -> Result<CountReport> {
    let (a, b) = (
        xi1.checked_mul(2).ok_or(Error::Overflow("sigma3 parameters"))?,
        eta1.checked_mul(2).ok_or(Error::Overflow("sigma3 parameters"))?,
    );
    let spec = CurveSpec::new(Curve::Sigma3 { xi1, eta1 }, window);
    cubic_into(a, b, window.shifted(-a, -b), true, spec, (a, b))
}

/// `Σ₁(ξ, η, τ)` restricted to a window: the number of integer ζ₁ in it
/// with `φ(ζ₁) + φ(ζ − ζ₁) = τ`, together with both readings of the
/// branch condition that splits the sum.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sigma1Report {
    pub count: CountReport,
    /// `τ − ξ³/4 + (7/4)ξη² ≠ 0`, as displayed in the reference form.
    pub k_condition_displayed: bool,
    /// `τ − ξ³/4 + (3/4)ξη² ≠ 0`, from the expansion of the constraint.
    pub k_condition_expanded: bool,
}

fn k_condition(xi: i64, eta: i64, tau: i64, coeff: i128) -> bool {
    let (xi, eta, tau) = (xi as i128, eta as i128, tau as i128);
    let v = Ratio::from_integer(tau) - Ratio::new(xi * xi * xi, 4) + Ratio::new(coeff * xi * eta * eta, 4);
    v != Ratio::from_integer(0)
}

pub fn k_condition_displayed(xi: i64, eta: i64, tau: i64) -> bool {
    k_condition(xi, eta, tau, 7)
}

pub fn k_condition_expanded(xi: i64, eta: i64, tau: i64) -> bool {
    k_condition(xi, eta, tau, 3)
}

/// Counts from the defining constraint, walking ξ₁ and solving the
/// quadratic in η₁:
/// `−3ξ·η₁² + 6(ξ−ξ₁)η·η₁ + ξ₁³ + (ξ−ξ₁)³ − 3(ξ−ξ₁)η² − τ = 0`.
pub fn sigma1_count(xi: i64, eta: i64, tau: i64, window: Window) -> Result<Sigma1Report> {
    const LIM: i64 = 1 << 20;
    if xi.abs() > LIM || eta.abs() > LIM {
        return Err(Error::Overflow("sigma1 frequency"));
    }
    let spec = CurveSpec::new(Curve::KCurve { xi, eta, tau }, window);
    let mut report = CountReport::empty(spec);
    let (x, e, t) = (xi as i128, eta as i128, tau as i128);
    let saw_line = walk(
        &window,
        &mut report,
        |x1| {
            let x2 = x.checked_sub(x1)?;
            let c = mul3(x1, x1, x1)?
                .checked_add(mul3(x2, x2, x2)?)?
                .checked_sub(mul3(3, x2, e.checked_mul(e)?)?)?
                .checked_sub(t)?;
            Some((-3 * x, mul3(6, x2, e)?, c))
        },
        |_, _| true,
    )?;
    if saw_line {
        report.degenerate = true;
        report.degeneracy_kind = Some(DegeneracyKind::LineInFamily);
    }
    Ok(Sigma1Report {
        count: report,
        k_condition_displayed: k_condition_displayed(xi, eta, tau),
        k_condition_expanded: k_condition_expanded(xi, eta, tau),
    })
}

/// Dispatches on the curve variant. `Cubic` is counted without line exclusion.
pub fn count(spec: &CurveSpec) -> Result<CountReport> {
    match spec.curve {
        Curve::Hyperbola { a, b, c } => count_hyperbola(a, b, c, spec.window),
        Curve::Cubic { a, b } => count_cubic(a, b, spec.window, false),
        Curve::KCurve { xi, eta, tau } => Ok(sigma1_count(xi, eta, tau, spec.window)?.count),
        Curve::Sigma3 { xi1, eta1 } => sigma3_count(xi1, eta1, spec.window),
    }
}
