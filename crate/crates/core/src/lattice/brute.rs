//! `O(area)` enumeration oracles for the structure-aware counters.

use alloc::vec::Vec;

use super::{Curve, CurveSpec};
use crate::error::{Error, Result};
use crate::freq::{phase_i128, FrequencyPair};

const LIMIT: i64 = 1 << 30;

fn residual(curve: &Curve, x: i128, y: i128) -> i128 {
    match *curve {
        Curve::Hyperbola { a, b, c } => {
            let (a, b, c) = (a as i128, b as i128, c as i128);
            a * (x * x - y * y) + 2 * b * x * y - c
        }
        Curve::Cubic { a, b } => {
            let (a, b) = (a as i128, b as i128);
            (x + a) * (x * x - y * y) - 2 * (y + b) * x * y
        }
        Curve::KCurve { xi, eta, tau } => {
            let z1 = FrequencyPair::new(x as i64, y as i64);
            let z2 = FrequencyPair::new(xi - x as i64, eta - y as i64);
            phase_i128(z1).unwrap() + phase_i128(z2).unwrap() - tau as i128
        }
        Curve::Sigma3 { xi1, eta1 } => {
            let (a, b) = (2 * xi1 as i128, 2 * eta1 as i128);
            let (u, v) = (x - a, y - b);
            (u + a) * (u * u - v * v) - 2 * (v + b) * u * v
        }
    }
}

fn excluded(curve: &Curve, exclude_line: bool, x: i64) -> bool {
    match *curve {
        Curve::Cubic { a, .. } => exclude_line && a == 0 && x == 0,
        Curve::Sigma3 { xi1, .. } => xi1 == 0 && x == 0,
        _ => false,
    }
}

fn check(spec: &CurveSpec) -> Result<()> {
    spec.window.validate()?;
    let (a, b, c) = spec.curve.parameters();
    let (x0, x1) = spec.window.x_range();
    let big = |v: i64| v.abs() >= LIMIT;
    if big(a) || big(b) || big(x0) || big(x1) || spec.window.size() >= LIMIT {
        return Err(Error::Overflow("brute-force enumeration range"));
    }
    if matches!(spec.curve, Curve::Hyperbola { .. }) && c.is_some_and(|c| c.abs() >= i64::MAX / 4) {
        return Err(Error::Overflow("brute-force enumeration range"));
    }
    Ok(())
}

/// Visits every solution in the window, in column order.
pub fn for_each_point(spec: &CurveSpec, exclude_line: bool, mut f: impl FnMut(i64, i64)) -> Result<()> {
    check(spec)?;
    let (x0, x1) = spec.window.x_range();
    for x in x0..=x1 {
        let Some((lo, hi)) = spec.window.y_range(x) else { continue };
        if excluded(&spec.curve, exclude_line, x) {
            continue;
        }
        for y in lo..=hi {
            if residual(&spec.curve, x as i128, y as i128) == 0 {
                f(x, y);
            }
        }
    }
    Ok(())
}

/// Number of solutions in the window. `exclude_line` applies to `Cubic` only;
/// `Sigma3` always carries its own exclusion.
pub fn count(spec: &CurveSpec, exclude_line: bool) -> Result<u64> {
    let mut n = 0;
    for_each_point(spec, exclude_line, |_, _| n += 1)?;
    Ok(n)
}

pub fn points(spec: &CurveSpec, exclude_line: bool) -> Result<Vec<(i64, i64)>> {
    let mut out = Vec::new();
    for_each_point(spec, exclude_line, |x, y| out.push((x, y)))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{HalfPoint, Window};
    use super::*;

    #[test]
    fn hand_counts() {
        let w = Window::square(0, 0, 21).unwrap();
        let spec = |curve| CurveSpec::new(curve, w);
        assert_eq!(count(&spec(Curve::Hyperbola { a: 1, b: 0, c: 1 }), false), Ok(2));
        assert_eq!(count(&spec(Curve::Hyperbola { a: 0, b: 1, c: 2 }), false), Ok(2));
        assert_eq!(count(&spec(Curve::Hyperbola { a: 1, b: 0, c: -1 }), false), Ok(2));
        assert_eq!(count(&spec(Curve::Cubic { a: 0, b: 0 }), false), Ok(21));
        assert_eq!(count(&spec(Curve::Cubic { a: 0, b: 0 }), true), Ok(0));
        assert_eq!(count(&spec(Curve::Sigma3 { xi1: 0, eta1: 0 }), false), Ok(0));
        let d = |r| Window::disc(HalfPoint::integer(0, 0), r).unwrap();
        let k = |xi, eta, tau, r| count(&CurveSpec::new(Curve::KCurve { xi, eta, tau }, d(r)), false);
        assert_eq!(k(2, 0, 8, 10), Ok(2));
        assert_eq!(k(0, 0, 0, 2), Ok(13));
        assert_eq!(k(1, 0, 5, 100), Ok(0));
    }
}
