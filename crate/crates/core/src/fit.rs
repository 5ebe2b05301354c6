//! Log–log slope fitting.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Precondition("abscissae and ordinates differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::Precondition("a slope needs at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::Precondition("abscissae must not all coincide"));
    }
    Ok(sxy / sxx)
}

/// Slope of `log y` against `log x`. Nonpositive ordinates are floored at
/// `floor` before taking logarithms.
pub fn log_log_slope(xs: &[f64], ys: &[f64], floor: f64) -> Result<f64> {
    if xs.iter().any(|&x| x <= 0.0) {
        return Err(Error::Precondition("abscissae must be positive"));
    }
    let lx: alloc::vec::Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: alloc::vec::Vec<f64> = ys.iter().map(|y| y.max(floor).ln()).collect();
    least_squares_slope(&lx, &ly)
}
