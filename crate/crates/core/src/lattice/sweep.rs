use alloc::string::String;
use alloc::vec::Vec;

use super::{CountReport, CurveSpec};
use crate::error::{Error, Result};
use crate::fit::log_log_slope;

/// One random draw for [`fit_exponent`].
#[derive(Debug, Clone)]
pub enum Draw {
    Counted(CountReport),
    /// The drawn parameters were degenerate and must be redrawn.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExponentReport {
    pub family: String,
    #[cfg_attr(feature = "serde", serde(rename = "N_list"))]
    pub n_list: Vec<i64>,
    pub samples_per_n: usize,
    pub maxima: Vec<u64>,
    /// Least-squares slope of `log(max count)` against `log N`, with zero
    /// maxima floored at 1.
    pub fitted_slope: f64,
    /// Curve attaining the largest count at the largest N.
    pub worst_witness: Option<CurveSpec>,
    pub redraws: u64,
}

/// Draws `samples_per_n` curves for each N via `draw(N, sample_index)`, keeps
/// the maximal count per N and fits the growth exponent.
pub fn fit_exponent<F>(family: &str, n_list: &[i64], samples_per_n: usize, mut draw: F) -> Result<ExponentReport>
where
    F: FnMut(i64, usize) -> Result<Draw>,
{
    if n_list.len() < 2 {
        return Err(Error::Precondition("exponent fit needs at least two values of N"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] < 1 {
        return Err(Error::Precondition("N values must be positive and increasing"));
    }
    if samples_per_n == 0 {
        return Err(Error::Precondition("at least one sample per N"));
    }
    let max_redraws = 1000 * samples_per_n as u64;
    let mut maxima = Vec::with_capacity(n_list.len());
    let mut redraws = 0;
    let mut worst = None;
    for &n in n_list {
        let mut best: Option<CountReport> = None;
        let mut k = 0;
        let mut redraws_here = 0;
        while k < samples_per_n {
            match draw(n, k)? {
                Draw::Degenerate => {
                    redraws += 1;
                    redraws_here += 1;
                    if redraws_here > max_redraws {
                        return Err(Error::Precondition("sampler keeps producing degenerate curves"));
                    }
                }
                Draw::Counted(rep) => {
                    if best.as_ref().map_or(true, |b| rep.count > b.count) {
                        best = Some(rep);
                    }
                    k += 1;
                }
            }
        }
        let best = best.expect("at least one sample");
        maxima.push(best.count);
        worst = Some(best.spec);
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = maxima.iter().map(|&m| m as f64).collect();
    Ok(ExponentReport {
        family: String::from(family),
        n_list: n_list.to_vec(),
        samples_per_n,
        fitted_slope: log_log_slope(&xs, &ys, 1.0)?,
        maxima,
        worst_witness: worst,
        redraws,
    })
}
