//! Verifier suites behind `nv-lab verify`.

use num_complex::Complex64;
use nv_core::kform::{kform_report, KFormReport};
use nv_core::symbol::{verify_m_r_identity, verify_resonance_bound, BoundConstant, BoundReport, IdentityReport};
use nv_core::{resonance, symbol::resonance_from_phase, FrequencyPair, SymbolTriple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::nonlinearity::{bilinear, bilinear_convolution};
use crate::torus::{SpectralField, TorusGrid};

/// Uniform random pairs with coordinates in `[−bound, bound]`.
pub fn random_pairs(count: usize, bound: i64, seed: u64) -> Vec<SymbolTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = move || FrequencyPair::new(rng.random_range(-bound..=bound), rng.random_range(-bound..=bound));
    (0..count).map(|_| SymbolTriple::new(draw(), draw())).collect()
}

/// Outcome of the exhaustive comparison of the factored resonance with
/// `φ(ζ₁+ζ₂) − φ(ζ₁) − φ(ζ₂)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub bound: i64,
    pub checked: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<SymbolTriple>,
    pub pass: bool,
}

/// Checks every pair with all four coordinates in `[−bound, bound]`.
pub fn verify_resonance_consistency(bound: i64) -> Result<ResonanceReport> {
    if !(0..=1000).contains(&bound) {
        return Err(LabError::Config("resonance bound must lie in [0, 1000]".into()));
    }
    let per_row: Vec<(u64, u64, Option<SymbolTriple>)> = (-bound..=bound)
        .into_par_iter()
        .map(|x1| {
            let (mut checked, mut bad, mut first) = (0u64, 0u64, None);
            for y1 in -bound..=bound {
                for x2 in -bound..=bound {
                    for y2 in -bound..=bound {
                        let t = SymbolTriple::new(FrequencyPair::new(x1, y1), FrequencyPair::new(x2, y2));
                        checked += 1;
                        if resonance(&t).ok() != resonance_from_phase(&t).ok() {
                            bad += 1;
                            first.get_or_insert(t);
                        }
                    }
                }
            }
            (checked, bad, first)
        })
        .collect();
    let checked = per_row.iter().map(|r| r.0).sum();
    let mismatches = per_row.iter().map(|r| r.1).sum();
    let first_mismatch = per_row.iter().find_map(|r| r.2);
    Ok(ResonanceReport { bound, checked, mismatches, first_mismatch, pass: mismatches == 0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitiesReport {
    pub m_r_identity: IdentityReport,
    pub resonance: ResonanceReport,
    pub pass: bool,
}

/// Comparison of the grid product path with the direct convolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPathReport {
    pub grid: TorusGrid,
    pub fields: usize,
    pub max_relative_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A mean-zero field with independent uniform coefficients on every mode.
pub fn random_mean_zero_field(grid: TorusGrid, rng: &mut impl Rng) -> SpectralField {
    SpectralField::zeros(grid).map(|z, _| {
        if z.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }
    })
}

/// `B(u, v)` through grid products against the direct sum with the symbol,
/// on `fields` random pairs. Both paths apply the two-thirds rule to inputs
/// and output, under which the grid product is alias free.
pub fn verify_dual_path(grid: TorusGrid, fields: usize, seed: u64, tolerance: f64) -> Result<DualPathReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..fields {
        let u = random_mean_zero_field(grid, &mut rng);
        let v = random_mean_zero_field(grid, &mut rng);
        let a = bilinear(&u, &v, true)?;
        let b = bilinear_convolution(&u, &v, true)?;
        let scale = b.coefficient_norm_sq().sqrt();
        let d = a.sub(&b)?.coefficient_norm_sq().sqrt();
        worst = worst.max(if scale > 0.0 { d / scale } else { d });
    }
    Ok(DualPathReport { grid, fields, max_relative_deviation: worst, tolerance, pass: worst < tolerance })
}

/// Settings of the verifier suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub identity_samples: usize,
    pub identity_bound: i64,
    pub resonance_bound: i64,
    pub theta: f64,
    pub bound_samples: usize,
    pub bound_coord: i64,
    /// Use the constant 1 instead of the sharp constant.
    pub constant_free: bool,
    pub dualpath_grid: TorusGrid,
    pub dualpath_fields: usize,
    pub dualpath_tolerance: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            identity_samples: 100_000,
            identity_bound: 1000,
            resonance_bound: 50,
            theta: 0.5,
            bound_samples: 100_000,
            bound_coord: 1000,
            constant_free: false,
            dualpath_grid: TorusGrid::square(16).expect("valid grid"),
            dualpath_fields: 100,
            dualpath_tolerance: 1e-12,
            seed: 0,
        }
    }
}

pub fn run_identities(cfg: &VerifyConfig) -> Result<IdentitiesReport> {
    let m_r_identity = verify_m_r_identity(random_pairs(cfg.identity_samples, cfg.identity_bound, cfg.seed))?;
    let resonance = verify_resonance_consistency(cfg.resonance_bound)?;
    let pass = m_r_identity.pass && resonance.pass;
    Ok(IdentitiesReport { m_r_identity, resonance, pass })
}

pub fn run_bounds(cfg: &VerifyConfig) -> Result<BoundReport> {
    let constant = if cfg.constant_free { BoundConstant::ConstantFree } else { BoundConstant::Analytic };
    Ok(verify_resonance_bound(cfg.theta, constant, random_pairs(cfg.bound_samples, cfg.bound_coord, cfg.seed ^ 1))?)
}

pub fn run_dualpath(cfg: &VerifyConfig) -> Result<DualPathReport> {
    verify_dual_path(cfg.dualpath_grid, cfg.dualpath_fields, cfg.seed, cfg.dualpath_tolerance)
}

pub fn run_kform() -> KFormReport {
    kform_report()
}
