//! The NV nonlinearity in physical-space and spectral-convolution form.
//!
//! With `P = (∂ₓ² − ∂ᵧ²)/Δ ↔ (ξ² − η²)/|ζ|²` and `Q = 2∂ₓ∂ᵧ/Δ ↔ 2ξη/|ζ|²`
//! (both zero at ζ = 0),
//!
//! ```text
//! B(u, v) = ∂ₓ((Pu)v + u(Pv)) − ∂ᵧ((Qu)v + u(Qv)),   N(u) = ½B(u, u)
//! ```
//!
//! and in frequency space `B̂(u,v)(ζ) = i Σ m(ζ₁,ζ₂) û(ζ₁) v̂(ζ₂)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use nv_core::symbol::symbol_f64;
use nv_core::FrequencyPair;

use crate::error::Result;
use crate::torus::{dealias_in_place, from_physical_in_place, to_physical_in_place, SpectralField, TorusGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-grid symbol tables shared by every operator on that grid.
#[derive(Debug)]
pub(crate) struct Tables {
    pub grid: TorusGrid,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub keep: Vec<bool>,
}

impl Tables {
    fn new(grid: TorusGrid) -> Self {
        let n = grid.len();
        let (mut xi, mut eta, mut p, mut q, mut keep) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for z in grid.frequencies() {
            let (x, y) = (z.xi as f64, z.eta as f64);
            let n2 = x * x + y * y;
            xi.push(x);
            eta.push(y);
            p.push(if n2 > 0.0 { (x * x - y * y) / n2 } else { 0.0 });
            q.push(if n2 > 0.0 { 2.0 * x * y / n2 } else { 0.0 });
            keep.push(grid.in_dealias_set(z));
        }
        Tables { grid, xi, eta, p, q, keep }
    }
}

pub(crate) fn tables(grid: TorusGrid) -> Arc<Tables> {
    static CACHE: OnceLock<Mutex<HashMap<TorusGrid, Arc<Tables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().expect("table cache poisoned");
    map.entry(grid).or_insert_with(|| Arc::new(Tables::new(grid))).clone()
}

fn scaled(src: &[Complex64], s: &[f64]) -> Vec<Complex64> {
    src.iter().zip(s).map(|(c, s)| c * s).collect()
}

fn truncated(t: &Tables, src: &[Complex64]) -> Vec<Complex64> {
    src.iter().zip(&t.keep).map(|(&c, &k)| if k { c } else { ZERO }).collect()
}

fn phys(t: &Tables, mut c: Vec<Complex64>) -> Vec<Complex64> {
    to_physical_in_place(t.grid, &mut c);
    c
}

/// `iξ·f̂ − iη·ĝ` from physical `f`, `g`, written to `out`.
fn divergence(t: &Tables, mut f: Vec<Complex64>, mut g: Vec<Complex64>, dealias: bool, out: &mut [Complex64]) {
    from_physical_in_place(t.grid, &mut f);
    from_physical_in_place(t.grid, &mut g);
    for i in 0..out.len() {
        out[i] = I * (t.xi[i] * f[i] - t.eta[i] * g[i]);
    }
    out[0] = ZERO;
    if dealias {
        dealias_in_place(t.grid, out);
    }
}

pub(crate) fn bilinear_raw(t: &Tables, u: &[Complex64], v: &[Complex64], dealias: bool, out: &mut [Complex64]) {
    let (u, v) = if dealias { (truncated(t, u), truncated(t, v)) } else { (u.to_vec(), v.to_vec()) };
    let pu = phys(t, scaled(&u, &t.p));
    let pv = phys(t, scaled(&v, &t.p));
    let qu = phys(t, scaled(&u, &t.q));
    let qv = phys(t, scaled(&v, &t.q));
    let uu = phys(t, u);
    let vv = phys(t, v);
    let f = (0..uu.len()).map(|i| pu[i] * vv[i] + uu[i] * pv[i]).collect();
    let g = (0..uu.len()).map(|i| qu[i] * vv[i] + uu[i] * qv[i]).collect();
    divergence(t, f, g, dealias, out);
}

/// `∂ₓ(u·Pu) − ∂ᵧ(u·Qu)` written to `out`.
pub(crate) fn nonlinearity_raw(t: &Tables, u: &[Complex64], dealias: bool, out: &mut [Complex64]) {
    let u = if dealias { truncated(t, u) } else { u.to_vec() };
    let pu = phys(t, scaled(&u, &t.p));
    let qu = phys(t, scaled(&u, &t.q));
    let uu = phys(t, u);
    let f = (0..uu.len()).map(|i| uu[i] * pu[i]).collect();
    let g = (0..uu.len()).map(|i| uu[i] * qu[i]).collect();
    divergence(t, f, g, dealias, out);
}

/// `B(u, v)` through pointwise products on the grid. With `dealias` the
/// inputs and the output are truncated by the two-thirds rule.
pub fn bilinear(u: &SpectralField, v: &SpectralField, dealias: bool) -> Result<SpectralField> {
    let grid = u.grid();
    grid.check_same(&v.grid())?;
    let t = tables(grid);
    let mut out = vec![ZERO; grid.len()];
    bilinear_raw(&t, u.coefficients(), v.coefficients(), dealias, &mut out);
    let f = SpectralField::from_coefficients(grid, out)?;
    Ok(f.with_real_flag(u.is_real_valued() && v.is_real_valued() && dealias))
}

/// `B(u, v)` through the direct double sum `i Σ m(ζ₁,ζ₂) û(ζ₁) v̂(ζ₂)` over
/// nonzero ζ₁, ζ₂ with ζ₁ + ζ₂ on the grid. With `dealias`, ζ₁, ζ₂ and ζ are
/// restricted to the two-thirds set. `O(n⁴)`; meant for small grids.
pub fn bilinear_convolution(u: &SpectralField, v: &SpectralField, dealias: bool) -> Result<SpectralField> {
    convolve(u, v, dealias, |z1, z2| I * symbol_f64(z1, z2), true)
}

/// `N(u) = ½B(u, u)`.
pub fn nonlinearity(u: &SpectralField, dealias: bool) -> Result<SpectralField> {
    let b = bilinear(u, u, dealias)?;
    let real = b.is_real_valued();
    Ok(b.scale(Complex64::new(0.5, 0.0)).with_real_flag(real))
}

/// `∂ₓ(u·Pu) − ∂ᵧ(u·Qu)`, evaluated without symmetrization.
pub fn nonlinearity_direct(u: &SpectralField, dealias: bool) -> Result<SpectralField> {
    let grid = u.grid();
    let t = tables(grid);
    let mut out = vec![ZERO; grid.len()];
    nonlinearity_raw(&t, u.coefficients(), dealias, &mut out);
    Ok(SpectralField::from_coefficients(grid, out)?.with_real_flag(u.is_real_valued() && dealias))
}

fn convolve(
    u: &SpectralField,
    v: &SpectralField,
    dealias: bool,
    weight: impl Fn(FrequencyPair, FrequencyPair) -> Complex64,
    skip_zero: bool,
) -> Result<SpectralField> {
    let grid = u.grid();
    grid.check_same(&v.grid())?;
    let support = |f: &SpectralField| -> Vec<(FrequencyPair, Complex64)> {
        grid.frequencies()
            .zip(f.coefficients())
            .filter(|(z, c)| **c != ZERO && !(skip_zero && z.is_zero()) && (!dealias || grid.in_dealias_set(*z)))
            .map(|(z, c)| (z, *c))
            .collect()
    };
    let (su, sv) = (support(u), support(v));
    let mut out = vec![ZERO; grid.len()];
    for &(z1, a) in &su {
        for &(z2, b) in &sv {
            let z = z1 + z2;
            if dealias && !grid.in_dealias_set(z) {
                continue;
            }
            if let Some(i) = grid.index(z) {
                out[i] += weight(z1, z2) * a * b;
            }
        }
    }
    SpectralField::from_coefficients(grid, out)
}

/// `Q(u, v)`: the convolution `Σ (1 − δ_{ξ,0}δ_{ξ₁,0}) û(ζ₁) v̂(ζ₂)` over
/// ζ₁ + ζ₂ = ζ on the grid, computed as a direct double sum.
pub fn projector_q(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    convolve(
        u,
        v,
        false,
        |z1, z2| if z1.xi == 0 && z1.xi + z2.xi == 0 { ZERO } else { Complex64::new(1.0, 0.0) },
        false,
    )
}

/// The part of `u` on the line ξ = 0.
pub fn q0(u: &SpectralField) -> SpectralField {
    u.map(|z, c| if z.xi == 0 { c } else { ZERO })
}

/// `((I − Q₀)u)·v + (Q₀u)·((I − Q₀)v)`, with the products taken on the grid.
/// Agrees with [`projector_q`] when the product is alias free, e.g. when both
/// supports lie in `|ξ|, |η| < n/4`.
pub fn projector_q_split(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    let grid = u.grid();
    grid.check_same(&v.grid())?;
    let (u0, v0) = (q0(u), q0(v));
    let (u1, v1) = (u.sub(&u0)?, v.sub(&v0)?);
    let p = |f: &SpectralField| crate::torus::to_physical(f);
    let (a, b, c, d) = (p(&u1), p(v), p(&u0), p(&v1));
    let prod: Vec<Complex64> = (0..grid.len()).map(|i| a[i] * b[i] + c[i] * d[i]).collect();
    crate::torus::from_physical(grid, &prod)
}
