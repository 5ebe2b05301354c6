//! Fourier representation of fields on the 2π-periodic square torus.
//!
//! Transform convention: `û(ζ) = (2π)⁻² ∫ e^{−i(xξ+yη)} u dx dy`, so that
//! `u(x, y) = Σ û(ζ) e^{i(xξ+yη)}`. Samples live at `x_j = 2πj/n_x`,
//! `y_k = 2πk/n_y`.
//!
//! Storage order (both for coefficients and samples): flat index
//! `i = ix·n_y + iy`, x outermost. Along an axis of length n the array index
//! `k` holds frequency `k` for `k ≤ n/2` and `k − n` otherwise, so each axis
//! covers `[−n/2 + 1, n/2]`. The same order is used by the NVF1 snapshot
//! format.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use nv_core::{phase, phase_modified, FrequencyPair, PhaseParams};
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{LabError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `(2π)²`, the area of the torus.
pub const TORUS_AREA: f64 = 4.0 * PI * PI;

/// Mode counts of a square-period torus discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct TorusGrid {
    nx: usize,
    ny: usize,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct GridRepr {
    nx: usize,
    ny: usize,
}

impl TryFrom<GridRepr> for TorusGrid {
    type Error = LabError;
    fn try_from(g: GridRepr) -> Result<Self> {
        TorusGrid::new(g.nx, g.ny)
    }
}

impl From<TorusGrid> for GridRepr {
    fn from(g: TorusGrid) -> Self {
        GridRepr { nx: g.nx, ny: g.ny }
    }
}

impl TorusGrid {
    /// Both mode counts must be even and at least 8.
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        for n in [nx, ny] {
            if n < 8 || n % 2 != 0 {
                return Err(LabError::InvalidGrid(format!("mode count {n} must be even and >= 8")));
            }
            if n > 1 << 14 {
                return Err(LabError::InvalidGrid(format!("mode count {n} is too large")));
            }
        }
        Ok(TorusGrid { nx, ny })
    }

    pub fn square(n: usize) -> Result<Self> {
        TorusGrid::new(n, n)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn axis_freq(k: usize, n: usize) -> i64 {
        if k <= n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    fn axis_index(f: i64, n: usize) -> Option<usize> {
        let h = (n / 2) as i64;
        if f > h || f <= -h {
            return None;
        }
        Some(if f >= 0 { f as usize } else { (f + n as i64) as usize })
    }

    /// Frequency stored at flat index `i`.
    pub fn frequency(&self, i: usize) -> FrequencyPair {
        FrequencyPair::new(Self::axis_freq(i / self.ny, self.nx), Self::axis_freq(i % self.ny, self.ny))
    }

    /// Flat index of `ζ`, if it belongs to the grid's frequency set.
    pub fn index(&self, z: FrequencyPair) -> Option<usize> {
        Some(Self::axis_index(z.xi, self.nx)? * self.ny + Self::axis_index(z.eta, self.ny)?)
    }

    pub fn contains(&self, z: FrequencyPair) -> bool {
        self.index(z).is_some()
    }

    /// All grid frequencies in storage order.
    pub fn frequencies(&self) -> impl Iterator<Item = FrequencyPair> + '_ {
        (0..self.len()).map(move |i| self.frequency(i))
    }

    /// Modes without a conjugate partner on the grid.
    pub fn is_nyquist(&self, z: FrequencyPair) -> bool {
        z.xi == (self.nx / 2) as i64 || z.eta == (self.ny / 2) as i64
    }

    /// Modes kept by the two-thirds rule: `|ξ| ≤ n_x/3` and `|η| ≤ n_y/3`.
    pub fn in_dealias_set(&self, z: FrequencyPair) -> bool {
        3 * z.xi.unsigned_abs() as usize <= self.nx && 3 * z.eta.unsigned_abs() as usize <= self.ny
    }

    /// Physical sample coordinates `(x_j, y_k)` in storage order.
    pub fn point(&self, i: usize) -> (f64, f64) {
        let hx = 2.0 * PI / self.nx as f64;
        let hy = 2.0 * PI / self.ny as f64;
        ((i / self.ny) as f64 * hx, (i % self.ny) as f64 * hy)
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(LabError::GridMismatch(self.nx, self.ny, other.nx, other.ny))
        }
    }
}

/// Fourier coefficients of a field at one instant.
///
/// Invariants: a field flagged `mean_zero` has `û(0,0) = 0` exactly; a field
/// flagged `real_valued` is conjugate symmetric and has zero Nyquist rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeff: Vec<Complex64>,
    real_valued: bool,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        SpectralField { grid, coeff: vec![ZERO; grid.len()], real_valued: true }
    }

    /// Wraps raw coefficients in storage order. The result is not tagged real.
    pub fn from_coefficients(grid: TorusGrid, coeff: Vec<Complex64>) -> Result<Self> {
        if coeff.len() != grid.len() {
            return Err(LabError::ShapeMismatch { expected: grid.len(), got: coeff.len() });
        }
        Ok(SpectralField { grid, coeff, real_valued: false })
    }

    /// A field with the listed coefficients; repeated frequencies add up.
    pub fn from_modes(grid: TorusGrid, modes: &[(FrequencyPair, Complex64)]) -> Result<Self> {
        let mut coeff = vec![ZERO; grid.len()];
        for &(z, c) in modes {
            let i = grid.index(z).ok_or_else(|| LabError::SupportOverflow(format!("mode {z} is not on the grid")))?;
            coeff[i] += c;
        }
        SpectralField::from_coefficients(grid, coeff)
    }

    pub fn single_mode(grid: TorusGrid, z: FrequencyPair, c: Complex64) -> Result<Self> {
        SpectralField::from_modes(grid, &[(z, c)])
    }

    /// Tags the field as real valued after zeroing Nyquist rows and
    /// replacing each coefficient pair by its conjugate-symmetric part.
    pub fn into_real(mut self) -> Self {
        let g = self.grid;
        for i in 0..g.len() {
            let z = g.frequency(i);
            if g.is_nyquist(z) {
                self.coeff[i] = ZERO;
                continue;
            }
            let j = g.index(-z).expect("non-Nyquist modes have partners");
            if i < j {
                let s = 0.5 * (self.coeff[i] + self.coeff[j].conj());
                self.coeff[i] = s;
                self.coeff[j] = s.conj();
            } else if i == j {
                self.coeff[i] = Complex64::new(self.coeff[i].re, 0.0);
            }
        }
        self.real_valued = true;
        self
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeff
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeff
    }

    /// Coefficient at `ζ`, zero off the grid.
    pub fn coeff(&self, z: FrequencyPair) -> Complex64 {
        self.grid.index(z).map_or(ZERO, |i| self.coeff[i])
    }

    pub fn mean_coefficient(&self) -> Complex64 {
        self.coeff[0]
    }

    pub fn is_mean_zero(&self) -> bool {
        self.coeff[0] == ZERO
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub(crate) fn with_real_flag(mut self, real: bool) -> Self {
        self.real_valued = real;
        self
    }

    /// The field with `û(0,0)` set to zero, and the removed coefficient.
    pub fn project_mean(&self) -> (SpectralField, Complex64) {
        let mut out = self.clone();
        let m = out.coeff[0];
        out.coeff[0] = ZERO;
        (out, m)
    }

    /// Pointwise map over (frequency, coefficient). Drops the real tag.
    pub fn map(&self, mut f: impl FnMut(FrequencyPair, Complex64) -> Complex64) -> SpectralField {
        let coeff = self.coeff.iter().enumerate().map(|(i, &c)| f(self.grid.frequency(i), c)).collect();
        SpectralField { grid: self.grid, coeff, real_valued: false }
    }

    pub fn scale(&self, s: Complex64) -> SpectralField {
        let real = self.real_valued && s.im == 0.0;
        SpectralField { grid: self.grid, coeff: self.coeff.iter().map(|c| c * s).collect(), real_valued: real }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &SpectralField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<SpectralField> {
        self.grid.check_same(&other.grid)?;
        let coeff = self.coeff.iter().zip(&other.coeff).map(|(&a, &b)| f(a, b)).collect();
        Ok(SpectralField { grid: self.grid, coeff, real_valued: self.real_valued && other.real_valued })
    }

    /// `Σ|û(ζ)|²`.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.coeff.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `max |û(−ζ) − conj(û(ζ))|` over modes with a partner on the grid.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let z = g.frequency(i);
            if let Some(j) = g.index(-z) {
                worst = worst.max((self.coeff[j] - self.coeff[i].conj()).norm());
            }
        }
        worst
    }

    /// `max |û(ζ)|` over the modes outside the two-thirds set.
    pub fn dealias_tail(&self) -> f64 {
        let g = self.grid;
        self.coeff
            .iter()
            .enumerate()
            .filter(|(i, _)| !g.in_dealias_set(g.frequency(*i)))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeff.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Multiplies every coefficient by `symbol(ζ)`.
pub fn apply_multiplier(u: &SpectralField, symbol: impl Fn(FrequencyPair) -> Complex64) -> SpectralField {
    u.map(|z, c| symbol(z) * c)
}

/// The phase `θ(ζ)` seen by mode ζ: φ or φ̃, and 0 at the origin.
pub fn linear_phase(z: FrequencyPair, p: PhaseParams) -> f64 {
    if z.is_zero() {
        return 0.0;
    }
    if p.is_plain() {
        phase(z).expect("grid frequencies are small") as f64
    } else {
        phase_modified(z, p).expect("nonzero frequency")
    }
}

/// `e^{−itφ(D)}u`, with φ̃ in place of φ when `p.phi0 ≠ 0`. The zero mode is
/// left unchanged.
pub fn free_evolve(u: &SpectralField, t: f64, p: PhaseParams) -> SpectralField {
    let real = u.real_valued;
    let mut out = u.map(|z, c| c * Complex64::from_polar(1.0, -t * linear_phase(z, p)));
    out.real_valued = real;
    out
}

/// Two-thirds-rule truncation: zeroes modes with `|ξ| > n_x/3` or `|η| > n_y/3`.
pub fn dealias(u: &SpectralField) -> SpectralField {
    let g = u.grid;
    let mut out = u.clone();
    dealias_in_place(g, &mut out.coeff);
    out
}

pub(crate) fn dealias_in_place(g: TorusGrid, coeff: &mut [Complex64]) {
    let (kx, ky) = ((g.nx / 3) as i64, (g.ny / 3) as i64);
    for (i, c) in coeff.iter_mut().enumerate() {
        let z = g.frequency(i);
        if z.xi.abs() > kx || z.eta.abs() > ky {
            *c = ZERO;
        }
    }
}

pub(crate) fn zero_nyquist_in_place(g: TorusGrid, coeff: &mut [Complex64]) {
    for (i, c) in coeff.iter_mut().enumerate() {
        if g.is_nyquist(g.frequency(i)) {
            *c = ZERO;
        }
    }
}

type PlanKey = (usize, bool);
type PlanCache = (FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>);

thread_local! {
    static PLANS: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|p| {
        let (planner, cache) = &mut *p.borrow_mut();
        cache
            .entry((n, forward))
            .or_insert_with(|| {
                let dir = if forward { FftDirection::Forward } else { FftDirection::Inverse };
                planner.plan_fft(n, dir)
            })
            .clone()
    })
}

/// Unnormalized 2D FFT in place, in storage order.
pub(crate) fn fft2(g: TorusGrid, data: &mut [Complex64], forward: bool) {
    let (nx, ny) = (g.nx, g.ny);
    let fy = plan(ny, forward);
    let fx = plan(nx, forward);
    let len = fy.get_inplace_scratch_len().max(fx.get_inplace_scratch_len());
    let mut scratch = vec![ZERO; len];
    fy.process_with_scratch(data, &mut scratch);
    let mut t = vec![ZERO; nx * ny];
    for ix in 0..nx {
        for iy in 0..ny {
            t[iy * nx + ix] = data[ix * ny + iy];
        }
    }
    fx.process_with_scratch(&mut t, &mut scratch);
    for iy in 0..ny {
        for ix in 0..nx {
            data[ix * ny + iy] = t[iy * nx + ix];
        }
    }
}

/// Coefficients to samples at the grid points, in place.
pub(crate) fn to_physical_in_place(g: TorusGrid, data: &mut [Complex64]) {
    fft2(g, data, false);
}

/// Samples to coefficients, in place.
pub(crate) fn from_physical_in_place(g: TorusGrid, data: &mut [Complex64]) {
    fft2(g, data, true);
    let s = 1.0 / g.len() as f64;
    for c in data.iter_mut() {
        *c *= s;
    }
}

/// Samples of `u` at the grid points, in storage order.
pub fn to_physical(u: &SpectralField) -> Vec<Complex64> {
    let mut d = u.coeff.clone();
    to_physical_in_place(u.grid, &mut d);
    d
}

pub fn from_physical(grid: TorusGrid, samples: &[Complex64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(LabError::ShapeMismatch { expected: grid.len(), got: samples.len() });
    }
    let mut d = samples.to_vec();
    from_physical_in_place(grid, &mut d);
    SpectralField::from_coefficients(grid, d)
}

/// Transforms real samples and tags the result real valued.
pub fn from_real_physical(grid: TorusGrid, samples: &[f64]) -> Result<SpectralField> {
    let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(from_physical(grid, &c)?.into_real())
}

/// Samples `f(x, y)` at the grid points.
pub fn sample(grid: TorusGrid, f: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
    (0..grid.len())
        .map(|i| {
            let (x, y) = grid.point(i);
            f(x, y)
        })
        .collect()
}

const MAGIC: &[u8; 4] = b"NVF1";
const FLAG_MEAN_ZERO: u8 = 1;
const FLAG_REAL: u8 = 2;

/// Writes an NVF1 snapshot: magic, `u32` LE n_x and n_y, a flag byte
/// (bit 0 mean zero, bit 1 real valued), then the coefficients as LE `f64`
/// (re, im) pairs in storage order.
pub fn write_nvf1(u: &SpectralField, mut w: impl Write) -> Result<()> {
    let mut buf = Vec::with_capacity(13 + 16 * u.coeff.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(u.grid.nx as u32).to_le_bytes());
    buf.extend_from_slice(&(u.grid.ny as u32).to_le_bytes());
    let mut flag = 0;
    if u.is_mean_zero() {
        flag |= FLAG_MEAN_ZERO;
    }
    if u.real_valued {
        flag |= FLAG_REAL;
    }
    buf.push(flag);
    for c in &u.coeff {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_nvf1(mut r: impl Read) -> Result<SpectralField> {
    let mut head = [0u8; 13];
    r.read_exact(&mut head).map_err(|e| LabError::Format(format!("truncated header: {e}")))?;
    if &head[..4] != MAGIC {
        return Err(LabError::Format("bad magic".into()));
    }
    let nx = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let ny = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let flag = head[12];
    if flag & !(FLAG_MEAN_ZERO | FLAG_REAL) != 0 {
        return Err(LabError::Format(format!("unknown flag bits {flag:#04x}")));
    }
    let grid = TorusGrid::new(nx, ny)?;
    let mut body = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut body).map_err(|e| LabError::Format(format!("truncated body: {e}")))?;
    let coeff: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|b| {
            Complex64::new(f64::from_le_bytes(b[..8].try_into().unwrap()), f64::from_le_bytes(b[8..].try_into().unwrap()))
        })
        .collect();
    let u = SpectralField::from_coefficients(grid, coeff)?;
    if flag & FLAG_MEAN_ZERO != 0 && !u.is_mean_zero() {
        return Err(LabError::Format("mean-zero flag set but zero mode is nonzero".into()));
    }
    if flag & FLAG_REAL != 0 {
        if u.conjugate_symmetry_defect() != 0.0 || grid.frequencies().zip(&u.coeff).any(|(z, c)| grid.is_nyquist(z) && *c != ZERO) {
            return Err(LabError::Format("real flag set but coefficients are not conjugate symmetric".into()));
        }
        return Ok(u.with_real_flag(true));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(n: usize) -> TorusGrid {
        TorusGrid::square(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(grid: TorusGrid, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeff = (0..grid.len()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        SpectralField::from_coefficients(grid, coeff).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(6, 8).is_err());
        assert!(TorusGrid::new(8, 9).is_err());
        assert!(TorusGrid::new(8, 10).is_ok());
    }

    #[test]
    fn index_round_trip_and_frequency_set() {
        let grid = TorusGrid::new(8, 12).unwrap();
        for i in 0..grid.len() {
            assert_eq!(grid.index(grid.frequency(i)), Some(i));
        }
        assert_eq!(grid.frequency(0), FrequencyPair::ZERO);
        assert_eq!(grid.frequency(1), FrequencyPair::new(0, 1));
        assert_eq!(grid.frequency(12), FrequencyPair::new(1, 0));
        assert_eq!(grid.frequency(4 * 12 + 6), FrequencyPair::new(4, 6));
        assert_eq!(grid.frequency(5 * 12 + 7), FrequencyPair::new(-3, -5));
        assert!(grid.index(FrequencyPair::new(-4, 0)).is_none());
        assert!(grid.index(FrequencyPair::new(5, 0)).is_none());
        let xs: Vec<i64> = (0..8).map(|ix| grid.frequency(ix * 12).xi).collect();
        assert_eq!(xs, [0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn single_mode_samples() {
        let grid = g(8);
        let u = SpectralField::single_mode(grid, FrequencyPair::new(1, 0), c(1.0, 0.0)).unwrap();
        let s = to_physical(&u);
        for (i, v) in s.iter().enumerate() {
            let (x, _) = grid.point(i);
            assert!((v - Complex64::from_polar(1.0, x)).norm() < 1e-15);
        }
        let u = SpectralField::single_mode(grid, FrequencyPair::new(-2, 3), c(0.5, -1.0)).unwrap();
        let s = to_physical(&u);
        for (i, v) in s.iter().enumerate() {
            let (x, y) = grid.point(i);
            assert!((v - c(0.5, -1.0) * Complex64::from_polar(1.0, -2.0 * x + 3.0 * y)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_round_trip() {
        let grid = g(8);
        let z = SpectralField::zeros(grid);
        let s = to_physical(&z);
        assert!(s.iter().all(|v| *v == ZERO));
        assert_eq!(from_physical(grid, &s).unwrap().coefficients(), z.coefficients());
    }

    #[test]
    fn round_trip_and_parseval() {
        for (n, seed) in [(8, 1), (16, 2), (32, 3), (64, 4)] {
            let grid = TorusGrid::new(n, n + 2 * (seed as usize % 2) * 4).unwrap();
            let u = random_field(grid, seed);
            let s = to_physical(&u);
            let back = from_physical(grid, &s).unwrap();
            let err: f64 = back.sub(&u).unwrap().coefficient_norm_sq().sqrt();
            assert!(err / u.coefficient_norm_sq().sqrt() < 1e-13);
            let quad: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() * TORUS_AREA / grid.len() as f64;
            let spec = TORUS_AREA * u.coefficient_norm_sq();
            assert!((quad - spec).abs() / spec < 1e-13);
        }
    }

    #[test]
    fn shape_mismatch() {
        assert!(matches!(from_physical(g(8), &[ZERO; 10]), Err(LabError::ShapeMismatch { .. })));
    }

    #[test]
    fn multiplier_examples() {
        let grid = g(8);
        let u = random_field(grid, 9);
        assert_eq!(apply_multiplier(&u, |_| c(1.0, 0.0)).coefficients(), u.coefficients());
        let m = SpectralField::single_mode(grid, FrequencyPair::new(0, 1), c(2.0, 0.0)).unwrap();
        let out = apply_multiplier(&m, nv_core::dbar_inv_d);
        assert_eq!(out.coeff(FrequencyPair::new(0, 1)), c(-2.0, 0.0));
        let (u0, _) = u.project_mean();
        let out = apply_multiplier(&u0, nv_core::dbar_inv_d);
        assert!((out.coefficient_norm_sq() - u0.coefficient_norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn free_evolution() {
        let grid = g(16);
        let u = random_field(grid, 5);
        let p = PhaseParams::PLAIN;
        assert_eq!(free_evolve(&u, 0.0, p).coefficients(), u.coefficients());
        let m = SpectralField::single_mode(grid, FrequencyPair::new(1, 0), c(1.0, 0.0)).unwrap();
        let out = free_evolve(&m, PI, p);
        assert!((out.coeff(FrequencyPair::new(1, 0)) - c(-1.0, 0.0)).norm() < 1e-15);
        for t in [0.3, -2.0, 17.5] {
            let v = free_evolve(&u, t, p);
            assert!((v.coefficient_norm_sq() - u.coefficient_norm_sq()).abs() < 1e-12);
        }
        let ab = free_evolve(&free_evolve(&u, 0.7, p), 1.9, p);
        let direct = free_evolve(&u, 2.6, p);
        // phases reach |φ| ~ 10³ on this grid, so t·φ carries ~1e-13 rounding
        let tol = 1e-11 * u.coefficient_norm_sq().sqrt();
        assert!(ab.sub(&direct).unwrap().coefficient_norm_sq().sqrt() < tol);
        let period = free_evolve(&u, 2.0 * PI, p);
        assert!(period.sub(&u).unwrap().coefficient_norm_sq().sqrt() < 1e-12 * u.coefficient_norm_sq().sqrt() * 100.0);
        let q = PhaseParams::new(0.4);
        assert_eq!(free_evolve(&u, 3.0, q).coeff(FrequencyPair::ZERO), u.coeff(FrequencyPair::ZERO));
    }

    #[test]
    fn dealias_examples() {
        let grid = g(16);
        let inside = SpectralField::single_mode(grid, FrequencyPair::new(5, -5), c(1.0, 0.0)).unwrap();
        assert_eq!(dealias(&inside), inside);
        let nyq = SpectralField::single_mode(grid, FrequencyPair::new(8, 0), c(1.0, 0.0)).unwrap();
        assert_eq!(dealias(&nyq).coefficient_norm_sq(), 0.0);
        let u = random_field(grid, 3);
        assert_eq!(dealias(&dealias(&u)), dealias(&u));
    }

    #[test]
    fn real_projection() {
        let grid = g(16);
        let u = random_field(grid, 7).into_real();
        assert_eq!(u.conjugate_symmetry_defect(), 0.0);
        let s = to_physical(&u);
        assert!(s.iter().all(|v| v.im.abs() < 1e-14));
        let x: Vec<f64> = s.iter().map(|v| v.re).collect();
        let back = from_real_physical(grid, &x).unwrap();
        assert!(back.sub(&u).unwrap().coefficient_norm_sq().sqrt() < 1e-13);
    }

    #[test]
    fn nvf1_round_trip() {
        let grid = TorusGrid::new(8, 10).unwrap();
        let (u, _) = random_field(grid, 11).into_real().project_mean();
        let u = u.with_real_flag(true);
        let mut buf = Vec::new();
        write_nvf1(&u, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"NVF1");
        assert_eq!(buf[12], 3);
        assert_eq!(buf.len(), 13 + 16 * 80);
        let back = read_nvf1(&buf[..]).unwrap();
        assert_eq!(back, u);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_nvf1(&bad[..]).is_err());
        assert!(read_nvf1(&buf[..40]).is_err());
    }
}
