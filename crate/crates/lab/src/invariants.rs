//! Conserved-quantity monitors, the scaling harness and the Miura check.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use nv_core::{dbar_inv_d, d_inv_dbar, FrequencyPair, PhaseParams};
use serde::Serialize;

use crate::error::{positive, LabError, Result};
use crate::evolution::{integrate_fixed, Model, NvModel, Scheme, Stepper};
use crate::nonlinearity::{tables, Tables};
use crate::torus::{dealias_in_place, free_evolve, from_physical_in_place, to_physical_in_place, SpectralField, TorusGrid, TORUS_AREA};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `∫u = (2π)²·û(0,0)`.
pub fn mean_functional(u: &SpectralField) -> Complex64 {
    TORUS_AREA * u.mean_coefficient()
}

/// `∫u·∂̄⁻¹∂u = (2π)² Σ û(−ζ)·μ(ζ)·û(ζ)`, with μ the symbol of ∂̄⁻¹∂. Bilinear,
/// not sesquilinear, and not definite.
pub fn l2_pairing(u: &SpectralField) -> Complex64 {
    let g = u.grid();
    let c = u.coefficients();
    let mut s = ZERO;
    for (i, z) in g.frequencies().enumerate() {
        if c[i] == ZERO {
            continue;
        }
        if let Some(j) = g.index(-z) {
            s += c[j] * dbar_inv_d(z) * c[i];
        }
    }
    TORUS_AREA * s
}

/// `‖u‖_{L²(T²)} = 2π·(Σ|û|²)^{1/2}`.
pub fn l2_norm(u: &SpectralField) -> f64 {
    TORUS_AREA.sqrt() * u.coefficient_norm_sq().sqrt()
}

/// `2π·(Σ⟨ζ⟩²|û|²)^{1/2}`, the norm watched for blow-up.
pub fn h1_proxy(u: &SpectralField) -> f64 {
    let g = u.grid();
    let s: f64 = g.frequencies().zip(u.coefficients()).map(|(z, c)| (1.0 + z.norm_sq() as f64) * c.norm_sqr()).sum();
    TORUS_AREA.sqrt() * s.sqrt()
}

/// `max |û(−ζ) − conj(û(ζ))|`.
pub fn realness_defect(u: &SpectralField) -> f64 {
    u.conjugate_symmetry_defect()
}

/// `(2π)² Σ_{ζ≠0} |ζ|^{2s}|û(ζ)|²`.
pub fn homogeneous_sobolev_sq(u: &SpectralField, s: f64) -> f64 {
    let g = u.grid();
    TORUS_AREA
        * g.frequencies()
            .zip(u.coefficients())
            .filter(|(z, _)| !z.is_zero())
            .map(|(z, c)| (z.norm_sq() as f64).powf(s) * c.norm_sqr())
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub l2_norm: f64,
    pub h1_proxy: f64,
    pub mean: Complex64,
    pub pairing: Complex64,
    pub realness_defect: f64,
}

pub fn diagnostics(u: &SpectralField, step: usize, t: f64, dt: f64) -> DiagnosticRecord {
    DiagnosticRecord {
        step,
        t,
        dt,
        l2_norm: l2_norm(u),
        h1_proxy: h1_proxy(u),
        mean: mean_functional(u),
        pairing: l2_pairing(u),
        realness_defect: realness_defect(u),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticRecord>,
}

impl DiagnosticsSeries {
    pub fn push(&mut self, r: DiagnosticRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `max_t |P(u(t)) − P(u(0))| / |P(u(0))|`.
    pub fn pairing_drift(&self) -> f64 {
        let Some(first) = self.records.first() else { return 0.0 };
        let p0 = first.pairing;
        let worst = self.records.iter().map(|r| (r.pairing - p0).norm()).fold(0.0, f64::max);
        if p0.norm() > 0.0 {
            worst / p0.norm()
        } else {
            worst
        }
    }

    /// Writes the series as CSV with one row per record.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "step", "t", "dt", "l2_norm", "h1_proxy", "mean_re", "mean_im", "pairing_re", "pairing_im", "realness_defect",
        ])?;
        for r in &self.records {
            out.write_record(&[
                r.step.to_string(),
                r.t.to_string(),
                r.dt.to_string(),
                r.l2_norm.to_string(),
                r.h1_proxy.to_string(),
                r.mean.re.to_string(),
                r.mean.im.to_string(),
                r.pairing.re.to_string(),
                r.pairing.im.to_string(),
                r.realness_defect.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `u_λ(x, y) = λ²u(λx, λy)`: moves `û(ζ)` to `λ²û(ζ)` at `λζ`.
pub fn scaling_transform(u: &SpectralField, lambda: u32) -> Result<SpectralField> {
    scaling_into(u, lambda, u.grid())
}

/// As [`scaling_transform`], placing the result on `target`.
pub fn scaling_into(u: &SpectralField, lambda: u32, target: TorusGrid) -> Result<SpectralField> {
    if lambda == 0 {
        return Err(LabError::Precondition("lambda must be at least 1".into()));
    }
    let l = lambda as i64;
    let s = (lambda * lambda) as f64;
    let g = u.grid();
    let mut out = vec![ZERO; target.len()];
    for (z, &c) in g.frequencies().zip(u.coefficients()) {
        if c == ZERO {
            continue;
        }
        let lz = FrequencyPair::new(z.xi * l, z.eta * l);
        let j = target.index(lz).ok_or_else(|| LabError::SupportOverflow(format!("dilated mode {lz} is off the grid")))?;
        out[j] = s * c;
    }
    Ok(SpectralField::from_coefficients(target, out)?.with_real_flag(u.is_real_valued()))
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub parameters: serde_json::Value,
    /// `(t, e)` samples along the finest run.
    pub error_series: Vec<(f64, f64)>,
    /// Step sizes of the refinement ladder, coarsest first.
    pub dt_list: Vec<f64>,
    /// Final discrepancy per step size.
    pub final_errors: Vec<f64>,
    /// `log₂(e(dt)/e(dt/2))` for consecutive ladder entries.
    pub refinement_orders: Vec<f64>,
    pub notes: Vec<String>,
    pub pass: bool,
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn rel_diff(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    let d = a.sub(b)?.coefficient_norm_sq().sqrt();
    let n = a.coefficient_norm_sq().sqrt();
    Ok(if n > 0.0 { d / n } else { d })
}

/// Settings of the scaling harness.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct ScalingConfig {
    /// Grid of the dilated run; the undilated run uses `n/λ`.
    pub grid: TorusGrid,
    pub lambda: u32,
    pub t: f64,
    /// Finest step; the ladder is `dt·2^k` for `k = levels−1, …, 0`.
    pub dt: f64,
    pub levels: usize,
    pub scheme: Scheme,
    /// Required discrepancy at the finest step.
    pub tolerance: f64,
    #[serde(default)]
    pub linear_only: bool,
}

/// Compares `v(t)` started from `u₀,λ` with `(u(λ³t))_λ`.
///
/// The undilated run uses the grid `n/λ`, whose two-thirds set dilates into
/// the two-thirds set of `n`; the two Galerkin systems then correspond
/// exactly and `d` measures time discretization error only. Both runs use
/// the same step. With `linear_only` both sides are exact free evolutions.
pub fn scaling_symmetry_check(u0: &SpectralField, cfg: &ScalingConfig) -> Result<CheckReport> {
    let l = cfg.lambda;
    if l == 0 || cfg.grid.nx() % l as usize != 0 || cfg.grid.ny() % l as usize != 0 {
        return Err(LabError::Precondition("grid size must be divisible by lambda".into()));
    }
    let small = TorusGrid::new(cfg.grid.nx() / l as usize, cfg.grid.ny() / l as usize)?;
    small.check_same(&u0.grid())?;
    if !u0.is_mean_zero() {
        return Err(LabError::Precondition("datum must have zero mean".into()));
    }
    let l3 = (l * l * l) as f64;
    let v0 = scaling_into(u0, l, cfg.grid)?;
    let params = serde_json::to_value(cfg)?;
    let mut notes = vec![format!("undilated run on {}x{}", small.nx(), small.ny())];
    if cfg.linear_only {
        let p = PhaseParams::PLAIN;
        let v = free_evolve(&v0, cfg.t, p);
        let u = free_evolve(u0, l3 * cfg.t, p);
        let d = rel_diff(&v, &scaling_into(&u, l, cfg.grid)?)?;
        notes.push("free evolution on both sides".into());
        return Ok(CheckReport {
            check_name: "scaling_symmetry_linear".into(),
            parameters: params,
            error_series: vec![(cfg.t, d)],
            dt_list: vec![],
            final_errors: vec![d],
            refinement_orders: vec![],
            notes,
            pass: d < cfg.tolerance,
        });
    }
    if cfg.levels == 0 {
        return Err(LabError::Precondition("at least one refinement level".into()));
    }
    let mv = NvModel::new(cfg.grid, true, PhaseParams::PLAIN);
    let mu = NvModel::new(small, true, PhaseParams::PLAIN);
    let mut dts = Vec::new();
    let mut errs = Vec::new();
    for k in (0..cfg.levels).rev() {
        let dt = cfg.dt * (1u64 << k) as f64;
        let nv = (cfg.t / dt).round() as usize;
        let nu = (l3 * cfg.t / dt).round() as usize;
        let v = integrate_fixed(&mv, &v0, cfg.t, nv.max(1), cfg.scheme)?;
        let u = integrate_fixed(&mu, u0, l3 * cfg.t, nu.max(1), cfg.scheme)?;
        dts.push(dt);
        errs.push(rel_diff(&v, &scaling_into(&u, l, cfg.grid)?)?);
    }
    let ord = orders(&errs);
    let d = *errs.last().unwrap();
    let p = cfg.scheme.order() as f64;
    // below ~1e-12 the discrepancy is rounding and orders carry no information
    let ordered = ord.iter().zip(&errs[1..]).all(|(o, e)| *e < 1e-12 || *o > p - 1.0);
    Ok(CheckReport {
        check_name: "scaling_symmetry".into(),
        parameters: params,
        error_series: vec![(cfg.t, d)],
        dt_list: dts,
        final_errors: errs,
        refinement_orders: ord,
        notes,
        pass: d < cfg.tolerance && ordered,
    })
}

/// Symbol of ∂ = ½(∂ₓ − i∂ᵧ).
pub fn d_symbol(z: FrequencyPair) -> Complex64 {
    Complex64::new(z.eta as f64, z.xi as f64) * 0.5
}

/// Symbol of ∂̄ = ½(∂ₓ + i∂ᵧ).
pub fn dbar_symbol(z: FrequencyPair) -> Complex64 {
    Complex64::new(-(z.eta as f64), z.xi as f64) * 0.5
}

/// Precomputed multiplier tables for the mNV terms.
#[derive(Debug)]
struct WirtingerTables {
    base: Arc<Tables>,
    d: Vec<Complex64>,
    db: Vec<Complex64>,
    s: Vec<Complex64>,
    sb: Vec<Complex64>,
    lin: Vec<Complex64>,
}

impl WirtingerTables {
    fn new(grid: TorusGrid) -> Self {
        let f = |sym: fn(FrequencyPair) -> Complex64| grid.frequencies().map(sym).collect::<Vec<_>>();
        let d = f(d_symbol);
        let db = f(dbar_symbol);
        let lin = d.iter().zip(&db).map(|(a, b)| a * a * a + b * b * b).collect();
        WirtingerTables { base: tables(grid), d, db, s: f(dbar_inv_d), sb: f(d_inv_dbar), lin }
    }

    fn grid(&self) -> TorusGrid {
        self.base.grid
    }

    fn apply(&self, spec: &[Complex64], sym: &[Complex64]) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = spec.iter().zip(sym).map(|(a, b)| a * b).collect();
        to_physical_in_place(self.grid(), &mut c);
        c
    }

    fn spectral(&self, mut phys: Vec<Complex64>) -> Vec<Complex64> {
        from_physical_in_place(self.grid(), &mut phys);
        phys
    }
}

/// Which cubic term the mNV right side uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MnvForm {
    /// `(∂v)·∂̄⁻¹∂|v|² + (∂̄v)·∂⁻¹∂̄|v|² + v∂⁻¹∂̄(v̄∂̄v) + v∂̄⁻¹∂(v̄∂v)`, the form
    /// under which the Miura image of a solution solves NV.
    Miura,
    /// `∂(v∂̄⁻¹∂|v|²) + ∂̄(v∂⁻¹∂̄|v|²) + v∂⁻¹∂̄(v̄∂̄v) + v∂̄⁻¹∂(v̄∂v)`.
    AsDisplayed,
}

/// The cubic term, spectral in and out. Products are formed on the grid;
/// with `dealias` input and output are truncated by the two-thirds rule.
fn cubic_raw(w: &WirtingerTables, v: &[Complex64], form: MnvForm, dealias: bool) -> Vec<Complex64> {
    let g = w.grid();
    let mut v = v.to_vec();
    if dealias {
        dealias_in_place(g, &mut v);
    }
    let one = vec![Complex64::new(1.0, 0.0); g.len()];
    let vp = w.apply(&v, &one);
    let dv = w.apply(&v, &w.d);
    let dbv = w.apply(&v, &w.db);
    let abs2: Vec<Complex64> = vp.iter().map(|x| Complex64::new(x.norm_sqr(), 0.0)).collect();
    let a = w.spectral(abs2);
    let s_a = w.apply(&a, &w.s);
    let sb_a = w.apply(&a, &w.sb);
    let vb_dbv = w.spectral(vp.iter().zip(&dbv).map(|(x, y)| x.conj() * y).collect());
    let vb_dv = w.spectral(vp.iter().zip(&dv).map(|(x, y)| x.conj() * y).collect());
    let t3 = w.apply(&vb_dbv, &w.sb);
    let t4 = w.apply(&vb_dv, &w.s);
    let n = g.len();
    let mut out = match form {
        MnvForm::Miura => {
            let p: Vec<Complex64> = (0..n).map(|i| dv[i] * s_a[i] + dbv[i] * sb_a[i] + vp[i] * (t3[i] + t4[i])).collect();
            w.spectral(p)
        }
        MnvForm::AsDisplayed => {
            let f1 = w.spectral((0..n).map(|i| vp[i] * s_a[i]).collect());
            let f2 = w.spectral((0..n).map(|i| vp[i] * sb_a[i]).collect());
            let rest = w.spectral((0..n).map(|i| vp[i] * (t3[i] + t4[i])).collect());
            (0..n).map(|i| w.d[i] * f1[i] + w.db[i] * f2[i] + rest[i]).collect()
        }
    };
    if dealias {
        dealias_in_place(g, &mut out);
    }
    out
}

fn mnv_rhs_with(v: &SpectralField, form: MnvForm) -> Result<SpectralField> {
    let w = WirtingerTables::new(v.grid());
    let cubic = cubic_raw(&w, v.coefficients(), form, false);
    let out = v.coefficients().iter().zip(&w.lin).zip(&cubic).map(|((c, l), t)| -(l * c) - 3.0 * t).collect();
    SpectralField::from_coefficients(v.grid(), out)
}

/// `∂ₜv = −(∂³ + ∂̄³)v − 3T(v)` with the cubic term in the form under which
/// the Miura map carries solutions to NV solutions (see [`MnvForm::Miura`]).
/// Nonlocal inverses drop the mean of their argument.
pub fn mnv_rhs(v: &SpectralField) -> Result<SpectralField> {
    mnv_rhs_with(v, MnvForm::Miura)
}

/// The same right side with the cubic term exactly as displayed in the
/// reference form, kept for comparison.
pub fn mnv_rhs_as_displayed(v: &SpectralField) -> Result<SpectralField> {
    mnv_rhs_with(v, MnvForm::AsDisplayed)
}

/// mNV in solver units: for `V(s) = v(−4s)`, `∂ₛV̂ = −iφV̂ + 12·T̂(V)`.
#[derive(Debug)]
pub struct MnvModel {
    w: WirtingerTables,
    form: MnvForm,
    dealias: bool,
}

impl MnvModel {
    pub fn new(grid: TorusGrid, form: MnvForm, dealias: bool) -> Self {
        MnvModel { w: WirtingerTables::new(grid), form, dealias }
    }
}

impl Model for MnvModel {
    fn grid(&self) -> TorusGrid {
        self.w.grid()
    }

    fn phase(&self, z: FrequencyPair) -> f64 {
        crate::torus::linear_phase(z, PhaseParams::PLAIN)
    }

    fn nonlinear(&self, u: &[Complex64], out: &mut [Complex64]) {
        let c = cubic_raw(&self.w, u, self.form, self.dealias);
        for (o, x) in out.iter_mut().zip(c) {
            *o = 12.0 * x;
        }
    }
}

/// `M(v) = |v|² − i∂v`, formed on the grid. The mean is kept.
pub fn miura_map(v: &SpectralField) -> Result<SpectralField> {
    let g = v.grid();
    let mut p = v.coefficients().to_vec();
    to_physical_in_place(g, &mut p);
    let mut a: Vec<Complex64> = p.iter().map(|x| Complex64::new(x.norm_sqr(), 0.0)).collect();
    from_physical_in_place(g, &mut a);
    let out = g
        .frequencies()
        .zip(a)
        .zip(v.coefficients())
        .map(|((z, a), c)| a - Complex64::new(0.0, 1.0) * d_symbol(z) * c)
        .collect();
    SpectralField::from_coefficients(g, out)
}

/// `max |Im ∂v|` over the grid points.
pub fn check_dbar_reality(v: &SpectralField) -> f64 {
    let g = v.grid();
    let mut c: Vec<Complex64> = g.frequencies().zip(v.coefficients()).map(|(z, c)| d_symbol(z) * c).collect();
    to_physical_in_place(g, &mut c);
    c.iter().map(|x| x.im.abs()).fold(0.0, f64::max)
}

/// Settings of the Miura consistency check.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct MiuraConfig {
    pub grid: TorusGrid,
    /// Final time in solver units.
    pub t_end: f64,
    /// Coarsest step; the ladder halves it `levels − 1` times.
    pub dt: f64,
    pub levels: usize,
    pub scheme: Scheme,
    #[serde(default = "miura_form_default")]
    pub form: MnvForm,
    #[serde(default)]
    pub dealias: bool,
    /// Accepted band for the observed orders, around the scheme order.
    #[serde(default = "order_slack_default")]
    pub order_slack: f64,
}

fn miura_form_default() -> MnvForm {
    MnvForm::Miura
}

fn order_slack_default() -> f64 {
    1.0
}

/// Evolves `V` under mNV and `W` under NV from the mean-projected
/// `12·M(V₀)`, and measures `e(s) = ‖P₀(12·M(V(s))) − W(s)‖/‖W(s)‖`.
///
/// Solver units: with `v` the mNV solution and `U = M(v)` the NV solution in
/// the displayed normalization, `V(s) = v(−4s)` and `w(s) = 12·U(−4s)` share
/// the phase `e^{−isφ}`. The mean `c` of `M(V₀)` is conserved and is carried
/// by the NV solver through the mean-shifted phase with `φ₀ = −4c`.
pub fn miura_consistency_check(v0: &SpectralField, cfg: &MiuraConfig) -> Result<CheckReport> {
    let g = cfg.grid;
    g.check_same(&v0.grid())?;
    if cfg.levels == 0 || !positive(cfg.dt) || !positive(cfg.t_end) {
        return Err(LabError::Config("need a positive step, final time and at least one level".into()));
    }
    let defect = check_dbar_reality(v0);
    if defect > 1e-12 {
        return Err(LabError::Precondition(format!("datum violates the reality constraint on its derivative: {defect:.3e}")));
    }
    let mut notes = Vec::new();
    let m0 = miura_map(v0)?;
    let (w0, mean) = m0.project_mean();
    notes.push(format!("projected mean of M(v0): {:.6e}{:+.6e}i", mean.re, mean.im));
    let w0 = w0.scale(Complex64::new(12.0, 0.0));
    let params = serde_json::to_value(cfg)?;
    if w0.coefficient_norm_sq() == 0.0 {
        let zero = v0.coefficient_norm_sq() == 0.0;
        if !zero {
            notes.push("datum maps to a constant: nothing to compare after mean projection".into());
        }
        return Ok(CheckReport {
            check_name: "miura_consistency".into(),
            parameters: params,
            error_series: vec![(0.0, 0.0), (cfg.t_end, 0.0)],
            dt_list: vec![],
            final_errors: vec![0.0],
            refinement_orders: vec![],
            notes,
            pass: zero,
        });
    }
    let phi0 = PhaseParams::new(-4.0 * mean.re);
    let nv = NvModel::new(g, cfg.dealias, phi0);
    let mnv = MnvModel::new(g, cfg.form, cfg.dealias);
    let mut dts = Vec::new();
    let mut errs = Vec::new();
    let mut series = Vec::new();
    let mut max_defect: f64 = 0.0;
    for k in 0..cfg.levels {
        let dt = cfg.dt / (1u64 << k) as f64;
        let steps = (cfg.t_end / dt).round().max(1.0) as usize;
        let h = cfg.t_end / steps as f64;
        let mut sv = Stepper::new(&mnv, cfg.scheme);
        let mut sw = Stepper::new(&nv, cfg.scheme);
        let mut v = v0.coefficients().to_vec();
        let mut w = w0.coefficients().to_vec();
        let finest = k + 1 == cfg.levels;
        let mut e = 0.0;
        for n in 1..=steps {
            v = sv.step_raw(&v, h);
            w = sw.step_raw(&w, h);
            if finest || n == steps {
                let vf = SpectralField::from_coefficients(g, v.clone())?;
                let wf = SpectralField::from_coefficients(g, w.clone())?;
                if !vf.is_finite() || !wf.is_finite() {
                    return Err(LabError::Numeric("non-finite state in Miura check".into()));
                }
                let (mv, _) = miura_map(&vf)?.project_mean();
                let diff = mv.scale(Complex64::new(12.0, 0.0)).sub(&wf)?.coefficient_norm_sq().sqrt();
                e = diff / wf.coefficient_norm_sq().sqrt();
                if finest {
                    series.push((n as f64 * h, e));
                    max_defect = max_defect.max(check_dbar_reality(&vf));
                }
            }
        }
        dts.push(h);
        errs.push(e);
    }
    notes.push(format!("max |Im dv| along the finest run: {max_defect:.3e}"));
    let ord = orders(&errs);
    let p = cfg.scheme.order() as f64;
    let pass = !ord.is_empty() && ord.iter().all(|o| (o - p).abs() <= cfg.order_slack);
    Ok(CheckReport {
        check_name: "miura_consistency".into(),
        parameters: params,
        error_series: series,
        dt_list: dts,
        final_errors: errs,
        refinement_orders: ord,
        notes,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{from_physical, sample, to_physical};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fp(x: i64, y: i64) -> FrequencyPair {
        FrequencyPair::new(x, y)
    }

    fn field(grid: TorusGrid, f: impl Fn(f64, f64) -> Complex64) -> SpectralField {
        from_physical(grid, &sample(grid, f)).unwrap()
    }

    #[test]
    fn mean_examples() {
        let grid = TorusGrid::square(8).unwrap();
        assert_eq!(mean_functional(&SpectralField::zeros(grid)), ZERO);
        let k = SpectralField::single_mode(grid, FrequencyPair::ZERO, c(0.5, 0.0)).unwrap();
        assert_eq!(mean_functional(&k), c(0.5 * TORUS_AREA, 0.0));
    }

    #[test]
    fn pairing_examples() {
        let grid = TorusGrid::square(8).unwrap();
        let cosx = SpectralField::from_modes(grid, &[(fp(1, 0), c(1.0, 0.0)), (fp(-1, 0), c(1.0, 0.0))]).unwrap();
        assert!((l2_pairing(&cosx) - c(2.0 * TORUS_AREA, 0.0)).norm() < 1e-12);
        let cosy = SpectralField::from_modes(grid, &[(fp(0, 1), c(1.0, 0.0)), (fp(0, -1), c(1.0, 0.0))]).unwrap();
        assert!((l2_pairing(&cosy) - c(-2.0 * TORUS_AREA, 0.0)).norm() < 1e-12);
        assert_eq!(l2_pairing(&SpectralField::zeros(grid)), ZERO);
    }

    #[test]
    fn scaling_examples() {
        let grid = TorusGrid::square(16).unwrap();
        let u = SpectralField::single_mode(grid, fp(1, 0), c(1.0, 0.0)).unwrap();
        assert_eq!(scaling_transform(&u, 1).unwrap(), u);
        let s = scaling_transform(&u, 2).unwrap();
        assert_eq!(s.coeff(fp(2, 0)), c(4.0, 0.0));
        assert_eq!(s.coefficient_norm_sq(), 16.0);
        let wide = SpectralField::single_mode(grid, fp(5, 0), c(1.0, 0.0)).unwrap();
        assert!(matches!(scaling_transform(&wide, 2), Err(LabError::SupportOverflow(_))));
    }

    #[test]
    fn homogeneous_norm_under_dilation() {
        let grid = TorusGrid::square(32).unwrap();
        let u = SpectralField::from_modes(grid, &[(fp(1, 2), c(0.3, 0.1)), (fp(-3, 1), c(-0.2, 0.5))]).unwrap();
        for lambda in [2u32, 3, 4] {
            let s = scaling_transform(&u, lambda).unwrap();
            let l2 = (lambda * lambda) as f64;
            // the dilated field repeats λ² times in each period, so the
            // per-period value of the critical norm is the invariant one
            let ratio = homogeneous_sobolev_sq(&s, -1.0) / homogeneous_sobolev_sq(&u, -1.0);
            assert!((ratio - l2).abs() < 1e-12 * l2);
            let r0 = homogeneous_sobolev_sq(&s, 0.0) / homogeneous_sobolev_sq(&u, 0.0);
            assert!((r0 - l2 * l2).abs() < 1e-10);
        }
    }

    #[test]
    fn phase_homogeneity_exhaustive() {
        for lambda in 1..=6i64 {
            for xi in -60..=60 {
                for eta in -60..=60 {
                    let z = fp(xi, eta);
                    let lz = fp(lambda * xi, lambda * eta);
                    assert_eq!(nv_core::phase(lz).unwrap(), lambda.pow(3) * nv_core::phase(z).unwrap());
                }
            }
        }
    }

    #[test]
    fn miura_examples() {
        let grid = TorusGrid::square(16).unwrap();
        let k = SpectralField::single_mode(grid, FrequencyPair::ZERO, c(1.5, 0.0)).unwrap();
        let m = miura_map(&k).unwrap();
        assert!((m.coeff(FrequencyPair::ZERO) - c(2.25, 0.0)).norm() < 1e-14);
        assert!(m.coefficient_norm_sq() - 2.25 * 2.25 < 1e-26);
        let v = field(grid, |x, _| c(x.cos(), 0.0));
        let m = miura_map(&v).unwrap();
        let expect = field(grid, |x, _| c(x.cos().powi(2), 0.5 * x.sin()));
        assert!(m.sub(&expect).unwrap().coefficient_norm_sq().sqrt() < 1e-14);
        assert_eq!(miura_map(&SpectralField::zeros(grid)).unwrap().coefficient_norm_sq(), 0.0);
    }

    #[test]
    fn miura_splits_into_square_and_derivative() {
        let grid = TorusGrid::square(16).unwrap();
        let v = field(grid, |x, y| c((x + 2.0 * y).sin(), (x - y).cos() * 0.3));
        let m = miura_map(&v).unwrap();
        let p = to_physical(&v);
        let sq = from_physical(grid, &p.iter().map(|z| c(z.norm_sqr(), 0.0)).collect::<Vec<_>>()).unwrap();
        let lin = m.sub(&sq).unwrap();
        let expect = v.map(|z, c| -Complex64::new(0.0, 1.0) * d_symbol(z) * c);
        assert!(lin.sub(&expect).unwrap().coefficient_norm_sq().sqrt() < 1e-14);
    }

    #[test]
    fn reality_constraint_examples() {
        let grid = TorusGrid::square(16).unwrap();
        assert!(check_dbar_reality(&field(grid, |x, _| c(x.cos() + (2.0 * x).sin(), 0.0))) < 1e-14);
        let e = SpectralField::single_mode(grid, fp(1, 0), c(1.0, 0.0)).unwrap();
        assert!((check_dbar_reality(&e) - 0.5).abs() < 1e-14);
        let v = field(grid, |x, y| c(x.cos() * y.cos(), -x.sin() * y.sin()));
        assert!(check_dbar_reality(&v) < 1e-14);
    }

    #[test]
    fn mnv_linear_part_matches_the_rescaled_phase() {
        let grid = TorusGrid::square(16).unwrap();
        for z in [fp(1, 0), fp(2, 3), fp(-1, 4)] {
            let u = SpectralField::single_mode(grid, z, c(1e-8, 0.0)).unwrap();
            let r = mnv_rhs(&u).unwrap();
            let phi = nv_core::phase(z).unwrap() as f64;
            // ∂³ + ∂̄³ ↔ −(i/4)φ, so the linear part of ∂ₜv is (i/4)φ·v
            let expect = c(0.0, 0.25 * phi) * 1e-8;
            assert!((r.coeff(z) - expect).norm() < 1e-20);
        }
        assert_eq!(mnv_rhs(&SpectralField::zeros(grid)).unwrap().coefficient_norm_sq(), 0.0);
    }

    #[test]
    fn miura_image_solves_nv_at_the_level_of_the_right_side() {
        // d/dt M(v) = v̄·vₜ + v·conj(vₜ) − i∂vₜ must equal the NV right side
        // (i/4)φ·U − 3N(U) at U = M(v), up to the constant mean.
        let grid = TorusGrid::square(32).unwrap();
        let v = field(grid, |x, y| c(x.cos() * y.cos(), -x.sin() * y.sin()) * 0.7);
        let check = |rhs: SpectralField| {
            let vp = to_physical(&v);
            let rp = to_physical(&rhs);
            let prod: Vec<Complex64> = vp.iter().zip(&rp).map(|(a, b)| a.conj() * b + a * b.conj()).collect();
            let mut dm = from_physical(grid, &prod).unwrap();
            dm = dm.add(&rhs.map(|z, c| -Complex64::new(0.0, 1.0) * d_symbol(z) * c)).unwrap();
            let u = miura_map(&v).unwrap();
            let n = crate::nonlinearity::nonlinearity_direct(&u.project_mean().0, false).unwrap();
            let nvr = u.map(|z, c| Complex64::new(0.0, 0.25 * nv_core::phase(z).unwrap() as f64) * c);
            // the mean of U also enters N through u·Pu
            let shift = u.mean_coefficient();
            let corr = u.map(|z, c| {
                if z.is_zero() {
                    ZERO
                } else {
                    Complex64::new(0.0, nv_core::phase(z).unwrap() as f64 / z.norm_sq() as f64) * shift * c
                }
            });
            let target = nvr.sub(&n.add(&corr).unwrap().scale(c(3.0, 0.0))).unwrap();
            let (diff, _) = dm.sub(&target).unwrap().project_mean();
            diff.coefficient_norm_sq().sqrt() / target.coefficient_norm_sq().sqrt()
        };
        assert!(check(mnv_rhs(&v).unwrap()) < 1e-12);
        assert!(check(mnv_rhs_as_displayed(&v).unwrap()) > 1e-3);
    }

    #[test]
    fn mean_shift_enters_as_modified_phase() {
        // N(W + m) = N(W) + m·(iφ/|ζ|²)Ŵ and φ̃ with φ₀ = −m/3 absorbs it
        let grid = TorusGrid::square(16).unwrap();
        let w = field(grid, |x, y| c((x + y).sin() * 0.3, 0.0)).into_real();
        let m = 0.4;
        let shifted = w.add(&SpectralField::single_mode(grid, FrequencyPair::ZERO, c(m, 0.0)).unwrap()).unwrap();
        let full = crate::nonlinearity::nonlinearity_direct(&shifted, false).unwrap();
        let base = crate::nonlinearity::nonlinearity_direct(&w, false).unwrap();
        let p = PhaseParams::new(-m / 3.0);
        for (z, (a, b)) in grid.frequencies().zip(full.coefficients().iter().zip(base.coefficients())) {
            if z.is_zero() {
                continue;
            }
            let lin_plain = -Complex64::new(0.0, nv_core::phase(z).unwrap() as f64) * w.coeff(z);
            let lin_mod = -Complex64::new(0.0, nv_core::phase_modified(z, p).unwrap()) * w.coeff(z);
            assert!(((lin_plain + a) - (lin_mod + b)).norm() < 1e-13);
        }
    }

    #[test]
    fn miura_check_trivial_data() {
        let grid = TorusGrid::square(16).unwrap();
        let cfg = MiuraConfig {
            grid,
            t_end: 0.01,
            dt: 0.005,
            levels: 2,
            scheme: Scheme::Etdrk4,
            form: MnvForm::Miura,
            dealias: false,
            order_slack: 1.0,
        };
        let r = miura_consistency_check(&SpectralField::zeros(grid), &cfg).unwrap();
        assert!(r.pass);
        assert!(r.error_series.iter().all(|(_, e)| *e == 0.0));
        let k = SpectralField::single_mode(grid, FrequencyPair::ZERO, c(2.0, 0.0)).unwrap();
        let r = miura_consistency_check(&k, &cfg).unwrap();
        assert!(!r.pass);
        assert!(r.notes.iter().any(|n| n.contains("constant")));
        let bad = SpectralField::single_mode(grid, fp(1, 0), c(1.0, 0.0)).unwrap();
        assert!(matches!(miura_consistency_check(&bad, &cfg), Err(LabError::Precondition(_))));
    }

    #[test]
    fn diagnostics_csv_header() {
        let grid = TorusGrid::square(8).unwrap();
        let mut s = DiagnosticsSeries::default();
        s.push(diagnostics(&SpectralField::zeros(grid), 0, 0.0, 0.0));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,t,dt,l2_norm,h1_proxy,mean_re,mean_im,pairing_re,pairing_im,realness_defect\n"));
        assert_eq!(text.lines().count(), 2);
        let _ = PI;
    }
}
