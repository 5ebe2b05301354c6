//! Time stepping for `∂ₜû = −iθ(ζ)û + N̂(u)` on the torus.
//!
//! The free part `e^{−itφ(D)}` is integrated exactly, so the solver
//! advances `∂ₜu + (∂ₓ³ − 3∂ₓ∂ᵧ²)u = N(u)` up to the reflection
//! `u(t) ↦ −u(−t)`, which maps solutions of one sign convention to the other.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use nv_core::{FrequencyPair, PhaseParams};
use serde::{Deserialize, Serialize};

use crate::error::{positive, LabError, Result};
use crate::invariants::{diagnostics, DiagnosticsSeries};
use crate::nonlinearity::{nonlinearity_raw, tables, Tables};
use crate::torus::{dealias_in_place, linear_phase, zero_nyquist_in_place, SpectralField, TorusGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Fourth-order exponential time differencing Runge–Kutta.
    Etdrk4,
    /// Strang splitting with an explicit midpoint nonlinear step (order 2).
    Splitstep2,
}

impl Scheme {
    pub fn order(self) -> i32 {
        match self {
            Scheme::Etdrk4 => 4,
            Scheme::Splitstep2 => 2,
        }
    }
}

/// A semilinear evolution `∂ₜû = −iθ(ζ)û + F̂(u)`.
pub trait Model: Sync {
    fn grid(&self) -> TorusGrid;
    /// The phase θ(ζ) of the linear part.
    fn phase(&self, z: FrequencyPair) -> f64;
    /// Writes `F̂(u)` to `out`.
    fn nonlinear(&self, u: &[Complex64], out: &mut [Complex64]);
}

/// The NV model `θ = φ` (or φ̃), `F = N`.
#[derive(Debug, Clone)]
pub struct NvModel {
    tables: Arc<Tables>,
    dealias: bool,
    phase: PhaseParams,
    nonlinear: bool,
    zero_nyquist: bool,
}

impl NvModel {
    pub fn new(grid: TorusGrid, dealias: bool, phase: PhaseParams) -> Self {
        NvModel { tables: tables(grid), dealias, phase, nonlinear: true, zero_nyquist: false }
    }

    /// Drops the nonlinear term, leaving the free evolution.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Zeroes Nyquist rows after every nonlinear evaluation.
    pub fn with_zero_nyquist(mut self, on: bool) -> Self {
        self.zero_nyquist = on;
        self
    }
}

impl Model for NvModel {
    fn grid(&self) -> TorusGrid {
        self.tables.grid
    }

    fn phase(&self, z: FrequencyPair) -> f64 {
        linear_phase(z, self.phase)
    }

    fn nonlinear(&self, u: &[Complex64], out: &mut [Complex64]) {
        if !self.nonlinear {
            out.fill(ZERO);
            return;
        }
        nonlinearity_raw(&self.tables, u, self.dealias, out);
        if self.zero_nyquist {
            zero_nyquist_in_place(self.tables.grid, out);
        }
    }
}

/// `φ₁, φ₂, φ₃` at `z`, with `φₖ(z) = Σⱼ zʲ/(j+k)!`.
///
/// The series is used for `|z| < 1`, the closed forms otherwise.
pub fn phi_functions(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1.0 {
        let mut out = [ZERO; 3];
        for (k, o) in out.iter_mut().enumerate() {
            // Horner on Σ_{j<30} zʲ/(j+k+1)!
            let mut acc = ZERO;
            for j in (0..30).rev() {
                acc = acc * z / (j + k + 2) as f64 + 1.0;
            }
            let mut fact = 1.0;
            for m in 1..=(k + 1) {
                fact *= m as f64;
            }
            *o = acc / fact;
        }
        out
    } else {
        let e = z.exp();
        let one = Complex64::new(1.0, 0.0);
        let p1 = (e - one) / z;
        let p2 = (e - one - z) / (z * z);
        let p3 = (e - one - z - z * z / 2.0) / (z * z * z);
        [p1, p2, p3]
    }
}

/// Per-mode exponential weights for one step size.
#[derive(Debug)]
struct Weights {
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl Weights {
    fn new(theta: &[f64], h: f64) -> Self {
        let n = theta.len();
        let mut w = Weights {
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &th in theta {
            let z = Complex64::new(0.0, -th * h);
            let [p1, p2, p3] = phi_functions(z);
            let [h1, _, _] = phi_functions(z / 2.0);
            w.e.push(Complex64::from_polar(1.0, -th * h));
            w.e2.push(Complex64::from_polar(1.0, -th * h / 2.0));
            w.q.push(h1 * (h / 2.0));
            w.f1.push((p1 - 3.0 * p2 + 4.0 * p3) * h);
            w.f2.push((p2 - 2.0 * p3) * h);
            w.f3.push((4.0 * p3 - p2) * h);
        }
        w
    }
}

/// Stepper with cached weights for the step sizes it has seen.
pub struct Stepper<'m, M: Model> {
    model: &'m M,
    scheme: Scheme,
    theta: Vec<f64>,
    cache: HashMap<u64, Arc<Weights>>,
}

impl<'m, M: Model> Stepper<'m, M> {
    pub fn new(model: &'m M, scheme: Scheme) -> Self {
        let theta = model.grid().frequencies().map(|z| model.phase(z)).collect();
        Stepper { model, scheme, theta, cache: HashMap::new() }
    }

    fn weights(&mut self, h: f64) -> Arc<Weights> {
        let theta = &self.theta;
        self.cache.entry(h.to_bits()).or_insert_with(|| Arc::new(Weights::new(theta, h))).clone()
    }

    /// Advances raw coefficients by `h` (which may be negative).
    pub fn step_raw(&mut self, u: &[Complex64], h: f64) -> Vec<Complex64> {
        let w = self.weights(h);
        let n = u.len();
        let f = |v: &[Complex64]| {
            let mut out = vec![ZERO; n];
            self.model.nonlinear(v, &mut out);
            out
        };
        match self.scheme {
            Scheme::Etdrk4 => {
                let nu = f(u);
                let a: Vec<Complex64> = (0..n).map(|i| w.e2[i] * u[i] + w.q[i] * nu[i]).collect();
                let na = f(&a);
                let b: Vec<Complex64> = (0..n).map(|i| w.e2[i] * u[i] + w.q[i] * na[i]).collect();
                let nb = f(&b);
                let c: Vec<Complex64> = (0..n).map(|i| w.e2[i] * a[i] + w.q[i] * (2.0 * nb[i] - nu[i])).collect();
                let nc = f(&c);
                (0..n)
                    .map(|i| w.e[i] * u[i] + w.f1[i] * nu[i] + 2.0 * w.f2[i] * (na[i] + nb[i]) + w.f3[i] * nc[i])
                    .collect()
            }
            Scheme::Splitstep2 => {
                let a: Vec<Complex64> = (0..n).map(|i| w.e2[i] * u[i]).collect();
                let na = f(&a);
                let mid: Vec<Complex64> = (0..n).map(|i| a[i] + 0.5 * h * na[i]).collect();
                let nm = f(&mid);
                (0..n).map(|i| w.e2[i] * (a[i] + h * nm[i])).collect()
            }
        }
    }

    pub fn step(&mut self, u: &SpectralField, h: f64) -> Result<SpectralField> {
        self.model.grid().check_same(&u.grid())?;
        let out = self.step_raw(u.coefficients(), h);
        let real = u.is_real_valued();
        let out = SpectralField::from_coefficients(u.grid(), out)?.with_real_flag(real);
        if !out.is_finite() {
            return Err(LabError::Numeric("non-finite coefficient after step".into()));
        }
        Ok(out)
    }
}

/// One ETDRK4 step of `model`.
pub fn step_etdrk4<M: Model>(model: &M, u: &SpectralField, dt: f64) -> Result<SpectralField> {
    Stepper::new(model, Scheme::Etdrk4).step(u, dt)
}

/// One Strang split step of `model`.
pub fn step_splitstep2<M: Model>(model: &M, u: &SpectralField, dt: f64) -> Result<SpectralField> {
    Stepper::new(model, Scheme::Splitstep2).step(u, dt)
}

/// Advances `u` over the signed time span `t` in `steps` equal steps.
pub fn integrate_fixed<M: Model>(model: &M, u: &SpectralField, t: f64, steps: usize, scheme: Scheme) -> Result<SpectralField> {
    if steps == 0 {
        return Err(LabError::Precondition("at least one step".into()));
    }
    let mut st = Stepper::new(model, scheme);
    let h = t / steps as f64;
    let mut c = u.coefficients().to_vec();
    for _ in 0..steps {
        c = st.step_raw(&c, h);
    }
    let out = SpectralField::from_coefficients(u.grid(), c)?.with_real_flag(u.is_real_valued());
    if !out.is_finite() {
        return Err(LabError::Numeric("non-finite coefficient".into()));
    }
    Ok(out)
}

/// The fixed smooth datum used by the convergence tests: a real, mean-zero
/// field with `û(ζ) = (A/4)·e^{−(ξ²+3η²)/4}·e^{iθ(ζ)}` for `1 ≤ |ζ|² ≤ 18`,
/// where `θ(ζ) = ξ + 2η` makes it Hermitian. The anisotropy keeps the
/// pairing functional away from zero. Its sup norm is of order `A`.
pub fn standard_datum(grid: TorusGrid, amplitude: f64) -> SpectralField {
    SpectralField::zeros(grid)
        .map(|z, _| {
            let r2 = z.norm_sq();
            if r2 == 0 || r2 > 18 || !grid.in_dealias_set(z) {
                return Complex64::new(0.0, 0.0);
            }
            let theta = z.xi as f64 + 2.0 * z.eta as f64;
            let w = (z.xi * z.xi + 3 * z.eta * z.eta) as f64;
            Complex64::from_polar(amplitude * (-w / 4.0).exp() / 4.0, theta)
        })
        .into_real()
}

/// Self-convergence ratio `‖u_h − u_{h/2}‖ / ‖u_{h/2} − u_{h/4}‖` of fixed-step
/// runs to time `t` with coarse step count `steps`; ≈ 2^p for a method of
/// order p in its asymptotic range.
pub fn richardson_ratio<M: Model>(model: &M, u0: &SpectralField, t: f64, steps: usize, scheme: Scheme) -> Result<f64> {
    let a = integrate_fixed(model, u0, t, steps, scheme)?;
    let b = integrate_fixed(model, u0, t, 2 * steps, scheme)?;
    let c = integrate_fixed(model, u0, t, 4 * steps, scheme)?;
    let num = a.sub(&b)?.coefficient_norm_sq().sqrt();
    let den = b.sub(&c)?.coefficient_norm_sq().sqrt();
    if den == 0.0 {
        return Err(LabError::Numeric("finest differences vanish; ratio undefined".into()));
    }
    Ok(num / den)
}

fn default_true() -> bool {
    true
}

fn default_threshold() -> f64 {
    1e10
}

fn default_tolerance() -> f64 {
    1e-8
}

/// Simulation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: TorusGrid,
    pub t_end: f64,
    /// Initial (or fixed) step.
    pub dt: f64,
    pub scheme: Scheme,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default)]
    pub adaptive: bool,
    /// Relative per-step tolerance of the step-doubling controller.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Run stops once the H¹ proxy norm exceeds this.
    #[serde(default = "default_threshold")]
    pub blowup_norm_threshold: f64,
    /// Keep a snapshot every this many accepted steps; 0 keeps the first and last only.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub phase_params: PhaseParams,
}

impl SimConfig {
    pub fn new(grid: TorusGrid, t_end: f64, dt: f64, scheme: Scheme) -> Self {
        SimConfig {
            grid,
            t_end,
            dt,
            scheme,
            dealias: true,
            adaptive: false,
            tolerance: default_tolerance(),
            blowup_norm_threshold: default_threshold(),
            snapshot_every: 0,
            phase_params: PhaseParams::PLAIN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::Config(m.into()));
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be finite and >= 0");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if self.t_end > 0.0 && self.dt > self.t_end * (1.0 + 1e-12) {
            return bad("dt must not exceed t_end");
        }
        if !positive(self.blowup_norm_threshold) || !positive(self.tolerance) {
            return bad("thresholds must be positive");
        }
        if !self.phase_params.phi0.is_finite() {
            return bad("phi0 must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowupDetected,
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Snapshot times, strictly increasing from 0.
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    /// One record per accepted step, plus the initial state.
    pub diagnostics: DiagnosticsSeries,
    pub terminated_by: Termination,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        self.diagnostics.records.last().map_or(0.0, |r| r.t)
    }
}

/// Integrates the NV model from a mean-zero datum.
pub fn simulate(u0: &SpectralField, cfg: &SimConfig) -> Result<Trajectory> {
    if !u0.is_mean_zero() {
        return Err(LabError::Precondition("initial datum must have zero mean".into()));
    }
    let model = NvModel::new(cfg.grid, cfg.dealias, cfg.phase_params).with_zero_nyquist(u0.is_real_valued());
    simulate_model(&model, u0, cfg)
}

/// Integrates an arbitrary model. With `cfg.dealias` the datum is truncated
/// to the two-thirds set first.
pub fn simulate_model<M: Model>(model: &M, u0: &SpectralField, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    cfg.grid.check_same(&u0.grid())?;
    model.grid().check_same(&u0.grid())?;
    let mut u = u0.clone();
    if cfg.dealias {
        let real = u.is_real_valued();
        let mut c = u.into_coefficients();
        dealias_in_place(cfg.grid, &mut c);
        u = SpectralField::from_coefficients(cfg.grid, c)?.with_real_flag(real);
    }
    let mut st = Stepper::new(model, cfg.scheme);
    let mut series = DiagnosticsSeries::default();
    series.push(diagnostics(&u, 0, 0.0, 0.0));
    let mut traj = Trajectory { times: vec![0.0], states: vec![u.clone()], diagnostics: series, terminated_by: Termination::Completed };
    let mut t = 0.0;
    let mut dt = cfg.dt;
    let mut step = 0usize;
    let min_dt = 1e-12 * cfg.t_end;
    let order = cfg.scheme.order();
    let finish_eps = 1e-12 * cfg.t_end.max(cfg.dt);
    while cfg.t_end - t > finish_eps {
        let h = dt.min(cfg.t_end - t);
        let next = if cfg.adaptive {
            let big = st.step(&u, h)?;
            let half = st.step(&u, h / 2.0)?;
            let small = st.step(&half, h / 2.0)?;
            let scale = small.coefficient_norm_sq().sqrt().max(f64::MIN_POSITIVE);
            let err = small.sub(&big)?.coefficient_norm_sq().sqrt() / scale;
            if !err.is_finite() {
                return Err(LabError::Numeric("non-finite error estimate".into()));
            }
            if err > cfg.tolerance {
                dt = h / 2.0;
                if dt < min_dt {
                    traj.terminated_by = Termination::StepUnderflow;
                    break;
                }
                continue;
            }
            if err < cfg.tolerance / 2f64.powi(order + 1) {
                dt = 2.0 * h;
            }
            small
        } else {
            st.step(&u, h)?
        };
        step += 1;
        t = if cfg.t_end - (t + h) <= finish_eps { cfg.t_end } else { t + h };
        u = next;
        let rec = diagnostics(&u, step, t, h);
        let blown = rec.h1_proxy > cfg.blowup_norm_threshold;
        traj.diagnostics.push(rec);
        let done = cfg.t_end - t <= finish_eps;
        if blown || done || (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) {
            traj.times.push(t);
            traj.states.push(u.clone());
        }
        if blown {
            traj.terminated_by = Termination::BlowupDetected;
            break;
        }
    }
    Ok(traj)
}
