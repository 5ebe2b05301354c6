//! Quantitative acceptance criteria 1-11. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails or overruns its time budget.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use nv_core::kform::kform_report;
use nv_core::lattice::{brute, count, count_cubic, sigma1_count, Curve, CurveSpec, HalfPoint, Window};
use nv_core::symbol::verify_m_r_identity;
use nv_core::{phase, FrequencyPair, PhaseParams};
use nv_lab::cli::{admissible_datum, MiuraFile, ScalingFile};
use nv_lab::evolution::{richardson_ratio, simulate, standard_datum, NvModel, Scheme, SimConfig};
use nv_lab::invariants::{miura_consistency_check, scaling_symmetry_check, ScalingConfig};
use nv_lab::probe::{bilinear_free_norm, probe_estimate, quadrature_oracle, DataFamily, ProbeConfig};
use nv_lab::sweep::hyperbola_sweep;
use nv_lab::torus::{SpectralField, TorusGrid};
use nv_lab::verify::{random_pairs, verify_dual_path, verify_resonance_consistency};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn grid(n: usize) -> TorusGrid {
    TorusGrid::square(n).expect("valid grid")
}

fn c1_identity() -> Outcome {
    let r = verify_m_r_identity(random_pairs(100_000, 1000, 1)).map_err(err)?;
    let pass = r.pass && r.max_deviation < 1e-12;
    Ok((pass, format!("{} pairs, max relative deviation {:.2e}, exact failures {}", r.samples, r.max_deviation, r.exact_failures)))
}

fn c2_resonance() -> Outcome {
    let r = verify_resonance_consistency(50).map_err(err)?;
    Ok((r.pass, format!("{} pairs, {} mismatches", r.checked, r.mismatches)))
}

fn c3_dual_path() -> Outcome {
    let r = verify_dual_path(grid(16), 100, 3, 1e-12).map_err(err)?;
    Ok((r.pass, format!("100 field pairs at 16x16, max relative deviation {:.2e}", r.max_relative_deviation)))
}

fn c4_conservation() -> Outcome {
    let g = grid(64);
    let run = |amp: f64, dt: f64| simulate(&standard_datum(g, amp), &SimConfig::new(g, 0.1, dt, Scheme::Etdrk4)).map_err(err);
    let tr = run(1e-2, 1e-3)?;
    let mean_exact =
        tr.diagnostics.records.iter().all(|r| r.mean == ZERO) && tr.states.iter().all(|s| s.mean_coefficient() == ZERO);
    let drift = tr.diagnostics.pairing_drift();
    // at amplitude 1e-2 the drift sits at rounding level, so the refinement
    // ratio is taken where the time-stepping error dominates
    let d1 = run(3.0, 1e-3)?.diagnostics.pairing_drift();
    let d2 = run(3.0, 5e-4)?.diagnostics.pairing_drift();
    let ratio = d1 / d2;
    let pass = mean_exact && drift < 1e-6 && (12.0..=20.0).contains(&ratio);
    Ok((
        pass,
        format!("mean coefficient exactly zero: {mean_exact}; drift {drift:.2e} at amplitude 1e-2; dt-halving ratio {ratio:.2} at amplitude 3"),
    ))
}

fn c5_orders() -> Outcome {
    let g = grid(64);
    let u0 = standard_datum(g, 1.0);
    let m = NvModel::new(g, true, PhaseParams::PLAIN).with_zero_nyquist(true);
    let e = richardson_ratio(&m, &u0, 0.1, 50, Scheme::Etdrk4).map_err(err)?;
    let s = richardson_ratio(&m, &u0, 0.1, 50, Scheme::Splitstep2).map_err(err)?;
    let pass = (12.0..=20.0).contains(&e) && (3.5..=4.5).contains(&s);
    Ok((pass, format!("etdrk4 ratio {e:.3}, splitstep2 ratio {s:.3}")))
}

fn c6_scaling() -> Outcome {
    let file = ScalingFile::default();
    let cfg = &file.scaling;
    let l = cfg.lambda as usize;
    let small = TorusGrid::new(cfg.grid.nx() / l, cfg.grid.ny() / l).map_err(err)?;
    let u0 = file.datum.build(small).map_err(err)?;
    let r = scaling_symmetry_check(&u0, cfg).map_err(err)?;
    let d = r.final_errors.last().copied().unwrap_or(f64::NAN);
    let lin_cfg = ScalingConfig { linear_only: true, tolerance: 1e-13, ..cfg.clone() };
    let lin = scaling_symmetry_check(&u0, &lin_cfg).map_err(err)?;
    let dl = lin.final_errors.iter().copied().fold(0.0, f64::max);
    let homogeneous = (1..=8i64).into_par_iter().all(|lambda| {
        (-200..=200i64).all(|xi| {
            (-200..=200i64).all(|eta| {
                phase(FrequencyPair::new(lambda * xi, lambda * eta)).unwrap()
                    == lambda.pow(3) * phase(FrequencyPair::new(xi, eta)).unwrap()
            })
        })
    });
    let pass = r.pass && d < 1e-6 && lin.pass && dl <= 1e-13 && homogeneous;
    let orders: Vec<String> = r.refinement_orders.iter().map(|o| format!("{o:.2}")).collect();
    Ok((
        pass,
        format!("d = {d:.2e} at 128x128 (orders {}); linear-only d = {dl:.1e}; phi homogeneity exhaustive on |coords| <= 200: {homogeneous}", orders.join(", ")),
    ))
}

fn c7_miura() -> Outcome {
    let file = MiuraFile::default();
    let v0 = admissible_datum(file.miura.grid, file.amplitude).map_err(err)?;
    let r = miura_consistency_check(&v0, &file.miura).map_err(err)?;
    let errors: Vec<String> = r.final_errors.iter().map(|e| format!("{e:.2e}")).collect();
    let orders: Vec<String> = r.refinement_orders.iter().map(|o| format!("{o:.2}")).collect();
    Ok((r.pass, format!("e(t_end) [{}]; orders [{}]", errors.join(", "), orders.join(", "))))
}

fn random_point(w: &Window, rng: &mut ChaCha8Rng) -> (i64, i64) {
    let (x0, x1) = w.x_range();
    loop {
        let x = rng.random_range(x0..=x1);
        if let Some((y0, y1)) = w.y_range(x).filter(|(y0, y1)| y0 <= y1) {
            return (x, rng.random_range(y0..=y1));
        }
    }
}

/// Window side: the first draws take the full 2000, the rest are log-uniform
/// so brute force stays within budget while every scale is visited.
fn draw_side(i: usize, rng: &mut ChaCha8Rng) -> i64 {
    if i < 8 {
        2000
    } else {
        (2000f64.ln() * rng.random::<f64>()).exp().round().max(1.0) as i64
    }
}

fn draw_curve(family: usize, i: usize, rng: &mut ChaCha8Rng) -> CurveSpec {
    let side = draw_side(i, rng);
    let square = Window::square(rng.random_range(-200..=200), rng.random_range(-200..=200), side).expect("valid square");
    match family {
        0 => loop {
            let (a, b) = (rng.random_range(-50..=50i64), rng.random_range(-50..=50i64));
            let (x, y) = random_point(&square, rng);
            let c = a * (x * x - y * y) + 2 * b * x * y;
            if c != 0 && (a, b) != (0, 0) {
                return CurveSpec::new(Curve::Hyperbola { a, b, c }, square);
            }
        },
        1 => CurveSpec::new(Curve::Cubic { a: rng.random_range(-50..=50), b: rng.random_range(-50..=50) }, square),
        2 => {
            let center = HalfPoint::from_doubled(rng.random_range(-100..=100), rng.random_range(-100..=100));
            let disc = Window::disc(center, (side / 2).max(1)).expect("valid disc");
            let (xi, eta) = (rng.random_range(-50..=50i64), rng.random_range(-50..=50i64));
            let (x, y) = random_point(&disc, rng);
            let z1 = FrequencyPair::new(x, y);
            let tau = phase(z1).unwrap() + phase(FrequencyPair::new(xi, eta) - z1).unwrap();
            CurveSpec::new(Curve::KCurve { xi, eta, tau }, disc)
        }
        _ => CurveSpec::new(Curve::Sigma3 { xi1: rng.random_range(-50..=50), eta1: rng.random_range(-50..=50) }, square),
    }
}

fn check_curve(s: &CurveSpec) -> Result<(bool, u64), String> {
    let fast = count(s).map_err(err)?.count;
    let mut ok = fast == brute::count(s, false).map_err(err)?;
    if let Curve::Cubic { a, b } = s.curve {
        let excluded = count_cubic(a, b, s.window, true).map_err(err)?.count;
        ok &= excluded == brute::count(s, true).map_err(err)?;
    }
    Ok((ok, fast))
}

fn c8_lattice() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for (k, name) in ["hyperbola", "cubic", "kcurve", "sigma3"].iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let specs: Vec<CurveSpec> = (0..1000).map(|i| draw_curve(k, i, &mut rng)).collect();
        let results = specs.par_iter().map(check_curve).collect::<Result<Vec<_>, _>>()?;
        let bad = results.iter().filter(|r| !r.0).count();
        let points: u64 = results.iter().map(|r| r.1).sum();
        pass &= bad == 0;
        detail.push(format!("{name} {bad} mismatches over {points} points"));
    }
    let sq = Window::square(0, 0, 21).map_err(err)?;
    let h = |a, b, c| count(&CurveSpec::new(Curve::Hyperbola { a, b, c }, sq)).map(|r| r.count).map_err(err);
    let hyper = [h(1, 0, 1)?, h(0, 1, 2)?, h(1, 0, -1)?];
    let line = count_cubic(0, 0, sq, false).map_err(err)?.count;
    let disc = |r| Window::disc(HalfPoint::integer(0, 0), r).expect("valid disc");
    let s1 = [
        sigma1_count(2, 0, 8, disc(10)).map_err(err)?.count.count,
        sigma1_count(0, 0, 0, disc(2)).map_err(err)?.count.count,
        sigma1_count(1, 0, 5, disc(100)).map_err(err)?.count.count,
    ];
    pass &= hyper == [2, 2, 2] && line == 21 && s1 == [2, 13, 0];
    detail.push(format!("hand counts: hyperbola {hyper:?}, cubic line on side 21 {line}, sigma1 {s1:?}"));
    Ok((pass, detail.join("; ")))
}

fn c9_sweep() -> Outcome {
    let (r, _) = hyperbola_sweep(&[64, 128, 256, 512, 1024], 500, 9, 0.7, false).map_err(err)?;
    Ok((r.pass, format!("maxima {:?}, fitted exponent {:.3} (consistency, not proof)", r.exponent.maxima, r.exponent.fitted_slope)))
}

fn random_box_field(g: TorusGrid, k: i64, rng: &mut ChaCha8Rng) -> SpectralField {
    SpectralField::zeros(g).map(|z, _| {
        if z.is_zero() || z.xi.abs() > k || z.eta.abs() > k {
            ZERO
        } else {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }
    })
}

fn c10_probe() -> Outcome {
    let r_list = vec![4, 8, 16, 32, 64, 128];
    let random = probe_estimate(&ProbeConfig::new(r_list.clone(), DataFamily::RandomInDisc, 4, 10)).map_err(err)?;
    let mut line_cfg = ProbeConfig::new(r_list, DataFamily::CounterexampleLine, 1, 10);
    line_cfg.q_enabled = false;
    let line = probe_estimate(&line_cfg).map_err(err)?;
    line_cfg.q_enabled = true;
    let killed = probe_estimate(&line_cfg).map_err(err)?;
    let killed_zero = killed.max_ratios.iter().all(|&m| m == 0.0);
    // supports within |ξ|, |η| <= 7 keep every product frequency on 32x32
    let g = grid(32);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let u = random_box_field(g, 7, &mut rng);
        let v = random_box_field(g, 7, &mut rng);
        let exact = bilinear_free_norm(&u, &v).map_err(err)?;
        let quad = quadrature_oracle(&u, &v, 0).map_err(err)?;
        worst = worst.max((exact - quad).abs() / exact);
    }
    let slope = |s: Option<f64>| s.map_or_else(|| "none".to_string(), |s| format!("{s:.3}"));
    let pass = random.pass && line.pass && killed.pass && killed_zero && worst < 1e-10;
    Ok((
        pass,
        format!(
            "random-in-disc slope {} (sampled maxima are lower bounds); line without Q slope {}; line with Q identically zero: {killed_zero}; oracle relative deviation {worst:.1e}",
            slope(random.fitted_slope),
            slope(line.fitted_slope)
        ),
    ))
}

fn c11_kform() -> Outcome {
    let r = kform_report();
    println!("    substitution: {}", r.substitution);
    println!("    expansion: {}", r.expanded);
    println!("    reference: {}", r.reference);
    for t in &r.terms {
        println!("      {}: expansion {}, reference {}{}", t.monomial, t.expanded, t.reference, if t.agree { "" } else { " (differs)" });
    }
    println!("    {}", r.summary);
    let pass = r.xi_eta_sq_coefficient == "3/4" && r.summary.contains("3/4");
    Ok((pass, format!("expansion yields {} on xi*eta^2, reference form shows {}", r.xi_eta_sq_coefficient, r.reference_xi_eta_sq_coefficient)))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("m-r identity", 5, c1_identity),
        ("resonance consistency", 10, c2_resonance),
        ("dual-path nonlinearity", 30, c3_dual_path),
        ("conservation", 120, c4_conservation),
        ("integrator orders", 300, c5_orders),
        ("scaling symmetry", 600, c6_scaling),
        ("Miura consistency", 600, c7_miura),
        ("lattice counts", 300, c8_lattice),
        ("exponent consistency", 600, c9_sweep),
        ("bilinear estimate probe", 600, c10_probe),
        ("K-form report", 1, c11_kform),
    ];
    let mut failures = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!ok);
        println!(
            "criterion {:>2} [{name}]: {} ({detail}; {:.2}s of {budget}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} of 11 criteria failed");
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
