use num_complex::Complex64;
use nv_core::{FrequencyPair, PhaseParams};
use nv_lab::evolution::{integrate_fixed, simulate, standard_datum, NvModel, Scheme, SimConfig};
use nv_lab::invariants::{l2_pairing, mnv_rhs, scaling_transform, MnvForm, MnvModel};
use nv_lab::torus::{dealias, free_evolve, from_physical, read_nvf1, to_physical, write_nvf1, SpectralField, TorusGrid};
use nv_lab::LabError;
use proptest::prelude::*;

fn grid(n: usize) -> TorusGrid {
    TorusGrid::square(n).unwrap()
}

fn dist(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().coefficient_norm_sq().sqrt()
}

fn field_strategy(n: usize, k: i64) -> impl Strategy<Value = SpectralField> {
    proptest::collection::vec((-k..=k, -k..=k, -1.0f64..1.0, -1.0f64..1.0), 1..12).prop_map(move |modes| {
        let modes: Vec<_> = modes
            .into_iter()
            .filter(|&(x, y, _, _)| (x, y) != (0, 0))
            .map(|(x, y, re, im)| (FrequencyPair::new(x, y), Complex64::new(re, im)))
            .collect();
        SpectralField::from_modes(grid(n), &modes).unwrap()
    })
}

proptest! {
    #[test]
    fn nvf1_round_trip(u in field_strategy(16, 7)) {
        let mut buf = Vec::new();
        write_nvf1(&u, &mut buf).unwrap();
        let back = read_nvf1(buf.as_slice()).unwrap();
        prop_assert_eq!(back.coefficients(), u.coefficients());
    }

    #[test]
    fn physical_round_trip(u in field_strategy(16, 7)) {
        let back = from_physical(u.grid(), &to_physical(&u)).unwrap();
        prop_assert!(dist(&back, &u) < 1e-13);
    }

    #[test]
    fn linear_model_matches_free_evolution(u in field_strategy(32, 10), t in 0.0f64..0.05) {
        let g = u.grid();
        let m = NvModel::new(g, false, PhaseParams::PLAIN).linear_only();
        let stepped = integrate_fixed(&m, &u, t, 3, Scheme::Etdrk4).unwrap();
        let exact = free_evolve(&u, t, PhaseParams::PLAIN);
        prop_assert!(dist(&stepped, &exact) <= 1e-12 * (1.0 + u.coefficient_norm_sq().sqrt()));
    }
}

#[test]
fn mean_zero_and_real_fields_stay_so() {
    let g = grid(32);
    let u0 = standard_datum(g, 0.5);
    let tr = simulate(&u0, &SimConfig::new(g, 0.02, 1e-3, Scheme::Splitstep2)).unwrap();
    let u = tr.final_state();
    assert_eq!(u.mean_coefficient(), Complex64::new(0.0, 0.0));
    assert!(u.conjugate_symmetry_defect() < 1e-14);
    let drift = (l2_pairing(u) - l2_pairing(&u0)).norm() / l2_pairing(&u0).norm();
    assert!(drift < 1e-8, "{drift}");
}

#[test]
fn simulate_rejects_nonzero_mean() {
    let g = grid(16);
    let u = SpectralField::single_mode(g, FrequencyPair::new(0, 0), Complex64::new(1.0, 0.0)).unwrap();
    let e = simulate(&u, &SimConfig::new(g, 0.01, 1e-3, Scheme::Etdrk4)).unwrap_err();
    assert!(matches!(e, LabError::Precondition(_)));
}

#[test]
fn scaling_off_grid_is_reported() {
    let g = grid(16);
    let u = SpectralField::single_mode(g, FrequencyPair::new(7, 0), Complex64::new(1.0, 0.0)).unwrap();
    assert!(matches!(scaling_transform(&u, 2), Err(LabError::SupportOverflow(_))));
}

#[test]
fn mnv_model_rhs_matches_finite_difference() {
    // the model runs in s = −t/4, so dV/ds at s = 0 is −4 times the mNV right side
    let g = grid(32);
    let v0 = dealias(&from_physical(g, &nv_lab::torus::sample(g, |x, y| Complex64::new(x.cos() * y.cos(), -x.sin() * y.sin()) * 0.3)).unwrap());
    let m = MnvModel::new(g, MnvForm::Miura, false);
    let h = 1e-4;
    let fwd = integrate_fixed(&m, &v0, h, 1, Scheme::Etdrk4).unwrap();
    let bwd = integrate_fixed(&m, &v0, -h, 1, Scheme::Etdrk4).unwrap();
    let fd = fwd.sub(&bwd).unwrap().scale(Complex64::new(0.5 / h, 0.0));
    let rhs = mnv_rhs(&v0).unwrap().scale(Complex64::new(-4.0, 0.0));
    let rel = dist(&fd, &rhs) / rhs.coefficient_norm_sq().sqrt();
    assert!(rel < 1e-6, "{rel}");
}
