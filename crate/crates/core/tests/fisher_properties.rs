use std::f64::consts::FRAC_PI_2;

use hompolar::fisher::{
    fisher_matrix, fisher_theta, null_direction, numerical_fisher, theta_gamma_correlation,
};
use hompolar::Params;
use proptest::prelude::*;

/// Interior grid, 10 points per axis.
fn grid() -> impl Iterator<Item = Params> {
    let thetas: Vec<f64> = (0..10)
        .map(|i| (5.0 + 8.8 * i as f64).to_radians())
        .collect();
    let alphas: Vec<f64> = (0..10).map(|i| 0.1 + 0.095 * i as f64).collect();
    let gammas: Vec<f64> = (0..10).map(|i| 0.02 + 0.105 * i as f64).collect();
    thetas.into_iter().flat_map(move |t| {
        let gammas = gammas.clone();
        alphas.clone().into_iter().flat_map(move |a| {
            gammas
                .clone()
                .into_iter()
                .map(move |g| Params::new(t, a, g).unwrap())
        })
    })
}

#[test]
fn closed_form_is_positive_semidefinite_on_grid() {
    for p in grid() {
        let f = fisher_matrix(&p).unwrap();
        assert!(f.max_asymmetry() <= 1e-12 * f.frobenius_norm());
        let ev = f.eigenvalues();
        assert!(ev[0] >= -1e-9, "{p:?} {ev:?}");
        // exactly one null eigenvalue
        assert!(ev[0].abs() <= 1e-9 * ev[2].max(1.0), "{p:?} {ev:?}");
        assert!(ev[1] > 1e-9 * ev[2], "{p:?} {ev:?}");
    }
}

#[test]
fn null_direction_annihilates_on_grid() {
    for p in grid() {
        let f = fisher_matrix(&p).unwrap();
        let fv = f.mul_vec(&null_direction(&p).unwrap());
        assert!(fv.iter().all(|x| x.abs() <= 1e-9), "{p:?} {fv:?}");
    }
}

#[test]
fn numerical_matches_closed_form_at_operating_point() {
    let p = Params::new(0.6, 0.79, 0.91).unwrap();
    let f = fisher_matrix(&p).unwrap();
    let n = numerical_fisher(&p, 1e-5).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = (n.get(i, j), f.get(i, j));
            assert!((a - b).abs() <= 1e-6 * b.abs(), "({i},{j}) {a} vs {b}");
        }
    }
}

#[test]
fn correlation_bound_over_open_quadrant() {
    let max = (1..900)
        .map(|i| {
            let p = Params::new((i as f64 / 10.0).to_radians(), 0.79, 0.91).unwrap();
            theta_gamma_correlation(&p).unwrap()
        })
        .fold(0.0f64, f64::max);
    assert!(max <= 0.153 + 1e-3, "{max}");
}

proptest! {
    #[test]
    fn theta_information_symmetries(t in -3.0f64..3.0, a in 0.05f64..0.99, g in 0.0f64..0.99) {
        let f = |x: f64| fisher_theta(&Params::new(x, a, g).unwrap()).unwrap();
        let base = f(t);
        let tol = 1e-12 * base.abs().max(1e-300);
        prop_assert!((base - f(-t)).abs() <= tol);
        prop_assert!((base - f(std::f64::consts::PI - t)).abs() <= tol.max(1e-18));
    }

    #[test]
    fn null_direction_holds_off_grid(t in -1.5f64..1.5, a in 0.05f64..1.0, g in 0.0f64..0.99) {
        prop_assume!((t.abs() - FRAC_PI_2).abs() > 1e-3);
        let p = Params::new(t, a, g).unwrap();
        prop_assume!(fisher_matrix(&p).is_ok());
        let f = fisher_matrix(&p).unwrap();
        let fv = f.mul_vec(&null_direction(&p).unwrap());
        let norm = fv.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(norm <= 1e-8 * f.frobenius_norm().max(1e-300));
    }
}
