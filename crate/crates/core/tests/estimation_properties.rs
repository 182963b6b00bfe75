use std::f64::consts::FRAC_PI_2;

use hompolar::estimation::{log_likelihood, mle_theta, mle_theta_from_totals};
use hompolar::model::outcome_probabilities;
use hompolar::simulator::{rng_from_seed, sample_acquisition};
use hompolar::{AcquisitionConfig, Cal, CountRecord, Params};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn noise_free_totals_round_trip() {
    let mut rng = rng_from_seed(10);
    for _ in 0..10_000 {
        let t = rng.random_range(5f64.to_radians()..=85f64.to_radians());
        let a = rng.random_range(0.3..=1.0);
        let g = rng.random_range(0.0..=0.95);
        let o = outcome_probabilities(&Params::new(t, a, g).unwrap());
        let k = 1e9;
        let est = mle_theta_from_totals(&Cal::configured(a, g).unwrap(), k * o.p1, k * o.p2);
        assert!((est - t).abs() <= 1e-9, "t={t} a={a} g={g} est={est}");
    }
}

#[test]
fn estimator_is_total_over_count_pairs() {
    let mut rng = rng_from_seed(11);
    let cals: Vec<Cal> = [
        (0.79, 0.91),
        (1.0, 0.0),
        (0.0, 0.5),
        (0.3, 0.99),
        (1.0, 0.95),
    ]
    .iter()
    .map(|&(a, g)| Cal::configured(a, g).unwrap())
    .collect();
    for i in 0..100_000 {
        let n1 = rng.random_range(0..1_000_000u64);
        let n2 = if i % 3 == 0 {
            rng.random_range(0..50u64)
        } else {
            rng.random_range(0..1_000_000u64)
        };
        if n1 + n2 == 0 {
            continue;
        }
        let rec = CountRecord::new(n1, n2, 1.0);
        for cal in &cals {
            let t = mle_theta(cal, &rec).unwrap();
            assert!(
                t.is_finite() && (0.0..=FRAC_PI_2).contains(&t),
                "{rec:?} {cal:?} {t}"
            );
        }
    }
}

/// argmax of the log-likelihood by a coarse 1e-3 grid, then a 1e-5 grid
/// around the coarse winner; θ′ = π/2 is always a candidate.
fn grid_argmax(cal: &Cal, rec: &CountRecord) -> f64 {
    let ll = |t: f64| log_likelihood(t, cal, rec).unwrap_or(f64::NEG_INFINITY);
    let best = |cands: &mut dyn Iterator<Item = f64>| {
        cands.fold((0.0, f64::NEG_INFINITY), |(bt, bv), t| {
            let v = ll(t);
            if v > bv {
                (t, v)
            } else {
                (bt, bv)
            }
        })
    };
    let coarse_n = (FRAC_PI_2 / 1e-3) as usize;
    let (c, _) = best(&mut (0..=coarse_n).map(|i| i as f64 * 1e-3).chain([FRAC_PI_2]));
    let lo = (c - 2e-3).max(0.0);
    let hi = (c + 2e-3).min(FRAC_PI_2);
    let fine_n = ((hi - lo) / 1e-5) as usize;
    best(&mut (0..=fine_n).map(|i| lo + i as f64 * 1e-5).chain([hi])).0
}

#[test]
fn estimator_maximises_the_likelihood() {
    let mut rng = rng_from_seed(12);
    let cfg = AcquisitionConfig {
        pairs_per_second: 2e4,
        ..Default::default()
    };
    for _ in 0..1000 {
        let t = rng.random_range(0.0..FRAC_PI_2);
        let a = rng.random_range(0.3..=1.0);
        let g = rng.random_range(0.0..=0.95);
        let p = Params::new(t, a, g).unwrap();
        let rec = sample_acquisition(&p, &cfg, &mut rng);
        let cal = Cal::configured(a, g).unwrap();
        let est = mle_theta(&cal, &rec).unwrap();
        let grid = grid_argmax(&cal, &rec);
        assert!(
            (est - grid).abs() <= 2e-5,
            "{rec:?} a={a} g={g}: mle {est} grid {grid}"
        );
    }
}

proptest! {
    #[test]
    fn estimator_is_degree_zero_homogeneous(n1 in 0u64..100_000, n2 in 0u64..5_000, c in 1u64..1000) {
        prop_assume!(n1 + n2 > 0);
        let cal = Cal::configured(0.79, 0.91).unwrap();
        let a = mle_theta(&cal, &CountRecord::new(n1, n2, 1.0)).unwrap();
        let b = mle_theta(&cal, &CountRecord::new(c * n1, c * n2, 1.0)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn likelihood_ignores_duration(n1 in 0u64..10_000, n2 in 0u64..500, t in 0.1f64..1.4) {
        let cal = Cal::configured(0.79, 0.91).unwrap();
        let split = CountRecord::new(n1, n2, 1.0);
        let longer = CountRecord { n1, n2, n0: None, duration: 2.0 };
        prop_assert_eq!(log_likelihood(t, &cal, &split), log_likelihood(t, &cal, &longer));
    }
}
