use hompolar::model::outcome_probabilities;
use hompolar::simulator::{rng_from_seed, run_tracking_protocol, sample_acquisition};
use hompolar::stats::{linear_trend, mean, standard_deviation};
use hompolar::{AcquisitionConfig, DriftModel, Params};

// upper 0.1% points of the chi-square distribution
const CHI2_2_999: f64 = 13.816;
const CHI2_3_999: f64 = 16.266;

#[test]
fn click_counts_follow_the_multinomial() {
    let p = Params::new(0.6, 0.79, 0.91).unwrap();
    let cfg = AcquisitionConfig {
        pairs_per_second: 1e5,
        ..Default::default()
    };
    let m = 1e5;
    let o = outcome_probabilities(&p);
    let mut rng = rng_from_seed(21);
    let n = 10_000;
    let samples: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let r = sample_acquisition(&p, &cfg, &mut rng);
            [r.n1 as f64, r.n2 as f64]
        })
        .collect();

    let mu = [m * o.p1, m * o.p2];
    // multinomial covariance of (n1, n2)
    let sigma = [
        [m * o.p1 * (1.0 - o.p1), -m * o.p1 * o.p2],
        [-m * o.p1 * o.p2, m * o.p2 * (1.0 - o.p2)],
    ];
    let nf = n as f64;
    let xbar = [
        samples.iter().map(|s| s[0]).sum::<f64>() / nf,
        samples.iter().map(|s| s[1]).sum::<f64>() / nf,
    ];
    for k in 0..2 {
        let se = (sigma[k][k] / nf).sqrt();
        assert!((xbar[k] - mu[k]).abs() <= 4.0 * se, "component {k}");
    }

    let mut s = [[0.0; 2]; 2];
    for x in &samples {
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += (x[i] - xbar[i]) * (x[j] - xbar[j]) / (nf - 1.0);
            }
        }
    }
    let det = sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0];
    let inv = [
        [sigma[1][1] / det, -sigma[0][1] / det],
        [-sigma[1][0] / det, sigma[0][0] / det],
    ];
    let d = [xbar[0] - mu[0], xbar[1] - mu[1]];
    let t2 = nf
        * (0..2)
            .map(|i| (0..2).map(|j| d[i] * inv[i][j] * d[j]).sum::<f64>())
            .sum::<f64>();
    assert!(t2 < CHI2_2_999, "mean statistic {t2}");

    // likelihood-ratio test of S against Σ
    let mut a = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            a[i][j] = (0..2).map(|k| inv[i][k] * s[k][j]).sum();
        }
    }
    let tr = a[0][0] + a[1][1];
    let det_a = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let lr = (nf - 1.0) * (tr - det_a.ln() - 2.0);
    assert!(lr < CHI2_3_999, "covariance statistic {lr}");
}

#[test]
fn zero_shift_without_drift_averages_to_zero() {
    let base = Params::new(0.0, 0.79, 0.91).unwrap();
    let cfg = AcquisitionConfig::default().with_seed(31);
    let run = run_tracking_protocol(0.0, 1000, &base, &DriftModel::default(), &cfg).unwrap();
    let d = run.deltas();
    let se = standard_deviation(&d).unwrap() / (d.len() as f64).sqrt();
    assert!(mean(&d).unwrap().abs() <= 5.0 * se);
    assert_eq!(run.clamp_events, 0);
}

#[test]
fn loss_drift_moves_the_estimate_but_not_the_difference() {
    let base = Params::new(0.0, 0.79, 0.91).unwrap();
    let cfg = AcquisitionConfig::default().with_seed(32);
    let drift = DriftModel {
        gamma_rate: 1e-5,
        ..Default::default()
    };
    let shift = 0.1f64.to_radians();
    let run = run_tracking_protocol(shift, 1000, &base, &drift, &cfg).unwrap();
    let d = run.deltas();
    let se = standard_deviation(&d).unwrap() / (d.len() as f64).sqrt();
    assert!((mean(&d).unwrap() - shift).abs() <= 3.0 * se);
    let trend = linear_trend(&run.est_at_mf()).unwrap();
    assert!(trend.t_statistic().abs() >= 5.0, "{trend:?}");
}

#[test]
fn identical_configs_give_identical_runs() {
    let base = Params::new(0.0, 0.79, 0.91).unwrap();
    let cfg = AcquisitionConfig {
        pair_count_mode: hompolar::PairCountMode::Poisson,
        accidental_rate: 1.0,
        ..AcquisitionConfig::default().with_seed(33)
    };
    let drift = DriftModel {
        alpha_rate: -1e-5,
        theta_offset_rate: 1e-6,
        ..Default::default()
    };
    let a = run_tracking_protocol(0.001, 200, &base, &drift, &cfg).unwrap();
    let b =
        std::thread::spawn(move || run_tracking_protocol(0.001, 200, &base, &drift, &cfg).unwrap())
            .join()
            .unwrap();
    assert_eq!(a, b);
}
