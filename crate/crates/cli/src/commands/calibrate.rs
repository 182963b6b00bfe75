use std::f64::consts::FRAC_PI_2;

use hompolar::estimation::{calibrate_alpha, calibrate_gamma, reconstruct_pairs};
use hompolar::fisher::max_fisher_angle;
use hompolar::simulator::{derive_seed, rng_from_seed, run_dip_scan, sample_acquisition};
use hompolar::{Cal, Provenance};
use serde_json::Value;

use super::defined;
use crate::config::{AngleRange, RunConfig};
use crate::error::CliError;
use crate::output::{meta_num, Table};

/// Simulates the calibration stage: a dip scan over [0°, 90°] for the
/// visibility and a long acquisition at orthogonal polarisations for the
/// loss. The result is reported as metadata with no table rows.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.validate_simulation()?;
    let c = cfg.calibrate;
    for (name, v) in [
        ("scan_duration", c.scan_duration),
        ("orthogonal_duration", c.orthogonal_duration),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Config(format!("{name} must be > 0, got {v}")));
        }
    }
    let mut angles: Vec<f64> = AngleRange::new(0.0, 90.0, c.scan_step_deg)
        .degrees()?
        .into_iter()
        .map(f64::to_radians)
        .collect();
    // the scan must reach orthogonal polarisations even if the step does not divide 90°
    if angles.last().is_some_and(|&a| FRAC_PI_2 - a > 1e-12) {
        angles.push(FRAC_PI_2);
    }

    let base = cfg.params(0.0)?;
    let seed = cfg.acquisition.seed;
    let scan_cfg = hompolar::AcquisitionConfig {
        duration: c.scan_duration,
        ..cfg.acquisition.with_seed(derive_seed(seed, 0))
    };
    let scan = run_dip_scan(&angles, &base, &scan_cfg)?;
    let orth_cfg = hompolar::AcquisitionConfig {
        duration: c.orthogonal_duration,
        ..cfg.acquisition
    };
    let orth = sample_acquisition(
        &base.with_theta_prime(FRAC_PI_2)?,
        &orth_cfg,
        &mut rng_from_seed(derive_seed(seed, 1)),
    );

    let alpha: f64 = calibrate_alpha(&scan)?;
    let gamma: f64 = calibrate_gamma(&orth)?;
    let cal = Cal::new(
        alpha,
        gamma,
        Provenance::Measured("dip scan minimum over maximum".into()),
        Provenance::Measured("orthogonal acquisition".into()),
    )?;
    let theta_mf = defined(max_fisher_angle(cal.alpha(), cal.gamma()))?.map(f64::to_degrees);
    let pairs: f64 = reconstruct_pairs(&orth, gamma)?;

    let mut table = Table::new(Vec::new());
    table.header = vec![
        ("alpha", meta_num(Some(cal.alpha()))),
        ("gamma", meta_num(Some(cal.gamma()))),
        ("theta_mf_deg", meta_num(theta_mf)),
        (
            "pairs_per_second",
            meta_num(Some(pairs / c.orthogonal_duration)),
        ),
        ("alpha_source", provenance(&cal.alpha_source)),
        ("gamma_source", provenance(&cal.gamma_source)),
    ];
    Ok(table)
}

fn provenance(p: &Provenance) -> Value {
    match p {
        Provenance::Configured => Value::from("configured"),
        Provenance::Measured(how) => Value::from(format!("measured: {how}")),
    }
}
