use hompolar::estimation::mle_theta;
use hompolar::fisher::fisher_theta;
use hompolar::simulator::{derive_seed, run_dip_scan};
use hompolar::stats::{inverse_variance_curve, mean, MIN_REPLICATES};
use hompolar::{Cal, CountRecord, Series};
use rayon::prelude::*;

use super::defined;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const COLUMNS: [&str; 4] = ["theta_deg", "mean_n1", "mean_n2", "n2_norm"];
pub const ESTIMATE_COLUMNS: [&str; 3] = ["mean_est_deg", "inv_var_per_rad2", "f11_per_rad2"];

/// Replicate `r` is a full dip scan on substream `r` of the seed, so the
/// result does not depend on how replicates are spread over threads.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.validate_simulation()?;
    let replicates = cfg.scan.replicates;
    if replicates == 0 {
        return Err(CliError::Config("scan needs at least one replicate".into()));
    }
    let degrees = cfg.scan.range.degrees()?;
    let angles: Vec<f64> = degrees.iter().map(|d| d.to_radians()).collect();
    let base = cfg.params(0.0)?;
    let acq = cfg.acquisition;

    let scans: Vec<Vec<(f64, CountRecord)>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_dip_scan(&angles, &base, &acq.with_seed(derive_seed(acq.seed, r))))
        .collect::<hompolar::Result<_>>()?;

    let cal = Cal::configured(cfg.system.alpha, cfg.system.gamma)?;
    let mut per_angle = Vec::with_capacity(angles.len());
    for (i, &angle) in angles.iter().enumerate() {
        let records: Vec<&CountRecord> = scans.iter().map(|s| &s[i].1).collect();
        let n1: Vec<f64> = records.iter().map(|r| r.n1 as f64).collect();
        let n2: Vec<f64> = records.iter().map(|r| r.n2 as f64).collect();
        let estimates = records
            .iter()
            .filter(|r| r.clicks() > 0)
            .map(|r| mle_theta(&cal, r))
            .collect::<hompolar::Result<Vec<f64>>>()?;
        per_angle.push((angle, mean(&n1)?, mean(&n2)?, estimates));
    }
    let peak = per_angle.iter().map(|a| a.2).fold(0.0, f64::max);

    let with_estimates = replicates >= MIN_REPLICATES;
    let mut columns = COLUMNS.to_vec();
    if with_estimates {
        columns.extend(ESTIMATE_COLUMNS);
    }
    let mut table = Table::new(columns);
    table.header.push(("replicates", replicates.into()));
    for ((angle, n1, n2, estimates), d) in per_angle.into_iter().zip(degrees) {
        let mut row = vec![
            Cell::Num(d),
            Cell::Num(n1),
            Cell::Num(n2),
            Cell::opt((peak > 0.0).then(|| n2 / peak)),
        ];
        if with_estimates {
            let mean_est = defined(mean(&estimates))?;
            let series = (
                angle,
                Series::new(estimates, acq.duration, format!("{d} deg")),
            );
            let inv_var = defined(
                inverse_variance_curve(
                    &[series],
                    acq.mean_pairs(),
                    cfg.system.alpha,
                    cfg.system.gamma,
                )
                .map(|rows| rows[0].inverse_variance),
            )?;
            row.push(Cell::opt(mean_est.map(f64::to_degrees)));
            row.push(Cell::opt(inv_var));
            row.push(Cell::opt(defined(fisher_theta(&cfg.params(angle)?))?));
        }
        table.push(row);
    }
    Ok(table)
}
