use hompolar::fisher::crb_std;
use hompolar::simulator::run_tracking_protocol;
use hompolar::stats::{allan_deviation, linear_trend, mean, standard_deviation};
use serde_json::{Map, Value};

use super::defined;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{meta_num, Cell, Table};

pub const COLUMNS: [&str; 5] = [
    "round",
    "t_seconds",
    "est_mf_deg",
    "est_shifted_deg",
    "delta_deg",
];

pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.validate_simulation()?;
    let t = cfg.track;
    if t.rounds == 0 {
        return Err(CliError::Config("track needs at least one round".into()));
    }
    if !t.delta_theta_deg.is_finite() {
        return Err(CliError::Config("delta_theta_deg must be finite".into()));
    }
    let base = cfg.params(0.0)?;
    let run = run_tracking_protocol(
        t.delta_theta_deg.to_radians(),
        t.rounds,
        &base,
        &cfg.drift.to_model(),
        &cfg.acquisition,
    )?;

    let mut table = Table::new(COLUMNS.to_vec());
    table
        .header
        .push(("theta_mf_deg", meta_num(Some(run.theta_mf.to_degrees()))));
    for r in &run.rounds {
        table.push(vec![
            Cell::Int(r.round_index as u64),
            Cell::Num(r.timestamp),
            Cell::Num(r.est_at_mf.to_degrees()),
            Cell::Num(r.est_at_shifted.to_degrees()),
            Cell::Num(r.delta_estimate.to_degrees()),
        ]);
    }

    let deltas = run.deltas();
    let n = deltas.len() as f64;
    let std = defined(standard_deviation(&deltas))?;
    let per_round_crb = defined(crb_std(
        &base.with_theta_prime(run.theta_mf)?,
        cfg.acquisition.mean_pairs(),
    ))?
    .map(|s| std::f64::consts::SQRT_2 * s);
    let t_stat = |v: &[f64]| -> Result<Option<f64>, CliError> {
        Ok(defined(linear_trend(v).map(|f| f.t_statistic()))?)
    };
    let deg = |v: Option<f64>| meta_num(v.map(f64::to_degrees));

    let mut summary = Map::new();
    let mut put = |k: &str, v: Value| {
        summary.insert(k.into(), v);
    };
    put("rounds", Value::from(t.rounds));
    put("delta_theta_deg", meta_num(Some(t.delta_theta_deg)));
    put("mean_delta_deg", deg(Some(mean(&deltas)?)));
    put("std_delta_deg", deg(std));
    put("stderr_delta_deg", deg(std.map(|s| s / n.sqrt())));
    put(
        "allan_delta_deg",
        deg(defined(allan_deviation(&deltas, 1))?),
    );
    put("crb_delta_deg", deg(per_round_crb));
    put("crb_stderr_deg", deg(per_round_crb.map(|s| s / n.sqrt())));
    put("est_mf_trend_t", meta_num(t_stat(&run.est_at_mf())?));
    put("delta_trend_t", meta_num(t_stat(&deltas)?));
    put("clamp_events", Value::from(run.clamp_events));
    table.footer.push(("summary", Value::Object(summary)));
    Ok(table)
}
