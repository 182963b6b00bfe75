use hompolar::fisher::{fisher_theta, max_fisher_angle};
use hompolar::model::coincidence_prob_linear;

use super::defined;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{meta_num, Cell, Table};

pub const COLUMNS: [&str; 4] = ["theta_deg", "p_c", "f11_per_rad2", "theta_mf_deg"];

pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    cfg.params(0.0)?;
    let degrees = match cfg.fisher.theta_deg {
        Some(t) if t.is_finite() => vec![t],
        Some(t) => {
            return Err(CliError::Config(format!(
                "theta_deg must be finite, got {t}"
            )))
        }
        None => cfg.fisher.range.degrees()?,
    };
    let theta_mf =
        defined(max_fisher_angle(cfg.system.alpha, cfg.system.gamma))?.map(f64::to_degrees);

    let mut table = Table::new(COLUMNS.to_vec());
    table.header.push(("theta_mf_deg", meta_num(theta_mf)));
    for d in degrees {
        let p = cfg.params(d.to_radians())?;
        table.push(vec![
            Cell::Num(d),
            Cell::Num(coincidence_prob_linear(&p)),
            Cell::opt(defined(fisher_theta(&p))?),
            Cell::opt(theta_mf),
        ]);
    }
    Ok(table)
}
