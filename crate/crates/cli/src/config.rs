//! Run configuration: TOML on disk, flag overrides on top, JSON echo in
//! every output so a run can be replayed from its own artifact.

use std::path::{Path, PathBuf};

use hompolar::simulator::Sinusoid;
use hompolar::{AcquisitionConfig, DriftModel, Params};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::Format;

pub const ECHO_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Output format; each command has its own default.
    pub format: Option<Format>,
    pub system: SystemConfig,
    pub acquisition: AcquisitionConfig,
    pub drift: DriftConfig,
    pub fisher: FisherConfig,
    pub scan: ScanConfig,
    pub calibrate: CalibrateConfig,
    pub track: TrackConfig,
    pub allan: AllanConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            alpha: 0.79,
            gamma: 0.91,
        }
    }
}

/// Drift per protocol round. Angles are in degrees here.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftConfig {
    pub alpha_rate: f64,
    pub gamma_rate: f64,
    pub theta_offset_rate_deg: f64,
    pub alpha_sine: Option<Sinusoid>,
    pub gamma_sine: Option<Sinusoid>,
    pub theta_sine_deg: Option<Sinusoid>,
}

impl DriftConfig {
    pub fn to_model(self) -> DriftModel {
        DriftModel {
            alpha_rate: self.alpha_rate,
            gamma_rate: self.gamma_rate,
            theta_offset_rate: self.theta_offset_rate_deg.to_radians(),
            alpha_sine: self.alpha_sine,
            gamma_sine: self.gamma_sine,
            theta_sine: self.theta_sine_deg.map(|s| Sinusoid {
                amplitude: s.amplitude.to_radians(),
                period: s.period,
            }),
        }
    }
}

/// Inclusive angle grid `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleRange {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl AngleRange {
    pub fn new(start_deg: f64, stop_deg: f64, step_deg: f64) -> Self {
        Self {
            start_deg,
            stop_deg,
            step_deg,
        }
    }

    pub fn degrees(&self) -> Result<Vec<f64>, CliError> {
        let AngleRange {
            start_deg,
            stop_deg,
            step_deg,
        } = *self;
        if ![start_deg, stop_deg, step_deg]
            .iter()
            .all(|v| v.is_finite())
            || step_deg <= 0.0
            || stop_deg < start_deg
        {
            return Err(CliError::Config(format!(
                "angle range needs finite start <= stop and step > 0, got {start_deg}..{stop_deg} step {step_deg}"
            )));
        }
        let steps = ((stop_deg - start_deg) / step_deg + 1e-9).floor() as usize;
        if steps > 1_000_000 {
            return Err(CliError::Config(format!("angle range has {steps} points")));
        }
        Ok((0..=steps)
            .map(|i| start_deg + i as f64 * step_deg)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FisherConfig {
    /// Single angle; the range is used when absent.
    pub theta_deg: Option<f64>,
    pub range: AngleRange,
}

impl Default for FisherConfig {
    fn default() -> Self {
        Self {
            theta_deg: None,
            range: AngleRange::new(0.0, 90.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub range: AngleRange,
    pub replicates: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            range: AngleRange::new(0.0, 90.0, 2.0),
            replicates: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateConfig {
    pub scan_step_deg: f64,
    /// Seconds per dip-scan point.
    pub scan_duration: f64,
    /// Seconds at orthogonal polarisations.
    pub orthogonal_duration: f64,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            scan_step_deg: 2.0,
            scan_duration: 1.0,
            orthogonal_duration: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackConfig {
    pub delta_theta_deg: f64,
    pub rounds: usize,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            delta_theta_deg: 0.1,
            rounds: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllanConfig {
    pub input: Option<PathBuf>,
    pub column: String,
    pub sizes: Vec<usize>,
}

impl Default for AllanConfig {
    fn default() -> Self {
        Self {
            input: None,
            column: "delta_deg".into(),
            sizes: vec![1, 2, 5, 10, 20, 50, 100],
        }
    }
}

impl RunConfig {
    /// Reads a TOML config, or the echo embedded in an earlier output
    /// (a `# config:` line in CSV, a `config` field in JSON).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if let Some(line) = text.lines().find(|l| l.starts_with(ECHO_PREFIX)) {
            return from_json(&line[ECHO_PREFIX.len()..], path);
        }
        if text.trim_start().starts_with('{') {
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let config = value
                .get("config")
                .ok_or_else(|| CliError::Config(format!("{}: no config field", path.display())))?;
            return from_json(&config.to_string(), path);
        }
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn params(&self, theta_prime: f64) -> Result<Params, CliError> {
        Params::new(theta_prime, self.system.alpha, self.system.gamma)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks the sections shared by the simulating commands.
    pub fn validate_simulation(&self) -> Result<(), CliError> {
        self.params(0.0)?;
        self.acquisition
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn from_json(text: &str, path: &Path) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_bench_setup() {
        let c = RunConfig::default();
        assert_eq!((c.system.alpha, c.system.gamma), (0.79, 0.91));
        assert_eq!(c.acquisition.pairs_per_second, 1.24e5);
        assert_eq!(c.acquisition.accidental_rate, 0.0);
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let c: RunConfig = toml::from_str("[system]\ngamma = 0.5\n[track]\nrounds = 7\n").unwrap();
        assert_eq!(c.system.gamma, 0.5);
        assert_eq!(c.system.alpha, 0.79);
        assert_eq!(c.track.rounds, 7);
        assert_eq!(c.scan, ScanConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[system]\nbeta = 1\n").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.acquisition.seed = u64::MAX;
        c.drift.gamma_sine = Some(Sinusoid {
            amplitude: 1e-3,
            period: 37.0,
        });
        c.system.alpha = 0.1 + 0.2;
        let back: RunConfig = serde_json::from_str(&c.echo().to_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn angle_grid_is_inclusive() {
        let g = AngleRange::new(0.0, 90.0, 2.0).degrees().unwrap();
        assert_eq!(g.len(), 46);
        assert_eq!(*g.last().unwrap(), 90.0);
        assert_eq!(AngleRange::new(5.0, 5.0, 1.0).degrees().unwrap(), vec![5.0]);
        assert!(AngleRange::new(0.0, 1.0, 0.0).degrees().is_err());
        assert!(AngleRange::new(2.0, 1.0, 1.0).degrees().is_err());
    }

    #[test]
    fn drift_degrees_become_radians() {
        let d = DriftConfig {
            theta_offset_rate_deg: 180.0,
            ..Default::default()
        };
        assert_eq!(d.to_model().theta_offset_rate, std::f64::consts::PI);
    }
}
