//! `hompolar`: Fisher tables, simulated dip scans, calibration, drift
//! tracking and Allan analysis from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hompolar::PairCountMode;

use config::RunConfig;
use error::CliError;
use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "hompolar",
    version,
    about = "Two-photon interference polarimetry toolkit"
)]
struct Cli {
    /// TOML config, or an earlier output file to replay.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coincidence probability and Fisher information against angle.
    Fisher {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        theta_deg: Option<f64>,
        /// Tabulate the angle range even if a single angle is configured.
        #[arg(long)]
        scan: bool,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Replicated dip scan with estimator inverse variance.
    Scan {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        acquisition: AcquisitionArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Simulated calibration of visibility and loss.
    Calibrate {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        acquisition: AcquisitionArgs,
        #[arg(long)]
        scan_step_deg: Option<f64>,
        #[arg(long)]
        scan_duration: Option<f64>,
        #[arg(long)]
        orthogonal_duration: Option<f64>,
    },
    /// Alternating-angle tracking protocol.
    Track {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        acquisition: AcquisitionArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta_theta_deg: Option<f64>,
        #[arg(long)]
        rounds: Option<usize>,
        /// Visibility change per round.
        #[arg(long, allow_hyphen_values = true)]
        alpha_drift: Option<f64>,
        /// Loss change per round.
        #[arg(long, allow_hyphen_values = true)]
        gamma_drift: Option<f64>,
        /// Angle change per round, degrees.
        #[arg(long, allow_hyphen_values = true)]
        theta_drift_deg: Option<f64>,
    },
    /// Standard and Allan deviation against block size for a CSV column.
    Allan {
        input: Option<PathBuf>,
        #[arg(long)]
        column: Option<String>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
}

#[derive(Debug, Args)]
struct SystemArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
struct AcquisitionArgs {
    #[arg(long)]
    pairs_per_second: Option<f64>,
    /// Seconds per acquisition.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    accidental_rate: Option<f64>,
    /// Draw the pair number per acquisition from a Poisson law.
    #[arg(long)]
    poisson_pairs: bool,
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[arg(long, allow_hyphen_values = true)]
    start_deg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop_deg: Option<f64>,
    #[arg(long)]
    step_deg: Option<f64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl SystemArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.system.alpha, self.alpha);
        set(&mut c.system.gamma, self.gamma);
    }
}

impl AcquisitionArgs {
    fn apply(self, c: &mut RunConfig) {
        let a = &mut c.acquisition;
        set(&mut a.pairs_per_second, self.pairs_per_second);
        set(&mut a.duration, self.duration);
        set(&mut a.accidental_rate, self.accidental_rate);
        if self.poisson_pairs {
            a.pair_count_mode = PairCountMode::Poisson;
        }
    }
}

impl RangeArgs {
    fn apply(self, r: &mut config::AngleRange) {
        set(&mut r.start_deg, self.start_deg);
        set(&mut r.stop_deg, self.stop_deg);
        set(&mut r.step_deg, self.step_deg);
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HOMPOLAR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "HOMPOLAR_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.acquisition.seed, cli.seed);
    if cli.format.is_some() {
        cfg.format = cli.format;
    }

    let mut buf = Vec::new();
    match cli.command {
        Command::Fisher {
            system,
            theta_deg,
            scan,
            range,
        } => {
            system.apply(&mut cfg);
            if theta_deg.is_some() {
                cfg.fisher.theta_deg = theta_deg;
            }
            if scan {
                cfg.fisher.theta_deg = None;
            }
            range.apply(&mut cfg.fisher.range);
            let table = commands::fisher::run(&cfg)?;
            table.write(&cfg, cfg.format.unwrap_or(Format::Csv), &mut buf)
        }
        Command::Scan {
            system,
            acquisition,
            range,
            replicates,
        } => {
            system.apply(&mut cfg);
            acquisition.apply(&mut cfg);
            range.apply(&mut cfg.scan.range);
            set(&mut cfg.scan.replicates, replicates);
            let table = commands::scan::run(&cfg)?;
            table.write(&cfg, cfg.format.unwrap_or(Format::Csv), &mut buf)
        }
        Command::Calibrate {
            system,
            acquisition,
            scan_step_deg,
            scan_duration,
            orthogonal_duration,
        } => {
            system.apply(&mut cfg);
            acquisition.apply(&mut cfg);
            set(&mut cfg.calibrate.scan_step_deg, scan_step_deg);
            set(&mut cfg.calibrate.scan_duration, scan_duration);
            set(&mut cfg.calibrate.orthogonal_duration, orthogonal_duration);
            let table = commands::calibrate::run(&cfg)?;
            table.write(&cfg, cfg.format.unwrap_or(Format::Json), &mut buf)
        }
        Command::Track {
            system,
            acquisition,
            delta_theta_deg,
            rounds,
            alpha_drift,
            gamma_drift,
            theta_drift_deg,
        } => {
            system.apply(&mut cfg);
            acquisition.apply(&mut cfg);
            set(&mut cfg.track.delta_theta_deg, delta_theta_deg);
            set(&mut cfg.track.rounds, rounds);
            set(&mut cfg.drift.alpha_rate, alpha_drift);
            set(&mut cfg.drift.gamma_rate, gamma_drift);
            set(&mut cfg.drift.theta_offset_rate_deg, theta_drift_deg);
            let table = commands::track::run(&cfg)?;
            table.write(&cfg, cfg.format.unwrap_or(Format::Csv), &mut buf)
        }
        Command::Allan {
            input,
            column,
            sizes,
        } => {
            if input.is_some() {
                cfg.allan.input = input;
            }
            set(&mut cfg.allan.column, column);
            set(&mut cfg.allan.sizes, sizes);
            let table = commands::allan::run(&cfg)?;
            table.write(&cfg, cfg.format.unwrap_or(Format::Csv), &mut buf)
        }
    }
    .expect("writing to memory");

    emit(cli.out.as_deref(), &buf)
}

/// Output is assembled in memory first so a failed run leaves no partial file.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            w.write_all(bytes)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)
                .and_then(|_| lock.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hompolar: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
