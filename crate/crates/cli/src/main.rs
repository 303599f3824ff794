use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use longdyn::config::{PipelineConfig, SpeedUnit};
use longdyn::dynamics::{inverse_actuation, simulate, ModelSet};
use longdyn::estimation::estimate_acceleration;
use longdyn::io::{parse_drive_csv, parse_schedule_csv, plot_csv, plot_grid_kmh};
use longdyn::pipeline::{fit_braking, fit_friction, fit_propulsion, LevelReport, NamedLog};
use longdyn::spline::{ForceKind, ModelFile, Provenance};
use longdyn::validation::{accumulate, ErrorStats, DEFAULT_HIST_BIN};
use longdyn::vehicle::{
    DriveLog, Gear, LogMetadata, VehicleParams, DEFAULT_BRAKE_RANGE, DEFAULT_THROTTLE_RANGE,
};
use longdyn::{Error, Result};

const PLOT_POINTS: usize = 500;
const PLOT_MIN_KMH: f64 = 0.1;
const PLOT_MAX_KMH: f64 = 130.0;

#[derive(Parser)]
#[command(
    name = "longdyn",
    version,
    about = "Identify, simulate and invert longitudinal vehicle force models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GearArg {
    Neutral,
    Drive,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    #[value(name = "speed_mps")]
    Mps,
    #[value(name = "speed_kmh")]
    Kmh,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Vehicle parameters (JSON)
    #[arg(long)]
    params: PathBuf,
    /// Friction model file
    #[arg(long)]
    friction: PathBuf,
    /// Propulsion model file
    #[arg(long)]
    propulsion: PathBuf,
    /// Braking model file
    #[arg(long)]
    braking: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a telemetry CSV into a drive-log file
    Ingest {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "speed_mps")]
        units: UnitArg,
        /// Gear engaged during the recording
        #[arg(long, value_enum, default_value = "drive")]
        gear: GearArg,
        #[arg(long, default_value = "")]
        description: String,
        /// Vehicle parameters (JSON), for the throttle and brake ranges
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the friction curve from coast-down logs
    FitFriction {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the propulsion surface from constant-throttle logs
    FitPropulsion {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        friction: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Restrict the fit to these levels
        #[arg(long)]
        level: Vec<i32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the braking surface from constant-brake logs
    FitBrake {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        friction: PathBuf,
        #[arg(long)]
        propulsion: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        level: Vec<i32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a model file on a dense speed grid (CSV)
    ExportPlot {
        model: PathBuf,
        /// Only this level of a surface
        #[arg(long)]
        level: Option<i32>,
        /// Log-spaced speed grid
        #[arg(long)]
        log_axes: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a command schedule with the direct model
    Simulate {
        #[command(flatten)]
        models: ModelArgs,
        /// Step-hold schedule CSV (t_s, throttle, brake, slope_rad)
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        v0: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare model and measured acceleration over drive logs
    Validate {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[command(flatten)]
        models: ModelArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Histogram bin width in m/s^2
        #[arg(long, default_value_t = DEFAULT_HIST_BIN)]
        hist_bin: f64,
        /// Write the JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Throttle or brake command for a desired acceleration
    Invert {
        #[command(flatten)]
        models: ModelArgs,
        #[arg(long)]
        speed: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        slope: f64,
        #[arg(long, allow_hyphen_values = true)]
        accel: f64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_params(path: &Path) -> Result<VehicleParams> {
    VehicleParams::from_json_str(&read(path)?).map_err(|e| e.context(path.display().to_string()))
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => {
            PipelineConfig::from_json_str(&read(p)?).map_err(|e| e.context(p.display().to_string()))
        }
        None => Ok(PipelineConfig::default()),
    }
}

fn load_model(path: &Path, kind: ForceKind) -> Result<ModelFile> {
    let m = ModelFile::from_json_str(&read(path)?)
        .map_err(|e| e.context(path.display().to_string()))?;
    if m.kind != kind {
        return Err(Error::Schema(format!(
            "{} holds a {} model, expected {kind}",
            path.display(),
            m.kind
        )));
    }
    Ok(m)
}

fn load_logs(paths: &[PathBuf]) -> Result<Vec<(String, DriveLog)>> {
    paths
        .iter()
        .map(|p| {
            let log = DriveLog::from_json_str(&read(p)?)
                .map_err(|e| e.context(p.display().to_string()))?;
            Ok((p.display().to_string(), log))
        })
        .collect()
}

fn load_models(args: &ModelArgs) -> Result<ModelSet> {
    ModelSet::new(
        load_model(&args.friction, ForceKind::Friction)?
            .as_curve()?
            .clone(),
        load_model(&args.propulsion, ForceKind::Propulsion)?
            .as_surface()?
            .clone(),
        load_model(&args.braking, ForceKind::Braking)?
            .as_surface()?
            .clone(),
        load_params(&args.params)?,
    )
}

/// Provenance for a fitted model. The timestamp comes from
/// `SOURCE_DATE_EPOCH` so repeated runs produce identical files.
fn provenance(logs: &[PathBuf]) -> Provenance {
    Provenance {
        source_logs: logs.iter().map(|p| p.display().to_string()).collect(),
        fit_timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
    }
}

fn print_reports(kind: ForceKind, reports: &[LevelReport]) {
    for r in reports {
        let level = r.level.map_or_else(String::new, |l| format!(" level {l}"));
        println!(
            "{kind}{level}: {} points in {} bins, residual RMS {:.1} N",
            r.points, r.bins, r.residual_rms
        );
    }
}

fn named(logs: &[(String, DriveLog)]) -> Vec<NamedLog<'_>> {
    logs.iter()
        .map(|(name, log)| NamedLog { name, log })
        .collect()
}

fn levels(requested: &[i32]) -> Option<&[i32]> {
    (!requested.is_empty()).then_some(requested)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            csv,
            units,
            gear,
            description,
            params,
            out,
        } => {
            let (throttle_range, brake_range) = match params {
                Some(p) => {
                    let params = load_params(&p)?;
                    (params.throttle_range, params.brake_range)
                }
                None => (DEFAULT_THROTTLE_RANGE, DEFAULT_BRAKE_RANGE),
            };
            let units = match units {
                UnitArg::Mps => SpeedUnit::Mps,
                UnitArg::Kmh => SpeedUnit::Kmh,
            };
            let gear = match gear {
                GearArg::Neutral => Gear::Neutral,
                GearArg::Drive => Gear::Drive,
            };
            let ingested = parse_drive_csv(
                &read(&csv)?,
                units,
                throttle_range,
                brake_range,
                LogMetadata { gear, description },
            )
            .map_err(|e| e.context(csv.display().to_string()))?;
            for r in &ingested.rejected {
                eprintln!("line {}: rejected, {}", r.line, r.reason);
            }
            println!(
                "{} rows accepted, {} rejected, {} segments",
                ingested.log.len(),
                ingested.rejected.len(),
                ingested.log.segments().len()
            );
            write(&out, &ingested.log.to_json_string())
        }
        Command::FitFriction {
            logs,
            params,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let loaded = load_logs(&logs)?;
            let stage = fit_friction(&named(&loaded), &load_params(&params)?, &cfg)?;
            print_reports(ForceKind::Friction, std::slice::from_ref(&stage.report));
            write(
                &out,
                &ModelFile::friction(stage.curve, provenance(&logs)).to_json_string(),
            )
        }
        Command::FitPropulsion {
            logs,
            params,
            friction,
            config,
            level,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let friction = load_model(&friction, ForceKind::Friction)?;
            let loaded = load_logs(&logs)?;
            let stage = fit_propulsion(
                &named(&loaded),
                friction.as_curve()?,
                &load_params(&params)?,
                &cfg,
                levels(&level),
            )?;
            print_reports(ForceKind::Propulsion, &stage.reports);
            write(
                &out,
                &ModelFile::surface(ForceKind::Propulsion, stage.surface, provenance(&logs))
                    .to_json_string(),
            )
        }
        Command::FitBrake {
            logs,
            params,
            friction,
            propulsion,
            config,
            level,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let friction = load_model(&friction, ForceKind::Friction)?;
            let propulsion = load_model(&propulsion, ForceKind::Propulsion)?;
            let loaded = load_logs(&logs)?;
            let stage = fit_braking(
                &named(&loaded),
                friction.as_curve()?,
                propulsion.as_surface()?,
                &load_params(&params)?,
                &cfg,
                levels(&level),
            )?;
            print_reports(ForceKind::Braking, &stage.reports);
            write(
                &out,
                &ModelFile::surface(ForceKind::Braking, stage.surface, provenance(&logs))
                    .to_json_string(),
            )
        }
        Command::ExportPlot {
            model,
            level,
            log_axes,
            out,
        } => {
            let m = ModelFile::from_json_str(&read(&model)?)
                .map_err(|e| e.context(model.display().to_string()))?;
            let grid = plot_grid_kmh(PLOT_POINTS, PLOT_MIN_KMH, PLOT_MAX_KMH, log_axes);
            emit(out.as_deref(), &plot_csv(&m, &grid, level)?)
        }
        Command::Simulate {
            models,
            schedule,
            v0,
            dt,
            duration,
            out,
        } => {
            let m = load_models(&models)?;
            let sched = parse_schedule_csv(&read(&schedule)?)
                .map_err(|e| e.context(schedule.display().to_string()))?;
            let traj = simulate(&m, &sched, v0, dt, duration)?;
            emit(out.as_deref(), &traj.to_csv_string())
        }
        Command::Validate {
            logs,
            models,
            config,
            hist_bin,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let m = load_models(&models)?;
            let mut stats = ErrorStats::new(hist_bin)?;
            for (name, log) in load_logs(&logs)? {
                let accel = estimate_acceleration(&log, &cfg.estimator)
                    .map_err(|e| e.context(name.clone()))?;
                accumulate(&mut stats, &m, &log, &accel, None).map_err(|e| e.context(name))?;
            }
            let report = stats.report()?;
            print!("{}", report.to_table());
            match out {
                Some(p) => write(&p, &report.to_json_string()),
                None => Ok(()),
            }
        }
        Command::Invert {
            models,
            speed,
            slope,
            accel,
        } => {
            let m = load_models(&models)?;
            let cmd = inverse_actuation(&m, speed, slope, accel)?;
            println!("{}", serde_json::to_string(&cmd).map_err(Error::from)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
