//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::commands::{self, DataSource, IngestArgs, Predictor, TableOutputs};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::exec::RayonExecutor;
use crate::io::checkpoint::load_model;
use crate::io::predictions::Grid;
use crate::io::samples::read_samples;

#[derive(Debug, Parser)]
#[command(name = "mlstm", version, about = "Maneuver-conditioned LSTM trajectory prediction")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Config override `key=value`; repeatable, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Same as `--set seed=N`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Same as `--set workers=N`; 0 uses every core.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Training sample file.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test sample file.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Use the synthetic benchmark from the `benchmark.*` keys instead of files.
    #[arg(long, conflicts_with_all = ["train", "test"])]
    pub benchmark: bool,
}

impl SourceArgs {
    fn source(&self) -> DataSource {
        if self.benchmark {
            DataSource::Benchmark
        } else {
            DataSource::Files {
                train: self.train.clone(),
                test: self.test.clone(),
            }
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse trajectory tables and write train/test sample files.
    Ingest {
        /// Trajectory tables, one per subset.
        #[arg(long = "tracks", num_args = 1..)]
        tracks: Vec<PathBuf>,
        #[arg(long)]
        train_out: Option<PathBuf>,
        #[arg(long)]
        test_out: Option<PathBuf>,
    },
    /// Generate a synthetic scene as a trajectory table.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Also write the script log as JSON lines.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Write the maneuver label of every labelable frame as JSON lines.
    Label {
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the configured variant and write a checkpoint.
    Train {
        #[command(flatten)]
        source: SourceArgs,
        /// Same as `--set model.variant=NAME`.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write prediction JSON for a sample file.
    Predict {
        /// Checkpoint path, or `cv` for the constant-velocity baseline.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Mixture density mesh `xmin,xmax,ymin,ymax,res` in local meters.
        #[arg(long, allow_hyphen_values = true, requires = "grid_out")]
        grid: Option<String>,
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// RMSE table of checkpoints and/or the baseline on a sample file.
    Eval {
        #[arg(long)]
        samples: PathBuf,
        /// Checkpoint path or `cv`; repeatable.
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        /// RMSE CSV path; printed to stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        accuracy_out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Train and evaluate CV, V-LSTM, S-LSTM, M-LSTM and M-LSTM-GT.
    Ablate {
        #[command(flatten)]
        source: SourceArgs,
        /// Comma-separated training seeds; rows are averaged over seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Checkpoints to use instead of training (single seed only).
        #[arg(long = "pretrained")]
        pretrained: Vec<PathBuf>,
        /// Output directory; defaults to `data.out_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Compare analytic gradients against central differences.
    Gradcheck {
        /// Sample file; a small synthetic set is used if absent.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        #[arg(long, default_value_t = 500)]
        max_coords: usize,
        /// Largest accepted relative error.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
}

fn resolve_config(common: &Common, variant: Option<&str>) -> Result<Config> {
    let mut config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for o in &common.overrides {
        config.apply_override(o)?;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(w) = common.workers {
        config.workers = w;
    }
    if let Some(v) = variant {
        config.set("model.variant", v)?;
    }
    config.validate()?;
    Ok(config)
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    let variant = match &cli.command {
        Command::Train { variant, .. } => variant.as_deref(),
        _ => None,
    };
    let config = resolve_config(&cli.common, variant)?;
    let exec = RayonExecutor::new(config.workers);
    info!("seed = {}, workers = {}", config.seed, exec.workers());
    for line in config.dump().lines() {
        info!("config: {line}");
    }

    match cli.command {
        Command::Ingest {
            tracks,
            train_out,
            test_out,
        } => {
            let s = commands::ingest(
                &config,
                IngestArgs {
                    tracks,
                    train_out,
                    test_out,
                },
            )?;
            info!("{} train / {} test samples, {} skipped", s.train, s.test, s.skipped);
        }
        Command::Synth { out, script } => commands::synth(&config, &out, script.as_deref())?,
        Command::Label { tracks, out } => {
            commands::label_tracks(&config, &tracks, &out)?;
        }
        Command::Train { source, out, .. } => {
            commands::train(&config, &source.source(), &out, &exec)?;
        }
        Command::Predict {
            model,
            samples,
            out,
            grid,
            grid_out,
        } => {
            let predictor = commands::load_predictor(&model)?;
            let samples = read_samples(&samples)?;
            let grid = grid.as_deref().map(Grid::parse).transpose()?;
            let grid_arg = match (&grid, &grid_out) {
                (Some(g), Some(p)) => Some((g, p.as_path())),
                _ => None,
            };
            commands::predict(&predictor, &samples, &out, grid_arg, &exec)?;
        }
        Command::Eval {
            samples,
            models,
            out,
            accuracy_out,
            json,
        } => {
            let samples = read_samples(&samples)?;
            let predictors = models
                .iter()
                .map(|m| commands::load_predictor(m))
                .collect::<Result<Vec<Predictor>>>()?;
            let report = commands::evaluate(&predictors, &samples, &exec)?;
            commands::write_tables(
                &report,
                samples.len(),
                config.seed,
                &TableOutputs {
                    rmse: out.as_deref(),
                    by_horizon: None,
                    accuracy: accuracy_out.as_deref(),
                    json: json.as_deref(),
                },
            )?;
        }
        Command::Ablate {
            source,
            seeds,
            pretrained,
            out_dir,
        } => {
            let models = pretrained.iter().map(|p| load_model(p)).collect::<Result<Vec<_>>>()?;
            let (report, n_test) = commands::ablate(&config, &source.source(), &seeds, &models, &exec)?;
            let dir = out_dir.unwrap_or_else(|| PathBuf::from(&config.data.out_dir));
            let csv = commands::write_tables(
                &report,
                n_test,
                config.seed,
                &TableOutputs {
                    rmse: Some(&dir.join("rmse.csv")),
                    by_horizon: Some(&dir.join("rmse_by_horizon.csv")),
                    accuracy: Some(&dir.join("accuracy.csv")),
                    json: Some(&dir.join("summary.json")),
                },
            )?;
            print!("{csv}");
            info!("wrote tables to {}", dir.display());
        }
        Command::Gradcheck {
            samples,
            count,
            eps,
            max_coords,
            tolerance,
        } => {
            let samples = match samples {
                Some(p) => read_samples(&p)?,
                None => gradcheck_samples(&config, count)?,
            };
            let samples = &samples[..count.min(samples.len())];
            let outcome = commands::gradcheck(&config.model, samples, eps, max_coords, config.seed)?;
            print!("{}", commands::format_gradcheck(&outcome));
            let err = outcome.max_rel_error();
            if !(err < tolerance) {
                return Err(CliError::Numeric(format!(
                    "gradient check failed: max relative error {err:.3e} >= {tolerance:.1e}"
                )));
            }
        }
    }
    Ok(())
}

/// A few samples from a small synthetic scene, one per vehicle.
pub fn gradcheck_samples(config: &Config, count: usize) -> Result<Vec<mlstm_core::trackstore::Sample>> {
    let synth = mlstm_core::synth::SynthConfig {
        n_vehicles: count.max(1) * 3,
        duration_s: 40.0,
        ..config.synth
    };
    let scene = mlstm_core::synth::generate(&synth, config.seed)?;
    let mut out = Vec::new();
    for id in scene.store.vehicle_ids() {
        if let Ok(s) = scene.store.build_sample(id, 150 + 7 * out.len() as i64) {
            out.push(s);
        }
        if out.len() == count {
            break;
        }
    }
    Ok(out)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
