//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use mlstm_core::baseline::CvKalman;
use mlstm_core::benchmark;
use mlstm_core::eval::{
    cv_predictions, maneuver_accuracy, model_predictions, rmse_table, run_ablation, truths, AblationEvent, AblationPlan,
    AblationReport, AblationRow, Method,
};
use mlstm_core::exec::BatchExecutor;
use mlstm_core::maneuvers::{label, ManeuverLabel};
use mlstm_core::model::{
    fit_classifier, fit_trajectory, ClassifierNet, ManeuverDistribution, ManeuverModel, ModelConfig, Trainable,
    TrajectoryNet, Variant,
};
use mlstm_core::nnkernel::grad_check;
use mlstm_core::synth::{generate, ScriptedManeuver};
use mlstm_core::trackstore::{split_train_test, Sample, TrackStore, FUTURE_LEN};
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::exec::RayonExecutor;
use crate::io::checkpoint::{load_model, save_model};
use crate::io::predictions::{append_grid, to_json, Grid, PredictionRecord, GRID_HEADER};
use crate::io::samples::{read_samples, write_samples};
use crate::io::tables::{accuracy_csv, rmse_by_horizon_csv, rmse_csv, summary};
use crate::io::tracks::{parse_trajectories, write_trajectories};

pub fn create_parent(path: &Path) -> Result<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        None => Ok(()),
    }
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    create_parent(path)?;
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn require_path(flag: Option<PathBuf>, key_value: &str, what: &str) -> Result<PathBuf> {
    match flag {
        Some(p) => Ok(p),
        None if !key_value.is_empty() => Ok(PathBuf::from(key_value)),
        None => Err(CliError::Usage(format!("{what} is required"))),
    }
}

pub fn load_tracks(config: &Config, path: &Path) -> Result<TrackStore> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let tag = path.file_stem().and_then(|s| s.to_str()).unwrap_or("tracks");
    parse_trajectories(&text, &config.data.columns, config.data.units, tag).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub struct IngestArgs {
    pub tracks: Vec<PathBuf>,
    pub train_out: Option<PathBuf>,
    pub test_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub train: usize,
    pub test: usize,
    pub skipped: usize,
}

/// Parses each table as one subset, splits its vehicles three to one and
/// writes the train and test samples.
pub fn ingest(config: &Config, args: IngestArgs) -> Result<IngestSummary> {
    let mut paths = args.tracks;
    if paths.is_empty() {
        paths = config
            .data
            .tracks
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(PathBuf::from)
            .collect();
    }
    if paths.is_empty() {
        return Err(CliError::Usage("no trajectory tables given (--tracks or data.tracks)".into()));
    }
    let out_dir = PathBuf::from(&config.data.out_dir);
    let train_out = args
        .train_out
        .or_else(|| (!config.data.train_samples.is_empty()).then(|| config.data.train_samples.clone().into()))
        .unwrap_or_else(|| out_dir.join("train.samples"));
    let test_out = args
        .test_out
        .or_else(|| (!config.data.test_samples.is_empty()).then(|| config.data.test_samples.clone().into()))
        .unwrap_or_else(|| out_dir.join("test.samples"));

    let stores = paths.iter().map(|p| load_tracks(config, p)).collect::<Result<Vec<_>>>()?;
    let splits = split_train_test(&stores, config.seed);
    let (mut train, mut test, mut skipped) = (Vec::new(), Vec::new(), 0);
    for (store, split) in stores.iter().zip(&splits) {
        if split.undersized {
            log::warn!("subset `{}` has fewer than 4 vehicles", split.dataset_tag);
        }
        let a = store.build_samples(split.train.iter().copied(), config.data.stride);
        let b = store.build_samples(split.test.iter().copied(), config.data.stride);
        info!(
            "subset `{}`: {} vehicles, {} train / {} test samples, {} frames skipped",
            split.dataset_tag,
            store.len(),
            a.samples.len(),
            b.samples.len(),
            a.skipped + b.skipped
        );
        skipped += a.skipped + b.skipped;
        train.extend(a.samples);
        test.extend(b.samples);
    }
    create_parent(&train_out)?;
    create_parent(&test_out)?;
    write_samples(&train_out, &train)?;
    write_samples(&test_out, &test)?;
    info!("wrote {} and {}", train_out.display(), test_out.display());
    Ok(IngestSummary {
        train: train.len(),
        test: test.len(),
        skipped,
    })
}

#[derive(Serialize)]
struct ScriptRecord {
    vehicle_id: u32,
    frame: i64,
    maneuver: &'static str,
    lateral: Option<&'static str>,
    from_lane: Option<u32>,
    to_lane: Option<u32>,
    ratio: Option<f64>,
    regime_end: Option<i64>,
    leader: Option<u32>,
}

/// Writes a synthetic scene as a trajectory table and, optionally, its
/// script log as JSON lines.
pub fn synth(config: &Config, out: &Path, script: Option<&Path>) -> Result<()> {
    let scene = generate(&config.synth, config.seed)?;
    write_file(out, write_trajectories(&scene.store))?;
    info!("wrote {} vehicles over {} frames to {}", scene.store.len(), scene.frames, out.display());
    if let Some(path) = script {
        let mut text = String::new();
        for e in &scene.script {
            let rec = match e.maneuver {
                ScriptedManeuver::LaneChange {
                    lateral,
                    from_lane,
                    to_lane,
                } => ScriptRecord {
                    vehicle_id: e.vehicle_id,
                    frame: e.frame,
                    maneuver: "lane_change",
                    lateral: Some(lateral.name()),
                    from_lane: Some(from_lane),
                    to_lane: Some(to_lane),
                    ratio: None,
                    regime_end: None,
                    leader: None,
                },
                ScriptedManeuver::Brake {
                    ratio,
                    regime_end,
                    leader,
                    ..
                } => ScriptRecord {
                    vehicle_id: e.vehicle_id,
                    frame: e.frame,
                    maneuver: "brake",
                    lateral: None,
                    from_lane: None,
                    to_lane: None,
                    ratio: Some(ratio),
                    regime_end: Some(regime_end),
                    leader,
                },
            };
            text.push_str(&serde_json::to_string(&rec).expect("serializable"));
            text.push('\n');
        }
        write_file(path, text)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LabelRecord {
    vehicle_id: u32,
    frame: i64,
    lateral: &'static str,
    longitudinal: &'static str,
}

/// JSON lines of the maneuver label of every labelable frame.
pub fn label_tracks(config: &Config, tracks: &Path, out: &Path) -> Result<usize> {
    let store = load_tracks(config, tracks)?;
    let mut text = String::new();
    let mut count = 0;
    for track in store.tracks() {
        let (Some(first), Some(last)) = (track.first_frame(), track.last_frame()) else {
            continue;
        };
        for t in (first..=last).step_by(config.data.stride) {
            if let Ok(l) = label(track, t) {
                let rec = LabelRecord {
                    vehicle_id: track.id(),
                    frame: t,
                    lateral: l.lateral.name(),
                    longitudinal: l.longitudinal.name(),
                };
                text.push_str(&serde_json::to_string(&rec).expect("serializable"));
                text.push('\n');
                count += 1;
            }
        }
    }
    write_file(out, text)?;
    info!("wrote {count} labels to {}", out.display());
    Ok(count)
}

/// Training data: a sample file, or the synthetic benchmark.
pub enum DataSource {
    Files { train: Option<PathBuf>, test: Option<PathBuf> },
    Benchmark,
}

pub fn load_split(config: &Config, source: &DataSource, need_train: bool) -> Result<(Vec<Sample>, Vec<Sample>)> {
    match source {
        DataSource::Benchmark => {
            let b = benchmark::build(&config.benchmark_config())?;
            info!("benchmark: {} train / {} test samples", b.train.len(), b.test.len());
            Ok((b.train, b.test))
        }
        DataSource::Files { train, test } => {
            let train = if need_train {
                read_samples(&require_path(train.clone(), &config.data.train_samples, "--train")?)?
            } else {
                Vec::new()
            };
            let test = match (test, need_train) {
                (Some(p), _) => read_samples(p)?,
                (None, true) if config.data.test_samples.is_empty() => Vec::new(),
                _ => read_samples(&require_path(test.clone(), &config.data.test_samples, "--test")?)?,
            };
            Ok((train, test))
        }
    }
}

fn epoch_logger(what: &'static str) -> impl FnMut(mlstm_core::model::EpochStats) {
    move |s| info!("{what} epoch {} mean loss {:.6}", s.epoch, s.mean_loss)
}

/// Trains the configured variant. Classifier-based variants also get a
/// maneuver classifier.
pub fn train_model(config: &Config, train: &[Sample], exec: &RayonExecutor) -> Result<ManeuverModel> {
    let model_config = config.model;
    let (trajectory, report) = fit_trajectory(
        train,
        model_config,
        &config.trajectory_options(),
        exec,
        &mut epoch_logger("trajectory"),
    )?;
    info!("trajectory training: {} optimizer steps", report.steps);
    let classifier = if model_config.variant.needs_classifier() {
        let (cls, _) = fit_classifier(
            train,
            model_config,
            &config.classifier_options(),
            exec,
            &mut epoch_logger("classifier"),
        )?;
        Some(cls)
    } else {
        None
    };
    Ok(ManeuverModel::new(trajectory, classifier))
}

pub fn train(config: &Config, source: &DataSource, out: &Path, exec: &RayonExecutor) -> Result<ManeuverModel> {
    let (train, _) = load_split(config, source, true)?;
    if train.is_empty() {
        return Err(CliError::Data("training set is empty".into()));
    }
    let model = train_model(config, &train, exec)?;
    create_parent(out)?;
    save_model(out, &model)?;
    info!("wrote {}", out.display());
    Ok(model)
}

/// A predictor loaded for `predict` or `eval`.
pub enum Predictor {
    ConstantVelocity,
    Model(Box<ManeuverModel>),
}

impl Predictor {
    pub fn name(&self) -> &'static str {
        match self {
            Predictor::ConstantVelocity => Method::ConstantVelocity.name(),
            Predictor::Model(m) => m.variant().name(),
        }
    }

    pub fn predict(&self, sample: &Sample) -> Result<ManeuverDistribution> {
        match self {
            Predictor::ConstantVelocity => {
                let steps = CvKalman::default()
                    .forecast(&sample.ego_history(), FUTURE_LEN)
                    .map_err(|e| CliError::Numeric(e.to_string()))?;
                Ok(ManeuverDistribution::unimodal(steps))
            }
            Predictor::Model(m) => Ok(m.predict(&sample.history, Some(sample.label))?),
        }
    }
}

pub fn predict(
    predictor: &Predictor,
    samples: &[Sample],
    out: &Path,
    grid: Option<(&Grid, &Path)>,
    exec: &RayonExecutor,
) -> Result<()> {
    let dists = exec.map(samples.len(), |i| predictor.predict(&samples[i]));
    let dists = dists.into_iter().collect::<Result<Vec<_>>>()?;
    let records: Vec<PredictionRecord> = samples.iter().zip(&dists).map(|(s, d)| PredictionRecord::new(s, d)).collect();
    write_file(out, to_json(&records))?;
    info!("wrote {} predictions to {}", records.len(), out.display());
    if let Some((grid, path)) = grid {
        let mut text = String::from(GRID_HEADER);
        text.push('\n');
        for (i, (s, d)) in samples.iter().zip(&dists).enumerate() {
            append_grid(&mut text, i, s, d, grid);
        }
        write_file(path, text)?;
        info!("wrote density grid to {}", path.display());
    }
    Ok(())
}

/// RMSE rows (and classifier accuracy) of each predictor on `samples`.
pub fn evaluate(predictors: &[Predictor], samples: &[Sample], exec: &RayonExecutor) -> Result<AblationReport> {
    let truth = truths(samples);
    let mut rows = Vec::new();
    for p in predictors {
        let row = match p {
            Predictor::ConstantVelocity => AblationRow {
                method: Method::ConstantVelocity,
                rmse: rmse_table(&cv_predictions(samples)?, &truth)?,
                accuracy: None,
            },
            Predictor::Model(m) => {
                let (points, labels) = model_predictions(m, samples, exec)?;
                let accuracy = match labels {
                    Some(l) => {
                        let t: Vec<ManeuverLabel> = samples.iter().map(|s| s.label).collect();
                        Some(maneuver_accuracy(&l, &t)?)
                    }
                    None => None,
                };
                AblationRow {
                    method: Method::Network(m.variant()),
                    rmse: rmse_table(&points, &truth)?,
                    accuracy,
                }
            }
        };
        info!("{}: RMSE at 5 s {:.4} m", p.name(), row.rmse[4]);
        rows.push(row);
    }
    Ok(AblationReport { rows })
}

pub fn load_predictor(spec: &Path) -> Result<Predictor> {
    if spec.as_os_str().eq_ignore_ascii_case("cv") {
        Ok(Predictor::ConstantVelocity)
    } else {
        Ok(Predictor::Model(Box::new(load_model(spec)?)))
    }
}

pub struct TableOutputs<'a> {
    pub rmse: Option<&'a Path>,
    pub by_horizon: Option<&'a Path>,
    pub accuracy: Option<&'a Path>,
    pub json: Option<&'a Path>,
}

/// Writes the report tables; the RMSE CSV goes to stdout without a path.
pub fn write_tables(report: &AblationReport, samples: usize, seed: u64, out: &TableOutputs<'_>) -> Result<String> {
    let csv = rmse_csv(&report.rows);
    match out.rmse {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = out.by_horizon {
        write_file(p, rmse_by_horizon_csv(&report.rows))?;
    }
    if let Some(p) = out.accuracy {
        write_file(p, accuracy_csv(&report.rows))?;
    }
    if let Some(p) = out.json {
        let json = serde_json::to_string_pretty(&summary(report, samples, seed)).expect("serializable");
        write_file(p, json)?;
    }
    Ok(csv)
}

/// Trains (unless supplied) and evaluates every method of the ablation.
pub fn ablate(
    config: &Config,
    source: &DataSource,
    seeds: &[u64],
    pretrained: &[ManeuverModel],
    exec: &RayonExecutor,
) -> Result<(AblationReport, usize)> {
    let (train, test) = load_split(config, source, true)?;
    if test.is_empty() {
        return Err(CliError::Data("test set is empty".into()));
    }
    let plan = AblationPlan {
        model: config.model,
        trajectory: config.trajectory_options(),
        classifier: config.classifier_options(),
        seeds: if seeds.is_empty() { vec![config.seed] } else { seeds.to_vec() },
    };
    let report = run_ablation(&train, &test, &plan, pretrained, exec, &mut |e| match e {
        AblationEvent::Training { what, seed } => info!("training {what} (seed {seed})"),
        AblationEvent::Epoch { what, epoch, mean_loss } => info!("{what} epoch {epoch} mean loss {mean_loss:.6}"),
        AblationEvent::Evaluated { method, rmse_5s } => info!("{}: RMSE at 5 s {rmse_5s:.4} m", method.name()),
    })?;
    Ok((report, test.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckOutcome {
    pub trajectory: f64,
    pub classifier: f64,
    pub coords: usize,
}

impl GradCheckOutcome {
    pub fn max_rel_error(&self) -> f64 {
        self.trajectory.max(self.classifier)
    }
}

fn check_net<N: Trainable>(
    net: &mut N,
    samples: &[Sample],
    eps: f64,
    max_coords: usize,
    seed: u64,
    loss: impl Fn(&N, &Sample) -> f64,
    rebuild: impl Fn(&mlstm_core::nnkernel::ParamSet) -> N,
) -> Result<(f64, usize)> {
    let mut grads = net.params().zero_grads();
    for s in samples {
        net.accumulate(s, &mut grads)?;
    }
    let mut params = net.params().clone();
    let report = grad_check(
        &mut params,
        |p| {
            let n = rebuild(p);
            samples.iter().map(|s| loss(&n, s)).sum()
        },
        &grads,
        eps,
        max_coords,
        seed,
    );
    Ok((report.max_rel_error, report.coords_checked))
}

/// Central-difference check of the trajectory NLL and classifier
/// cross-entropy gradients, summed over `samples`.
pub fn gradcheck(config: &ModelConfig, samples: &[Sample], eps: f64, max_coords: usize, seed: u64) -> Result<GradCheckOutcome> {
    if samples.is_empty() {
        return Err(CliError::Data("gradcheck needs at least one sample".into()));
    }
    let traj_config = if config.variant == Variant::MLstmGt {
        config.with_variant(Variant::MLstm)
    } else {
        *config
    };
    let mut traj = TrajectoryNet::new(traj_config, seed)?;
    let (t_err, t_n) = check_net(
        &mut traj,
        samples,
        eps,
        max_coords,
        seed,
        |n, s| n.loss(s).unwrap_or(f64::NAN),
        |p| TrajectoryNet::from_params(traj_config, p.clone()).expect("same layout"),
    )?;
    let cls_config = config.with_variant(Variant::MLstm);
    let mut cls = ClassifierNet::new(cls_config, seed)?;
    let (c_err, c_n) = check_net(
        &mut cls,
        samples,
        eps,
        max_coords,
        seed,
        |n, s| n.loss(s).unwrap_or(f64::NAN),
        |p| ClassifierNet::from_params(cls_config, p.clone()).expect("same layout"),
    )?;
    Ok(GradCheckOutcome {
        trajectory: t_err,
        classifier: c_err,
        coords: t_n + c_n,
    })
}

pub fn format_gradcheck(o: &GradCheckOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "coordinates checked: {}", o.coords);
    let _ = writeln!(s, "trajectory NLL max relative error: {:.3e}", o.trajectory);
    let _ = writeln!(s, "classifier cross-entropy max relative error: {:.3e}", o.classifier);
    let _ = writeln!(s, "max relative error: {:.3e}", o.max_rel_error());
    s
}
