//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and `#` comments are ignored.
//! Later assignments override earlier ones, and command-line flags
//! override the file. [`Config::dump`] prints the fully resolved
//! configuration in the same syntax.

use std::fmt::Write as _;
use std::path::Path;

use mlstm_core::benchmark::BenchmarkConfig;
use mlstm_core::model::{ModelConfig, TrainOptions, Variant};
use mlstm_core::nnkernel::AdamConfig;
use mlstm_core::synth::SynthConfig;

use crate::error::{CliError, Result};
use crate::io::tracks::{ColumnMap, UnitMode};

/// Default output scale (meters per model unit).
pub const DEFAULT_POSITION_SCALE: f64 = 50.0;
/// Default input scale (meters per model unit).
pub const DEFAULT_INPUT_SCALE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    /// Comma-separated trajectory tables, one per subset.
    pub tracks: String,
    pub units: UnitMode,
    pub columns: ColumnMap,
    /// Frames between consecutive prediction frames of a vehicle.
    pub stride: usize,
    pub train_samples: String,
    pub test_samples: String,
    pub out_dir: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub classifier_epochs: usize,
    pub classifier_lr: f64,
    /// Final learning rate as a fraction of the initial one (half-cosine
    /// schedule); 1 keeps the rate constant.
    pub lr_final_ratio: f64,
    /// Gradient norm clip; 0 disables clipping.
    pub clip_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: u64,
    /// Worker threads; 0 means the available parallelism.
    pub workers: usize,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub synth: SynthConfig,
    pub benchmark: BenchmarkConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            data: DataConfig {
                tracks: String::new(),
                units: UnitMode::Meters,
                columns: ColumnMap::default(),
                stride: 1,
                train_samples: String::new(),
                test_samples: String::new(),
                out_dir: ".".into(),
            },
            model: ModelConfig {
                position_scale: DEFAULT_POSITION_SCALE,
                input_scale: DEFAULT_INPUT_SCALE,
                ..ModelConfig::new(Variant::MLstm)
            },
            train: TrainConfig {
                epochs: 30,
                batch_size: 128,
                lr: 0.001,
                classifier_epochs: 30,
                classifier_lr: 0.001,
                lr_final_ratio: 1.0,
                clip_norm: 0.0,
            },
            synth: SynthConfig::default(),
            benchmark: BenchmarkConfig::default(),
        }
    }
}

trait ConfValue: Sized {
    fn parse(s: &str) -> Option<Self>;
    fn show(&self) -> String;
}

macro_rules! plain_value {
    ($($t:ty),*) => {$(
        impl ConfValue for $t {
            fn parse(s: &str) -> Option<Self> {
                s.parse().ok()
            }
            fn show(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
plain_value!(usize, u32, u64, i64, String);

impl ConfValue for f64 {
    fn parse(s: &str) -> Option<Self> {
        s.parse().ok().filter(|v: &f64| v.is_finite())
    }
    fn show(&self) -> String {
        self.to_string()
    }
}

impl ConfValue for Variant {
    fn parse(s: &str) -> Option<Self> {
        Variant::parse(s)
    }
    fn show(&self) -> String {
        self.name().into()
    }
}

impl ConfValue for UnitMode {
    fn parse(s: &str) -> Option<Self> {
        UnitMode::parse(s)
    }
    fn show(&self) -> String {
        self.name().into()
    }
}

struct Field {
    key: &'static str,
    get: fn(&Config) -> String,
    set: fn(&mut Config, &str) -> Option<()>,
}

macro_rules! fields {
    ($($key:literal => $($p:ident).+),* $(,)?) => {
        const FIELDS: &[Field] = &[$(Field {
            key: $key,
            get: |c| ConfValue::show(&c.$($p).+),
            set: |c, s| {
                c.$($p).+ = ConfValue::parse(s)?;
                Some(())
            },
        }),*];
    };
}

fields! {
    "seed" => seed,
    "workers" => workers,
    "data.tracks" => data.tracks,
    "data.units" => data.units,
    "data.column.vehicle" => data.columns.vehicle,
    "data.column.frame" => data.columns.frame,
    "data.column.x" => data.columns.x,
    "data.column.y" => data.columns.y,
    "data.column.lane" => data.columns.lane,
    "data.stride" => data.stride,
    "data.train_samples" => data.train_samples,
    "data.test_samples" => data.test_samples,
    "data.out_dir" => data.out_dir,
    "model.variant" => model.variant,
    "model.hidden" => model.hidden,
    "model.embed" => model.embed,
    "model.position_scale" => model.position_scale,
    "model.input_scale" => model.input_scale,
    "train.epochs" => train.epochs,
    "train.batch_size" => train.batch_size,
    "train.lr" => train.lr,
    "train.classifier_epochs" => train.classifier_epochs,
    "train.classifier_lr" => train.classifier_lr,
    "train.lr_final_ratio" => train.lr_final_ratio,
    "train.clip_norm" => train.clip_norm,
    "synth.n_vehicles" => synth.n_vehicles,
    "synth.n_lanes" => synth.n_lanes,
    "synth.duration_s" => synth.duration_s,
    "synth.lane_width_m" => synth.lane_width_m,
    "synth.pct_lane_changes" => synth.pct_lane_changes,
    "synth.pct_braking" => synth.pct_braking,
    "synth.brake_cascade" => synth.brake_cascade,
    "synth.position_noise_std" => synth.position_noise_std,
    "synth.speed_min" => synth.speed_min,
    "synth.speed_max" => synth.speed_max,
    "synth.spacing_m" => synth.spacing_m,
    "benchmark.seed" => benchmark.seed,
    "benchmark.n_vehicles" => benchmark.synth.n_vehicles,
    "benchmark.n_lanes" => benchmark.synth.n_lanes,
    "benchmark.duration_s" => benchmark.synth.duration_s,
    "benchmark.pct_lane_changes" => benchmark.synth.pct_lane_changes,
    "benchmark.pct_braking" => benchmark.synth.pct_braking,
    "benchmark.brake_cascade" => benchmark.synth.brake_cascade,
    "benchmark.position_noise_std" => benchmark.synth.position_noise_std,
    "benchmark.n_samples" => benchmark.n_samples,
    "benchmark.stride" => benchmark.stride,
    "benchmark.max_cruise_fraction" => benchmark.max_cruise_fraction,
}

impl Config {
    pub fn keys() -> impl Iterator<Item = &'static str> {
        FIELDS.iter().map(|f| f.key)
    }

    fn field(key: &str) -> Result<&'static Field> {
        FIELDS.iter().find(|f| f.key == key).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown config key `{key}`; valid keys: {}",
                Self::keys().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let field = Self::field(key)?;
        (field.set)(self, value.trim()).ok_or_else(|| CliError::Usage(format!("invalid value `{value}` for `{key}`")))
    }

    pub fn get(&self, key: &str) -> Result<String> {
        Ok((Self::field(key)?.get)(self))
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got `{assignment}`")))?;
        self.set(key.trim(), value)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut config = Self::default();
        config.apply_str(&text)?;
        Ok(config)
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for f in FIELDS {
            let _ = writeln!(out, "{} = {}", f.key, (f.get)(self));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if self.train.batch_size == 0 {
            return Err(CliError::Usage("train.batch_size must be positive".into()));
        }
        if !(self.train.lr > 0.0 && self.train.classifier_lr > 0.0) {
            return Err(CliError::Usage("learning rates must be positive".into()));
        }
        if !(self.train.lr_final_ratio >= 0.0 && self.train.clip_norm >= 0.0) {
            return Err(CliError::Usage("train.lr_final_ratio and train.clip_norm must be non-negative".into()));
        }
        if self.data.stride == 0 {
            return Err(CliError::Usage("data.stride must be positive".into()));
        }
        Ok(())
    }

    pub fn trajectory_options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            seed: self.seed,
            adam: AdamConfig {
                lr: self.train.lr,
                ..AdamConfig::default()
            },
            lr_final_ratio: self.train.lr_final_ratio,
            clip_norm: self.train.clip_norm,
        }
    }

    pub fn classifier_options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.train.classifier_epochs,
            adam: AdamConfig {
                lr: self.train.classifier_lr,
                ..AdamConfig::default()
            },
            ..self.trajectory_options()
        }
    }

    /// Benchmark settings; the scene has its own seed so that training
    /// seeds can vary over a fixed benchmark.
    pub fn benchmark_config(&self) -> BenchmarkConfig {
        self.benchmark
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        let mut c = Config::default();
        c.apply_str("seed = 9\nmodel.variant = s-lstm # comment\ntrain.lr=0.003\ndata.units = feet\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.model.variant, Variant::SLstm);
        assert_eq!(c.data.units, UnitMode::Feet);
        let mut d = Config::default();
        d.apply_str(&c.dump()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let err = Config::default().set("model.hiden", "3").unwrap_err();
        match err {
            CliError::Usage(m) => assert!(m.contains("model.hidden") && m.contains("train.epochs")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_are_usage_errors() {
        for (k, v) in [("model.hidden", "-3"), ("train.lr", "nan"), ("model.variant", "X"), ("data.units", "yards")] {
            assert!(matches!(Config::default().set(k, v), Err(CliError::Usage(_))));
        }
        assert!(matches!(Config::default().apply_str("just words"), Err(CliError::Usage(_))));
    }
}
