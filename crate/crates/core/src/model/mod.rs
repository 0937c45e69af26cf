//! Maneuver-conditioned encoder-decoder, maneuver classifier and the
//! mixture over the six joint maneuver classes.
//!
//! The trajectory network embeds every history frame with a leaky-ReLU
//! layer, runs it through an encoder LSTM and feeds the final hidden state
//! (optionally concatenated with lateral and longitudinal one-hots) to a
//! decoder LSTM at every future step. A linear head turns each decoder
//! state into a [`GaussianStep`]. The classifier has its own embedding and
//! LSTM and two softmax heads. Both networks are trained separately.

mod classifier;
mod predictor;
mod train;
mod trajectory;

use alloc::vec::Vec;

pub use classifier::{ClassifierLayout, ClassifierNet};
pub use predictor::{mixture, ManeuverModel};
pub use train::{
    fit_classifier, fit_trajectory, train, EpochStats, TrainOptions, TrainReport, Trainable, GRAD_CHUNK,
};
pub use trajectory::{TrajectoryLayout, TrajectoryNet};

use crate::maneuvers::ManeuverLabel;
use crate::nnkernel::{gaussian, KernelError};
use crate::trackstore::{DOWNSAMPLE, FRAME_RATE_HZ, FUTURE_LEN, HISTORY_LEN, INPUT_CHANNELS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid argument: {0}")]
    Argument(&'static str),
    #[error("non-finite {0}")]
    Numeric(&'static str),
}

/// Model variants of the ablation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// Ego history only, single mode.
    VLstm,
    /// Ego and neighbor histories, single mode.
    SLstm,
    /// Maneuver-conditioned decoder weighted by the classifier.
    MLstm,
    /// As `MLstm` but with ground-truth maneuvers at evaluation.
    MLstmGt,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::VLstm, Variant::SLstm, Variant::MLstm, Variant::MLstmGt];

    pub fn name(self) -> &'static str {
        match self {
            Variant::VLstm => "V-LSTM",
            Variant::SLstm => "S-LSTM",
            Variant::MLstm => "M-LSTM",
            Variant::MLstmGt => "M-LSTM-GT",
        }
    }

    /// Accepts the display name or a lowercase form like `m_lstm`.
    pub fn parse(s: &str) -> Option<Self> {
        let norm = |c: char| match c {
            '-' => '_',
            c => c.to_ascii_lowercase(),
        };
        Self::ALL.into_iter().find(|v| {
            let name = v.name();
            name.len() == s.len() && name.chars().map(norm).eq(s.chars().map(norm))
        })
    }

    pub fn input_channels(self) -> usize {
        match self {
            Variant::VLstm => 2,
            _ => INPUT_CHANNELS,
        }
    }

    /// Whether the decoder input carries maneuver one-hots.
    pub fn uses_maneuvers(self) -> bool {
        matches!(self, Variant::MLstm | Variant::MLstmGt)
    }

    /// Whether evaluation needs a trained classifier.
    pub fn needs_classifier(self) -> bool {
        self == Variant::MLstm
    }

    /// Stable numeric code, used in checkpoint headers.
    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl core::fmt::Display for Variant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub variant: Variant,
    /// LSTM units of encoder, decoder and classifier.
    pub hidden: usize,
    /// Units of the input embedding layer.
    pub embed: usize,
    pub history_len: usize,
    pub future_len: usize,
    /// Meters per output unit: predicted means and deviations are
    /// multiplied by it.
    pub position_scale: f64,
    /// Meters per input unit: history coordinates are divided by it, and
    /// their rates of change (m/s) as well.
    pub input_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::new(Variant::MLstm)
    }
}

impl ModelConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            hidden: 128,
            embed: 64,
            history_len: HISTORY_LEN,
            future_len: FUTURE_LEN,
            position_scale: 1.0,
            input_scale: 1.0,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn input_channels(&self) -> usize {
        self.variant.input_channels()
    }

    /// Values per history row fed to the embedding: positions and their
    /// rates of change.
    pub fn feature_width(&self) -> usize {
        2 * self.input_channels()
    }

    pub fn decoder_input(&self) -> usize {
        if self.variant.uses_maneuvers() {
            self.hidden + 5
        } else {
            self.hidden
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.hidden == 0 || self.embed == 0 || self.history_len == 0 || self.future_len == 0 {
            return Err(ModelError::Argument("layer sizes and lengths must be positive"));
        }
        if !(self.position_scale.is_finite() && self.position_scale > 0.0) {
            return Err(ModelError::Argument("position_scale must be positive"));
        }
        if !(self.input_scale.is_finite() && self.input_scale > 0.0) {
            return Err(ModelError::Argument("input_scale must be positive"));
        }
        Ok(())
    }
}

/// Seconds between consecutive history rows.
const ROW_STEP_S: f64 = DOWNSAMPLE as f64 / FRAME_RATE_HZ;

fn row_positions(config: &ModelConfig, row: &[f64; INPUT_CHANNELS]) -> Vec<f64> {
    let inv_scale = 1.0 / config.input_scale;
    let channels = config.input_channels();
    let mut out = Vec::with_capacity(channels);
    out.extend_from_slice(&[row[0] * inv_scale, row[1] * inv_scale]);
    for pair in row[2..channels].chunks_exact(2) {
        if pair[0] == 0.0 && pair[1] == 0.0 {
            out.extend_from_slice(&[0.0, 0.0]);
        } else {
            out.extend_from_slice(&[(pair[0] - row[0]) * inv_scale, (pair[1] - row[1]) * inv_scale]);
        }
    }
    out
}

fn present(row: &[f64; INPUT_CHANNELS], channel: usize) -> bool {
    channel < 2 || {
        let k = channel & !1;
        row[k] != 0.0 || row[k + 1] != 0.0
    }
}

/// Network inputs for a history, one vector of
/// [`ModelConfig::feature_width`] values per row.
///
/// The first half of a row holds positions divided by `input_scale`, with
/// neighbor channels re-expressed relative to the ego position of the same
/// row so that a steady gap reads as a constant. The second half holds the
/// rates of change of those values per second, taken from the previous
/// row (the next one for the first row). Zero-filled (absent) neighbor
/// channels stay zero and so does the rate of a neighbor missing from
/// either row.
pub fn history_features(config: &ModelConfig, history: &[[f64; INPUT_CHANNELS]]) -> Vec<Vec<f64>> {
    let positions: Vec<Vec<f64>> = history.iter().map(|r| row_positions(config, r)).collect();
    let n = history.len();
    (0..n)
        .map(|i| {
            let mut out = positions[i].clone();
            let (a, b) = if i > 0 { (i - 1, i) } else { (0, 1.min(n - 1)) };
            out.extend((0..positions[i].len()).map(|c| {
                if a != b && present(&history[a], c) && present(&history[b], c) {
                    (positions[b][c] - positions[a][c]) / ROW_STEP_S
                } else {
                    0.0
                }
            }));
            out
        })
        .collect()
}

/// Bivariate Gaussian over the position at one future step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStep {
    pub mux: f64,
    pub muy: f64,
    pub sx: f64,
    pub sy: f64,
    pub rho: f64,
}

impl GaussianStep {
    /// Maps raw head outputs: `mu = scale * r`, `sigma = scale * exp(r)`,
    /// `rho = RHO_MAX * tanh(r)`.
    pub fn from_raw(raw: &[f64; 5], position_scale: f64) -> Self {
        let [mux, muy, sx, sy, rho] = gaussian::head(raw, position_scale);
        Self { mux, muy, sx, sy, rho }
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.mux, self.muy]
    }

    fn as_array(&self) -> [f64; 5] {
        [self.mux, self.muy, self.sx, self.sy, self.rho]
    }

    pub fn is_valid(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite()) && self.sx > 0.0 && self.sy > 0.0 && self.rho.abs() < 1.0
    }

    /// Negative log density of `p`.
    pub fn nll(&self, p: [f64; 2]) -> f64 {
        gaussian::nll(&self.as_array(), p)
    }

    pub fn density(&self, p: [f64; 2]) -> f64 {
        libm::exp(-self.nll(p))
    }
}

/// Mean per-step negative log likelihood of `truth`.
pub fn nll_loss(steps: &[GaussianStep], truth: &[[f64; 2]]) -> Result<f64, ModelError> {
    if steps.len() != truth.len() {
        return Err(ModelError::Dimension {
            what: "nll_loss truth length",
            expected: steps.len(),
            got: truth.len(),
        });
    }
    if steps.is_empty() {
        return Err(ModelError::Argument("empty trajectory"));
    }
    let total: f64 = steps.iter().zip(truth).map(|(s, y)| s.nll(*y)).sum();
    let loss = total / steps.len() as f64;
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(ModelError::Numeric("trajectory loss"))
    }
}

/// One mode of a [`ManeuverDistribution`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// `None` for single-mode predictors.
    pub label: Option<ManeuverLabel>,
    pub probability: f64,
    pub trajectory: Vec<GaussianStep>,
}

/// Mixture of per-maneuver trajectory distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverDistribution {
    pub modes: Vec<Mode>,
}

impl ManeuverDistribution {
    pub fn unimodal(trajectory: Vec<GaussianStep>) -> Self {
        Self {
            modes: alloc::vec![Mode {
                label: None,
                probability: 1.0,
                trajectory,
            }],
        }
    }

    pub fn total_probability(&self) -> f64 {
        self.modes.iter().map(|m| m.probability).sum()
    }

    /// Highest-probability mode; ties go to the earliest mode.
    pub fn most_likely(&self) -> Option<&Mode> {
        let mut best: Option<&Mode> = None;
        for m in &self.modes {
            if best.map_or(true, |b| m.probability > b.probability) {
                best = Some(m);
            }
        }
        best
    }

    /// Mixture density of position `p` at future step `step`.
    pub fn density(&self, step: usize, p: [f64; 2]) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.probability > 0.0)
            .filter_map(|m| m.trajectory.get(step).map(|g| m.probability * g.density(p)))
            .sum()
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub(crate) fn check_history(config: &ModelConfig, history: &[[f64; INPUT_CHANNELS]]) -> Result<(), ModelError> {
    if history.len() != config.history_len {
        return Err(ModelError::Dimension {
            what: "history length",
            expected: config.history_len,
            got: history.len(),
        });
    }
    Ok(())
}
