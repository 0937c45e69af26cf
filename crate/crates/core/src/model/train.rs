use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassifierNet, ModelConfig, ModelError, TrajectoryNet};
use crate::exec::BatchExecutor;
use crate::nnkernel::{adam_step, AdamConfig, Grads, ParamSet};
use crate::trackstore::Sample;

/// Samples per gradient work unit. Fixed so that the floating-point
/// reduction order does not depend on the worker count.
pub const GRAD_CHUNK: usize = 16;

/// A network trained by minimising a per-sample loss.
pub trait Trainable: Sync {
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;
    /// Loss of one sample; adds its gradient to `grads`.
    fn accumulate(&self, sample: &Sample, grads: &mut Grads) -> Result<f64, ModelError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    /// Learning rate of the last epoch as a fraction of `adam.lr`; the
    /// rate follows a half cosine between the two. 1 keeps it constant.
    pub lr_final_ratio: f64,
    /// Batch gradients with a larger Euclidean norm are rescaled to this
    /// norm. 0 disables clipping.
    pub clip_norm: f64,
}

impl TrainOptions {
    /// Learning rate used during `epoch` (one-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let progress = if self.epochs > 1 {
            (epoch.saturating_sub(1)) as f64 / (self.epochs - 1) as f64
        } else {
            0.0
        };
        let r = self.lr_final_ratio;
        self.adam.lr * (r + (1.0 - r) * 0.5 * (1.0 + libm::cos(core::f64::consts::PI * progress.min(1.0))))
    }
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 128,
            seed: 0,
            adam: AdamConfig::default(),
            lr_final_ratio: 1.0,
            clip_norm: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// One-based epoch number.
    pub epoch: usize,
    /// Mean per-sample loss over the epoch, measured before each update.
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub steps: u64,
}

/// Mini-batch Adam on `model`. Batches are drawn from a seeded shuffle
/// each epoch; the gradient of a batch is the mean over its samples.
pub fn train<M, E>(
    model: &mut M,
    samples: &[Sample],
    opts: &TrainOptions,
    exec: &E,
    on_epoch: &mut dyn FnMut(EpochStats),
) -> Result<TrainReport, ModelError>
where
    M: Trainable,
    E: BatchExecutor,
{
    if samples.is_empty() {
        return Err(ModelError::Argument("empty training set"));
    }
    if opts.batch_size == 0 {
        return Err(ModelError::Argument("batch size must be positive"));
    }
    if !(opts.lr_final_ratio >= 0.0 && opts.clip_norm >= 0.0) {
        return Err(ModelError::Argument("learning-rate ratio and clip norm must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5348_5546_464c_4531);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut report = TrainReport::default();

    for epoch in 1..=opts.epochs {
        order.shuffle(&mut rng);
        let adam = AdamConfig {
            lr: opts.lr_at(epoch),
            ..opts.adam
        };
        let mut epoch_total = 0.0;
        for batch in order.chunks(opts.batch_size) {
            let chunks: Vec<&[usize]> = batch.chunks(GRAD_CHUNK).collect();
            let frozen: &M = model;
            let partials = exec.map(chunks.len(), |ci| -> Result<(f64, Grads), ModelError> {
                let mut grads = frozen.params().zero_grads();
                let mut loss = 0.0;
                for &i in chunks[ci] {
                    loss += frozen.accumulate(&samples[i], &mut grads)?;
                }
                Ok((loss, grads))
            });
            let mut total: Option<Grads> = None;
            let mut batch_loss = 0.0;
            for part in partials {
                let (loss, grads) = part?;
                batch_loss += loss;
                match &mut total {
                    Some(t) => t.add_assign(&grads),
                    None => total = Some(grads),
                }
            }
            let mut grads = total.expect("non-empty batch");
            grads.scale(1.0 / batch.len() as f64);
            if opts.clip_norm > 0.0 {
                let norm = grads.norm();
                if norm > opts.clip_norm {
                    grads.scale(opts.clip_norm / norm);
                }
            }
            adam_step(model.params_mut(), &grads, &adam)?;
            report.steps += 1;
            epoch_total += batch_loss;
        }
        let mean_loss = epoch_total / samples.len() as f64;
        report.epoch_losses.push(mean_loss);
        on_epoch(EpochStats { epoch, mean_loss });
    }
    Ok(report)
}

/// Trains a fresh trajectory network initialised from `opts.seed`.
/// Maneuver variants decode with each sample's ground-truth maneuver.
pub fn fit_trajectory<E: BatchExecutor>(
    samples: &[Sample],
    config: ModelConfig,
    opts: &TrainOptions,
    exec: &E,
    on_epoch: &mut dyn FnMut(EpochStats),
) -> Result<(TrajectoryNet, TrainReport), ModelError> {
    let mut net = TrajectoryNet::new(config, opts.seed)?;
    let report = train(&mut net, samples, opts, exec, on_epoch)?;
    Ok((net, report))
}

/// Trains a fresh maneuver classifier initialised from `opts.seed`.
pub fn fit_classifier<E: BatchExecutor>(
    samples: &[Sample],
    config: ModelConfig,
    opts: &TrainOptions,
    exec: &E,
    on_epoch: &mut dyn FnMut(EpochStats),
) -> Result<(ClassifierNet, TrainReport), ModelError> {
    let mut net = ClassifierNet::new(config, opts.seed ^ 0xC1A5_51F1)?;
    let report = train(&mut net, samples, opts, exec, on_epoch)?;
    Ok((net, report))
}
