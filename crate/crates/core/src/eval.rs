//! RMSE by horizon, maneuver accuracy and the variant ablation.

use alloc::vec::Vec;

use crate::baseline::{cv_filter_predict, BaselineError};
use crate::exec::BatchExecutor;
use crate::maneuvers::ManeuverLabel;
use crate::model::{
    fit_classifier, fit_trajectory, ManeuverDistribution, ManeuverModel, ModelConfig, ModelError, TrainOptions,
    Variant,
};
use crate::trackstore::{Sample, FUTURE_LEN};

/// Evaluated horizons in seconds.
pub const HORIZONS_S: [usize; 5] = [1, 2, 3, 4, 5];
/// Future steps per second at the downsampled rate.
pub const STEPS_PER_SECOND: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("empty sample set")]
    Empty,
    #[error("{what}: expected {expected}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

/// Root mean squared Euclidean error at 1..5 s.
pub fn rmse_table(predictions: &[Vec<[f64; 2]>], truths: &[Vec<[f64; 2]>]) -> Result<[f64; 5], EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::Empty);
    }
    if predictions.len() != truths.len() {
        return Err(EvalError::Length {
            what: "truth count",
            expected: predictions.len(),
            got: truths.len(),
        });
    }
    let mut sums = [0.0; 5];
    for (p, t) in predictions.iter().zip(truths) {
        for (what, seq) in [("prediction length", p), ("truth length", t)] {
            if seq.len() != FUTURE_LEN {
                return Err(EvalError::Length {
                    what,
                    expected: FUTURE_LEN,
                    got: seq.len(),
                });
            }
        }
        for (k, sec) in HORIZONS_S.iter().enumerate() {
            let i = sec * STEPS_PER_SECOND - 1;
            let dx = p[i][0] - t[i][0];
            let dy = p[i][1] - t[i][1];
            sums[k] += dx * dx + dy * dy;
        }
    }
    let n = predictions.len() as f64;
    Ok(sums.map(|s| libm::sqrt(s / n)))
}

/// Means of the most probable mode; ties go to the lowest class index.
pub fn point_prediction(dist: &ManeuverDistribution) -> Vec<[f64; 2]> {
    dist.most_likely()
        .map(|m| m.trajectory.iter().map(|g| g.mean()).collect())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub lateral: f64,
    pub longitudinal: f64,
    pub joint: f64,
}

pub fn maneuver_accuracy(predicted: &[ManeuverLabel], truth: &[ManeuverLabel]) -> Result<Accuracy, EvalError> {
    if predicted.len() != truth.len() {
        return Err(EvalError::Length {
            what: "label count",
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let (mut lat, mut lon, mut joint) = (0usize, 0usize, 0usize);
    for (p, t) in predicted.iter().zip(truth) {
        lat += usize::from(p.lateral == t.lateral);
        lon += usize::from(p.longitudinal == t.longitudinal);
        joint += usize::from(p == t);
    }
    let n = truth.len() as f64;
    Ok(Accuracy {
        lateral: lat as f64 / n,
        longitudinal: lon as f64 / n,
        joint: joint as f64 / n,
    })
}

/// A row of the ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ConstantVelocity,
    Network(Variant),
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ConstantVelocity,
        Method::Network(Variant::VLstm),
        Method::Network(Variant::SLstm),
        Method::Network(Variant::MLstm),
        Method::Network(Variant::MLstmGt),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::ConstantVelocity => "CV",
            Method::Network(v) => v.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationRow {
    pub method: Method,
    pub rmse: [f64; 5],
    /// Only for the variant that predicts maneuvers with a classifier.
    pub accuracy: Option<Accuracy>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn row(&self, method: Method) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn rmse_at(&self, method: Method, seconds: usize) -> Option<f64> {
        let k = HORIZONS_S.iter().position(|s| *s == seconds)?;
        self.row(method).map(|r| r.rmse[k])
    }
}

pub fn truths(samples: &[Sample]) -> Vec<Vec<[f64; 2]>> {
    samples.iter().map(|s| s.future.clone()).collect()
}

/// Constant-velocity Kalman point predictions from the ego history.
pub fn cv_predictions(samples: &[Sample]) -> Result<Vec<Vec<[f64; 2]>>, EvalError> {
    samples
        .iter()
        .map(|s| cv_filter_predict(&s.ego_history(), FUTURE_LEN).map_err(EvalError::from))
        .collect()
}

/// Point predictions of a trained model plus, if it has a classifier,
/// the predicted maneuver of each sample.
pub fn model_predictions<E: BatchExecutor>(
    model: &ManeuverModel,
    samples: &[Sample],
    exec: &E,
) -> Result<(Vec<Vec<[f64; 2]>>, Option<Vec<ManeuverLabel>>), EvalError> {
    let classify = model.variant() == Variant::MLstm;
    let results = exec.map(samples.len(), |i| -> Result<_, EvalError> {
        let s = &samples[i];
        let dist = model.predict(&s.history, Some(s.label))?;
        let label = if classify {
            let cls = model
                .classifier
                .as_ref()
                .ok_or(ModelError::Argument("maneuver classifier weights missing"))?;
            Some(cls.predict_label(&s.history)?)
        } else {
            None
        };
        Ok((point_prediction(&dist), label))
    });
    let mut points = Vec::with_capacity(samples.len());
    let mut labels = Vec::new();
    for r in results {
        let (p, l) = r?;
        points.push(p);
        labels.extend(l);
    }
    Ok((points, classify.then_some(labels)))
}

/// Training settings for [`run_ablation`].
#[derive(Debug, Clone, PartialEq)]
pub struct AblationPlan {
    /// Sizes shared by all variants; the variant field is ignored.
    pub model: ModelConfig,
    pub trajectory: TrainOptions,
    pub classifier: TrainOptions,
    /// Rows are averaged over one training run per seed.
    pub seeds: Vec<u64>,
}

/// Stage notifications from [`run_ablation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AblationEvent {
    Training { what: &'static str, seed: u64 },
    Epoch { what: &'static str, epoch: usize, mean_loss: f64 },
    Evaluated { method: Method, rmse_5s: f64 },
}

/// Trains the variants that are not supplied in `pretrained` and evaluates
/// all five methods on `test`. The maneuver-conditioned trajectory network
/// and classifier are shared by `M-LSTM` and `M-LSTM-GT`. Pretrained
/// models are used only with a single seed.
pub fn run_ablation<E: BatchExecutor>(
    train: &[Sample],
    test: &[Sample],
    plan: &AblationPlan,
    pretrained: &[ManeuverModel],
    exec: &E,
    log: &mut dyn FnMut(AblationEvent),
) -> Result<AblationReport, EvalError> {
    if test.is_empty() || plan.seeds.is_empty() {
        return Err(EvalError::Empty);
    }
    let truth = truths(test);
    let mut sums: Vec<([f64; 5], Option<Accuracy>)> = Method::ALL.iter().map(|_| ([0.0; 5], None)).collect();

    let cv = rmse_table(&cv_predictions(test)?, &truth)?;
    log(AblationEvent::Evaluated {
        method: Method::ConstantVelocity,
        rmse_5s: cv[4],
    });
    sums[0].0 = cv.map(|v| v * plan.seeds.len() as f64);

    for &seed in &plan.seeds {
        let given = |v: Variant| {
            if plan.seeds.len() == 1 {
                pretrained.iter().find(|m| m.variant() == v).cloned()
            } else {
                None
            }
        };
        let mut fit = |variant: Variant, what: &'static str| -> Result<ManeuverModel, EvalError> {
            log(AblationEvent::Training { what, seed });
            let opts = TrainOptions { seed, ..plan.trajectory };
            let config = plan.model.with_variant(variant);
            let (traj, _) = fit_trajectory(train, config, &opts, exec, &mut |s| {
                log(AblationEvent::Epoch {
                    what,
                    epoch: s.epoch,
                    mean_loss: s.mean_loss,
                })
            })?;
            let classifier = if variant.needs_classifier() {
                log(AblationEvent::Training { what: "classifier", seed });
                let opts = TrainOptions { seed, ..plan.classifier };
                let (cls, _) = fit_classifier(train, config, &opts, exec, &mut |s| {
                    log(AblationEvent::Epoch {
                        what: "classifier",
                        epoch: s.epoch,
                        mean_loss: s.mean_loss,
                    })
                })?;
                Some(cls)
            } else {
                None
            };
            Ok(ManeuverModel::new(traj, classifier))
        };

        let v = match given(Variant::VLstm) {
            Some(m) => m,
            None => fit(Variant::VLstm, "V-LSTM")?,
        };
        let s = match given(Variant::SLstm) {
            Some(m) => m,
            None => fit(Variant::SLstm, "S-LSTM")?,
        };
        let m = match given(Variant::MLstm) {
            Some(m) => m,
            None => fit(Variant::MLstm, "M-LSTM")?,
        };
        let gt = match given(Variant::MLstmGt) {
            Some(m) => m,
            None => {
                let config = m.trajectory.config().with_variant(Variant::MLstmGt);
                let traj = crate::model::TrajectoryNet::from_params(config, m.trajectory.params().clone())?;
                ManeuverModel::new(traj, None)
            }
        };
        for (slot, model) in [(1, &v), (2, &s), (3, &m), (4, &gt)] {
            let (points, labels) = model_predictions(model, test, exec)?;
            let rmse = rmse_table(&points, &truth)?;
            log(AblationEvent::Evaluated {
                method: Method::ALL[slot],
                rmse_5s: rmse[4],
            });
            for k in 0..5 {
                sums[slot].0[k] += rmse[k];
            }
            if let Some(labels) = labels {
                let truth_labels: Vec<ManeuverLabel> = test.iter().map(|s| s.label).collect();
                let acc = maneuver_accuracy(&labels, &truth_labels)?;
                let prev = sums[slot].1.unwrap_or(Accuracy {
                    lateral: 0.0,
                    longitudinal: 0.0,
                    joint: 0.0,
                });
                sums[slot].1 = Some(Accuracy {
                    lateral: prev.lateral + acc.lateral,
                    longitudinal: prev.longitudinal + acc.longitudinal,
                    joint: prev.joint + acc.joint,
                });
            }
        }
    }

    let n = plan.seeds.len() as f64;
    let rows = Method::ALL
        .iter()
        .zip(sums)
        .map(|(&method, (rmse, acc))| AblationRow {
            method,
            rmse: rmse.map(|v| v / n),
            accuracy: acc.map(|a| Accuracy {
                lateral: a.lateral / n,
                longitudinal: a.longitudinal / n,
                joint: a.joint / n,
            }),
        })
        .collect();
    Ok(AblationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maneuvers::{Lateral, Longitudinal};
    use crate::model::{GaussianStep, Mode};
    use alloc::vec;

    fn constant(p: [f64; 2]) -> Vec<[f64; 2]> {
        vec![p; FUTURE_LEN]
    }

    #[test]
    fn perfect_predictions_give_zero() {
        let t: Vec<_> = (0..4).map(|i| constant([i as f64, 2.0 * i as f64])).collect();
        assert_eq!(rmse_table(&t, &t).unwrap(), [0.0; 5]);
    }

    #[test]
    fn three_four_five() {
        let t = vec![constant([1.0, 1.0]); 3];
        let p = vec![constant([1.3, 1.4]); 3];
        for v in rmse_table(&p, &t).unwrap() {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn uses_the_step_at_each_whole_second() {
        let t = vec![constant([0.0, 0.0])];
        let mut p = constant([0.0, 0.0]);
        p[4] = [1.0, 0.0];
        p[14] = [0.0, 3.0];
        assert_eq!(rmse_table(&[p], &t).unwrap(), [1.0, 0.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn rmse_errors() {
        assert_eq!(rmse_table(&[], &[]), Err(EvalError::Empty));
        assert!(matches!(rmse_table(&[constant([0.0; 2])], &[]), Err(EvalError::Length { .. })));
        assert!(matches!(
            rmse_table(&[vec![[0.0; 2]; 3]], &[constant([0.0; 2])]),
            Err(EvalError::Length { .. })
        ));
    }

    fn mode(p: f64, y: f64) -> Mode {
        Mode {
            label: None,
            probability: p,
            trajectory: vec![
                GaussianStep {
                    mux: 0.0,
                    muy: y,
                    sx: 1.0,
                    sy: 1.0,
                    rho: 0.0
                };
                FUTURE_LEN
            ],
        }
    }

    #[test]
    fn point_prediction_tie_goes_to_first() {
        let dist = ManeuverDistribution {
            modes: vec![mode(0.4, 1.0), mode(0.4, 2.0), mode(0.2, 3.0), mode(0.0, 4.0), mode(0.0, 5.0), mode(0.0, 6.0)],
        };
        assert_eq!(point_prediction(&dist), constant([0.0, 1.0]));
        let single = ManeuverDistribution { modes: vec![mode(1.0, 9.0)] };
        assert_eq!(point_prediction(&single), constant([0.0, 9.0]));
    }

    #[test]
    fn accuracy_per_axis() {
        let truth = vec![
            ManeuverLabel::new(Lateral::ChangeLeft, Longitudinal::Brake),
            ManeuverLabel::new(Lateral::KeepLane, Longitudinal::Normal),
        ];
        let acc = maneuver_accuracy(&truth, &truth).unwrap();
        assert_eq!((acc.lateral, acc.longitudinal, acc.joint), (1.0, 1.0, 1.0));
        let flipped: Vec<_> = truth
            .iter()
            .map(|l| {
                ManeuverLabel::new(
                    l.lateral,
                    match l.longitudinal {
                        Longitudinal::Normal => Longitudinal::Brake,
                        Longitudinal::Brake => Longitudinal::Normal,
                    },
                )
            })
            .collect();
        let acc = maneuver_accuracy(&flipped, &truth).unwrap();
        assert_eq!((acc.lateral, acc.longitudinal, acc.joint), (1.0, 0.0, 0.0));
        assert!(matches!(maneuver_accuracy(&truth[..1], &truth), Err(EvalError::Length { .. })));
    }
}
