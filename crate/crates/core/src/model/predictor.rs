use alloc::vec::Vec;

use super::{ClassifierNet, GaussianStep, ManeuverDistribution, ModelError, Mode, TrajectoryNet, Variant};
use crate::maneuvers::ManeuverLabel;
use crate::trackstore::INPUT_CHANNELS;

/// Builds the six-mode mixture: the probability of joint class
/// `(lat, lon)` is `p_lat[lat] * p_lon[lon]`.
pub fn mixture(p_lat: [f64; 3], p_lon: [f64; 2], trajectories: Vec<Vec<GaussianStep>>) -> Result<ManeuverDistribution, ModelError> {
    if trajectories.len() != ManeuverLabel::COUNT {
        return Err(ModelError::Dimension {
            what: "mixture components",
            expected: ManeuverLabel::COUNT,
            got: trajectories.len(),
        });
    }
    let modes = ManeuverLabel::all()
        .into_iter()
        .zip(trajectories)
        .map(|(label, trajectory)| Mode {
            label: Some(label),
            probability: p_lat[label.lateral.index()] * p_lon[label.longitudinal.index()],
            trajectory,
        })
        .collect();
    Ok(ManeuverDistribution { modes })
}

/// Trajectory network plus, for maneuver variants, the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverModel {
    pub trajectory: TrajectoryNet,
    pub classifier: Option<ClassifierNet>,
}

impl ManeuverModel {
    pub fn new(trajectory: TrajectoryNet, classifier: Option<ClassifierNet>) -> Self {
        Self { trajectory, classifier }
    }

    pub fn variant(&self) -> Variant {
        self.trajectory.config().variant
    }

    /// Decodes all six maneuver-conditioned trajectories from one context.
    fn all_modes(&self, history: &[[f64; INPUT_CHANNELS]]) -> Result<Vec<Vec<GaussianStep>>, ModelError> {
        let ctx = self.trajectory.encode(history)?;
        ManeuverLabel::all()
            .into_iter()
            .map(|m| self.trajectory.decode(&ctx, Some(m)))
            .collect()
    }

    /// Mixture weighted by the classifier's maneuver probabilities.
    pub fn predict_multimodal(&self, history: &[[f64; INPUT_CHANNELS]]) -> Result<ManeuverDistribution, ModelError> {
        if !self.variant().uses_maneuvers() {
            return Err(ModelError::Argument("variant has no maneuver-conditioned decoder"));
        }
        let classifier = self
            .classifier
            .as_ref()
            .ok_or(ModelError::Argument("maneuver classifier weights missing"))?;
        let (p_lat, p_lon) = classifier.classify(history)?;
        mixture(p_lat, p_lon, self.all_modes(history)?)
    }

    /// Variant-appropriate prediction. `ground_truth` is required by
    /// `M-LSTM-GT`, which puts all probability on that class, and ignored
    /// by the other variants.
    pub fn predict(
        &self,
        history: &[[f64; INPUT_CHANNELS]],
        ground_truth: Option<ManeuverLabel>,
    ) -> Result<ManeuverDistribution, ModelError> {
        match self.variant() {
            Variant::VLstm | Variant::SLstm => Ok(ManeuverDistribution::unimodal(self.trajectory.predict(history, None)?)),
            Variant::MLstm => self.predict_multimodal(history),
            Variant::MLstmGt => {
                let truth = ground_truth.ok_or(ModelError::Argument("M-LSTM-GT needs ground-truth maneuvers"))?;
                let mut p_lat = [0.0; 3];
                let mut p_lon = [0.0; 2];
                p_lat[truth.lateral.index()] = 1.0;
                p_lon[truth.longitudinal.index()] = 1.0;
                mixture(p_lat, p_lon, self.all_modes(history)?)
            }
        }
    }
}
