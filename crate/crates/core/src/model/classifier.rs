use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_history, history_features, softmax, ModelConfig, ModelError, Trainable};
use crate::maneuvers::ManeuverLabel;
use crate::nnkernel::{init_uniform, lstm_cell, Grads, KernelError, LstmParams, ParamId, ParamSet, Tape, Var, LEAKY_ALPHA};
use crate::trackstore::{Sample, INPUT_CHANNELS};

/// Parameter ids of the maneuver classifier. It has its own embedding and
/// LSTM; only the input tensor is shared with the trajectory encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierLayout {
    config: ModelConfig,
    embed_w: ParamId,
    embed_b: ParamId,
    lstm: LstmParams,
    lat_w: ParamId,
    lat_b: ParamId,
    lon_w: ParamId,
    lon_b: ParamId,
}

impl ClassifierLayout {
    fn register(config: ModelConfig, params: &mut ParamSet, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = config.feature_width();
        let h = config.hidden;
        Self {
            config,
            embed_w: params.add("cls.embed.w", init_uniform(config.embed, c, c, &mut rng)),
            embed_b: params.add("cls.embed.b", init_uniform(config.embed, 1, c, &mut rng)),
            lstm: LstmParams::register(params, "cls.lstm", config.embed, h, &mut rng),
            lat_w: params.add("cls.lat.w", init_uniform(3, h, h, &mut rng)),
            lat_b: params.add("cls.lat.b", init_uniform(3, 1, h, &mut rng)),
            lon_w: params.add("cls.lon.w", init_uniform(2, h, h, &mut rng)),
            lon_b: params.add("cls.lon.b", init_uniform(2, 1, h, &mut rng)),
        }
    }

    fn lookup(config: ModelConfig, params: &ParamSet) -> Result<Self, ModelError> {
        let find = |name: &str, rows: usize, cols: usize| -> Result<ParamId, ModelError> {
            let id = params
                .id_of(name)
                .ok_or_else(|| KernelError::MissingParam(name.into()))?;
            if params.get(id).shape() != (rows, cols) {
                return Err(ModelError::Dimension {
                    what: "parameter shape",
                    expected: rows * cols,
                    got: params.get(id).len(),
                });
            }
            Ok(id)
        };
        let c = config.feature_width();
        let h = config.hidden;
        Ok(Self {
            config,
            embed_w: find("cls.embed.w", config.embed, c)?,
            embed_b: find("cls.embed.b", config.embed, 1)?,
            lstm: LstmParams::lookup(params, "cls.lstm", config.embed, h)?,
            lat_w: find("cls.lat.w", 3, h)?,
            lat_b: find("cls.lat.b", 3, 1)?,
            lon_w: find("cls.lon.w", 2, h)?,
            lon_b: find("cls.lon.b", 2, 1)?,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn logits_on(&self, tape: &mut Tape<'_>, history: &[[f64; INPUT_CHANNELS]]) -> Result<(Var, Var), ModelError> {
        check_history(&self.config, history)?;
        let (mut h, mut c) = self.lstm.zero_state(tape);
        for row in history_features(&self.config, history) {
            let x = tape.leaf(row);
            let e = tape.linear(self.embed_w, Some(self.embed_b), x)?;
            let e = tape.leaky_relu(e, LEAKY_ALPHA);
            (h, c) = lstm_cell(tape, e, h, c, &self.lstm)?;
        }
        let lat = tape.linear(self.lat_w, Some(self.lat_b), h)?;
        let lon = tape.linear(self.lon_w, Some(self.lon_b), h)?;
        Ok((lat, lon))
    }

    /// Raw lateral (3) and longitudinal (2) logits.
    pub fn logits(&self, params: &ParamSet, history: &[[f64; INPUT_CHANNELS]]) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
        let mut tape = Tape::new(params);
        let (lat, lon) = self.logits_on(&mut tape, history)?;
        Ok((tape.value(lat).to_vec(), tape.value(lon).to_vec()))
    }

    pub fn classify(&self, params: &ParamSet, history: &[[f64; INPUT_CHANNELS]]) -> Result<([f64; 3], [f64; 2]), ModelError> {
        let (lat, lon) = self.logits(params, history)?;
        let (lat, lon) = (softmax(&lat), softmax(&lon));
        if lat.iter().chain(&lon).any(|p| !p.is_finite()) {
            return Err(ModelError::Numeric("maneuver probabilities"));
        }
        Ok(([lat[0], lat[1], lat[2]], [lon[0], lon[1]]))
    }

    fn loss_on(&self, tape: &mut Tape<'_>, history: &[[f64; INPUT_CHANNELS]], label: ManeuverLabel) -> Result<Var, ModelError> {
        let (lat, lon) = self.logits_on(tape, history)?;
        let a = tape.softmax_xent(lat, label.lateral.index())?;
        let b = tape.softmax_xent(lon, label.longitudinal.index())?;
        let loss = tape.add(a, b)?;
        if !tape.scalar(loss).is_finite() {
            return Err(ModelError::Numeric("classifier loss"));
        }
        Ok(loss)
    }

    /// Sum of the lateral and longitudinal cross-entropies.
    pub fn loss(&self, params: &ParamSet, sample: &Sample) -> Result<f64, ModelError> {
        let mut tape = Tape::new(params);
        let loss = self.loss_on(&mut tape, &sample.history, sample.label)?;
        Ok(tape.scalar(loss))
    }

    pub fn loss_and_grads(&self, params: &ParamSet, sample: &Sample, grads: &mut Grads) -> Result<f64, ModelError> {
        let mut tape = Tape::new(params);
        let loss = self.loss_on(&mut tape, &sample.history, sample.label)?;
        tape.backward(loss, grads)?;
        Ok(tape.scalar(loss))
    }
}

/// Maneuver classification LSTM with lateral and longitudinal softmax heads.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierNet {
    layout: ClassifierLayout,
    params: ParamSet,
}

impl ClassifierNet {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut params = ParamSet::new();
        let layout = ClassifierLayout::register(config, &mut params, seed);
        Ok(Self { layout, params })
    }

    pub fn from_params(config: ModelConfig, params: ParamSet) -> Result<Self, ModelError> {
        config.validate()?;
        let layout = ClassifierLayout::lookup(config, &params)?;
        Ok(Self { layout, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.layout.config
    }

    pub fn layout(&self) -> &ClassifierLayout {
        &self.layout
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    /// Lateral and longitudinal class probabilities.
    pub fn classify(&self, history: &[[f64; INPUT_CHANNELS]]) -> Result<([f64; 3], [f64; 2]), ModelError> {
        self.layout.classify(&self.params, history)
    }

    pub fn logits(&self, history: &[[f64; INPUT_CHANNELS]]) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
        self.layout.logits(&self.params, history)
    }

    /// Most probable class per axis.
    pub fn predict_label(&self, history: &[[f64; INPUT_CHANNELS]]) -> Result<ManeuverLabel, ModelError> {
        let (lat, lon) = self.classify(history)?;
        let argmax = |p: &[f64]| {
            let mut best = 0;
            for (i, v) in p.iter().enumerate() {
                if *v > p[best] {
                    best = i;
                }
            }
            best
        };
        ManeuverLabel::from_class_index(2 * argmax(&lat) + argmax(&lon)).ok_or(ModelError::Argument("class index"))
    }

    pub fn loss(&self, sample: &Sample) -> Result<f64, ModelError> {
        self.layout.loss(&self.params, sample)
    }
}

impl Trainable for ClassifierNet {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn accumulate(&self, sample: &Sample, grads: &mut Grads) -> Result<f64, ModelError> {
        self.layout.loss_and_grads(&self.params, sample, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variant;
    use crate::nnkernel::Tensor2;
    use alloc::vec;

    #[test]
    fn zero_weights_are_uniform() {
        let config = ModelConfig {
            hidden: 4,
            embed: 3,
            ..ModelConfig::new(Variant::MLstm)
        };
        let mut net = ClassifierNet::new(config, 0).unwrap();
        let ids: Vec<_> = net.params().ids().collect();
        for id in ids {
            let (r, c) = net.params().get(id).shape();
            net.params_mut().set_value(id, Tensor2::zeros(r, c)).unwrap();
        }
        let (lat, lon) = net.classify(&vec![[1.0; INPUT_CHANNELS]; 16]).unwrap();
        for p in lat {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(lon, [0.5, 0.5]);
    }
}
