use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_history, history_features, GaussianStep, ModelConfig, ModelError, Trainable};
use crate::maneuvers::ManeuverLabel;
use crate::nnkernel::{
    init_uniform, lstm_cell, lstm_step, Grads, KernelError, LstmParams, ParamId, ParamSet, Tape, Var, LEAKY_ALPHA,
};
use crate::trackstore::{Sample, INPUT_CHANNELS};

/// Parameter ids and configuration of a trajectory network; evaluates the
/// network against any compatible [`ParamSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLayout {
    config: ModelConfig,
    embed_w: ParamId,
    embed_b: ParamId,
    encoder: LstmParams,
    decoder: LstmParams,
    head_w: ParamId,
    head_b: ParamId,
}

fn lookup(params: &ParamSet, name: &str, rows: usize, cols: usize) -> Result<ParamId, ModelError> {
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
}

impl TrajectoryLayout {
    fn register(config: ModelConfig, params: &mut ParamSet, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = config.feature_width();
        let embed_w = params.add("traj.embed.w", init_uniform(config.embed, c, c, &mut rng));
        let embed_b = params.add("traj.embed.b", init_uniform(config.embed, 1, c, &mut rng));
        let encoder = LstmParams::register(params, "traj.enc", config.embed, config.hidden, &mut rng);
        let decoder = LstmParams::register(params, "traj.dec", config.decoder_input(), config.hidden, &mut rng);
        let head_w = params.add("traj.head.w", init_uniform(5, config.hidden, config.hidden, &mut rng));
        let head_b = params.add("traj.head.b", init_uniform(5, 1, config.hidden, &mut rng));
        Self {
            config,
            embed_w,
            embed_b,
            encoder,
            decoder,
            head_w,
            head_b,
        }
    }

    fn lookup(config: ModelConfig, params: &ParamSet) -> Result<Self, ModelError> {
        let c = config.feature_width();
        Ok(Self {
            config,
            embed_w: lookup(params, "traj.embed.w", config.embed, c)?,
            embed_b: lookup(params, "traj.embed.b", config.embed, 1)?,
            encoder: LstmParams::lookup(params, "traj.enc", config.embed, config.hidden)?,
            decoder: LstmParams::lookup(params, "traj.dec", config.decoder_input(), config.hidden)?,
            head_w: lookup(params, "traj.head.w", 5, config.hidden)?,
            head_b: lookup(params, "traj.head.b", 5, 1)?,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn encode_on(&self, tape: &mut Tape<'_>, history: &[[f64; INPUT_CHANNELS]]) -> Result<Var, ModelError> {
        check_history(&self.config, history)?;
        let (mut h, mut c) = self.encoder.zero_state(tape);
        for row in history_features(&self.config, history) {
            let x = tape.leaf(row);
            let e = tape.linear(self.embed_w, Some(self.embed_b), x)?;
            let e = tape.leaky_relu(e, LEAKY_ALPHA);
            (h, c) = lstm_cell(tape, e, h, c, &self.encoder)?;
        }
        Ok(h)
    }

    fn one_hot(&self, maneuver: Option<ManeuverLabel>) -> Result<Option<[f64; 5]>, ModelError> {
        match (self.config.variant.uses_maneuvers(), maneuver) {
            (true, Some(m)) => Ok(Some(m.one_hot())),
            (false, None) => Ok(None),
            (true, None) => Err(ModelError::Argument("maneuver-conditioned decoder needs a maneuver")),
            (false, Some(_)) => Err(ModelError::Argument("single-mode decoder takes no maneuver")),
        }
    }

    /// Raw five-value head outputs for every future step.
    fn decode_on(&self, tape: &mut Tape<'_>, context: Var, one_hot: Option<[f64; 5]>) -> Result<Vec<Var>, ModelError> {
        let input = match one_hot {
            Some(oh) => {
                let m = tape.leaf(oh.to_vec());
                tape.concat(&[context, m])
            }
            None => context,
        };
        let x_proj = self.decoder.project(tape, input)?;
        let (mut h, mut c) = self.decoder.zero_state(tape);
        let mut raws = Vec::with_capacity(self.config.future_len);
        for _ in 0..self.config.future_len {
            (h, c) = lstm_step(tape, x_proj, h, c, &self.decoder)?;
            raws.push(tape.linear(self.head_w, Some(self.head_b), h)?);
        }
        Ok(raws)
    }

    fn steps(&self, tape: &Tape<'_>, raws: &[Var]) -> Result<Vec<GaussianStep>, ModelError> {
        raws.iter()
            .map(|r| {
                let v = tape.value(*r);
                let step = GaussianStep::from_raw(&[v[0], v[1], v[2], v[3], v[4]], self.config.position_scale);
                if step.is_valid() {
                    Ok(step)
                } else {
                    Err(ModelError::Numeric("gaussian head output"))
                }
            })
            .collect()
    }

    pub fn encode(&self, params: &ParamSet, history: &[[f64; INPUT_CHANNELS]]) -> Result<Vec<f64>, ModelError> {
        let mut tape = Tape::new(params);
        let h = self.encode_on(&mut tape, history)?;
        Ok(tape.value(h).to_vec())
    }

    /// Decodes a context vector. `one_hot` is the lateral (3) and
    /// longitudinal (2) one-hots for maneuver variants and `None` otherwise.
    pub fn decode_one_hot(
        &self,
        params: &ParamSet,
        context: &[f64],
        one_hot: Option<&[f64]>,
    ) -> Result<Vec<GaussianStep>, ModelError> {
        if context.len() != self.config.hidden {
            return Err(ModelError::Dimension {
                what: "context length",
                expected: self.config.hidden,
                got: context.len(),
            });
        }
        let oh = match one_hot {
            None => None,
            Some(v) => {
                let valid_group = |g: &[f64]| {
                    g.iter().all(|x| *x == 0.0 || *x == 1.0) && g.iter().filter(|x| **x == 1.0).count() == 1
                };
                if v.len() != 5 || !valid_group(&v[..3]) || !valid_group(&v[3..]) {
                    return Err(ModelError::Argument("maneuver one-hot must have exactly one 1 per group"));
                }
                Some([v[0], v[1], v[2], v[3], v[4]])
            }
        };
        if oh.is_some() != self.config.variant.uses_maneuvers() {
            return Err(ModelError::Argument("maneuver one-hot presence does not match the variant"));
        }
        let mut tape = Tape::new(params);
        let ctx = tape.leaf(context.to_vec());
        let raws = self.decode_on(&mut tape, ctx, oh)?;
        self.steps(&tape, &raws)
    }

    pub fn decode(
        &self,
        params: &ParamSet,
        context: &[f64],
        maneuver: Option<ManeuverLabel>,
    ) -> Result<Vec<GaussianStep>, ModelError> {
        let oh = self.one_hot(maneuver)?;
        self.decode_one_hot(params, context, oh.as_ref().map(|v| &v[..]))
    }

    /// Trajectory NLL of the sample's future, decoding with its
    /// ground-truth maneuver on maneuver variants.
    pub fn loss(&self, params: &ParamSet, sample: &Sample) -> Result<f64, ModelError> {
        let mut tape = Tape::new(params);
        let loss = self.loss_on(&mut tape, sample)?;
        Ok(tape.scalar(loss))
    }

    fn loss_on(&self, tape: &mut Tape<'_>, sample: &Sample) -> Result<Var, ModelError> {
        if sample.future.len() != self.config.future_len {
            return Err(ModelError::Dimension {
                what: "future length",
                expected: self.config.future_len,
                got: sample.future.len(),
            });
        }
        let maneuver = self.config.variant.uses_maneuvers().then_some(sample.label);
        let oh = self.one_hot(maneuver)?;
        let ctx = self.encode_on(tape, &sample.history)?;
        let raws = self.decode_on(tape, ctx, oh)?;
        let mut terms = Vec::with_capacity(raws.len());
        for (raw, truth) in raws.iter().zip(&sample.future) {
            terms.push(tape.gaussian_nll(*raw, *truth, self.config.position_scale)?);
        }
        let total = tape.sum(&terms)?;
        let loss = tape.scale(total, 1.0 / terms.len() as f64);
        if !tape.scalar(loss).is_finite() {
            return Err(ModelError::Numeric("trajectory loss"));
        }
        Ok(loss)
    }

    /// Loss of one sample, with its gradient added to `grads`.
    pub fn loss_and_grads(&self, params: &ParamSet, sample: &Sample, grads: &mut Grads) -> Result<f64, ModelError> {
        let mut tape = Tape::new(params);
        let loss = self.loss_on(&mut tape, sample)?;
        tape.backward(loss, grads)?;
        Ok(tape.scalar(loss))
    }
}

/// Encoder-decoder with bivariate Gaussian output heads.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryNet {
    layout: TrajectoryLayout,
    params: ParamSet,
}

impl TrajectoryNet {
    /// Fresh network: uniform `±1/sqrt(fan_in)` weights, forget bias 1.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut params = ParamSet::new();
        let layout = TrajectoryLayout::register(config, &mut params, seed);
        Ok(Self { layout, params })
    }

    /// Wraps loaded parameters, checking names and shapes.
    pub fn from_params(config: ModelConfig, params: ParamSet) -> Result<Self, ModelError> {
        config.validate()?;
        let layout = TrajectoryLayout::lookup(config, &params)?;
        Ok(Self { layout, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.layout.config
    }

    pub fn layout(&self) -> &TrajectoryLayout {
        &self.layout
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn into_params(self) -> ParamSet {
        self.params
    }

    pub fn encode(&self, history: &[[f64; INPUT_CHANNELS]]) -> Result<Vec<f64>, ModelError> {
        self.layout.encode(&self.params, history)
    }

    pub fn decode(&self, context: &[f64], maneuver: Option<ManeuverLabel>) -> Result<Vec<GaussianStep>, ModelError> {
        self.layout.decode(&self.params, context, maneuver)
    }

    pub fn decode_one_hot(&self, context: &[f64], one_hot: Option<&[f64]>) -> Result<Vec<GaussianStep>, ModelError> {
        self.layout.decode_one_hot(&self.params, context, one_hot)
    }

    pub fn predict(
        &self,
        history: &[[f64; INPUT_CHANNELS]],
        maneuver: Option<ManeuverLabel>,
    ) -> Result<Vec<GaussianStep>, ModelError> {
        let ctx = self.encode(history)?;
        self.decode(&ctx, maneuver)
    }

    pub fn loss(&self, sample: &Sample) -> Result<f64, ModelError> {
        self.layout.loss(&self.params, sample)
    }

    /// Runs the raw-head mapping on arbitrary raw values; exposed for
    /// validity checks of the output parametrisation.
    pub fn head_mapping(&self, raw: &[f64; 5]) -> GaussianStep {
        GaussianStep::from_raw(raw, self.layout.config.position_scale)
    }
}

impl Trainable for TrajectoryNet {
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
