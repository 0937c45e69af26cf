use alloc::format;
use alloc::vec;

use rand::Rng;

use super::{init_uniform, KernelError, ParamId, ParamSet, Tape, Var};

/// Gate blocks of the stacked `4H` pre-activation, in row order.
pub const GATE_NAMES: [&str; 4] = ["input", "forget", "cell", "output"];

/// Parameters of one LSTM layer.
///
/// `w_ih` is `4H x in`, `w_hh` is `4H x H` and `bias` is `4H x 1`; rows
/// are stacked in [`GATE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmParams {
    pub w_ih: ParamId,
    pub w_hh: ParamId,
    pub bias: ParamId,
    pub input: usize,
    pub hidden: usize,
}

impl LstmParams {
    /// Registers `{prefix}.w_ih`, `{prefix}.w_hh` and `{prefix}.bias`.
    pub fn register<R: Rng + ?Sized>(
        params: &mut ParamSet,
        prefix: &str,
        input: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = input + hidden;
        let w_ih = params.add(format!("{prefix}.w_ih"), init_uniform(4 * hidden, input, fan_in, rng));
        let w_hh = params.add(format!("{prefix}.w_hh"), init_uniform(4 * hidden, hidden, fan_in, rng));
        let mut b = init_uniform(4 * hidden, 1, fan_in, rng);
        for r in hidden..2 * hidden {
            b.set(r, 0, 1.0);
        }
        let bias = params.add(format!("{prefix}.bias"), b);
        Self {
            w_ih,
            w_hh,
            bias,
            input,
            hidden,
        }
    }

    /// Looks the three tensors up by name and checks their shapes.
    pub fn lookup(params: &ParamSet, prefix: &str, input: usize, hidden: usize) -> Result<Self, KernelError> {
        let find = |suffix: &str, rows: usize, cols: usize| -> Result<ParamId, KernelError> {
            let name = format!("{prefix}.{suffix}");
            let id = params.id_of(&name).ok_or(KernelError::MissingParam(name))?;
            let t = params.get(id);
            if t.shape() != (rows, cols) {
                return Err(KernelError::Dimension {
                    op: "lstm parameter",
                    expected: rows * cols,
                    got: t.len(),
                });
            }
            Ok(id)
        };
        Ok(Self {
            w_ih: find("w_ih", 4 * hidden, input)?,
            w_hh: find("w_hh", 4 * hidden, hidden)?,
            bias: find("bias", 4 * hidden, 1)?,
            input,
            hidden,
        })
    }

    /// Input contribution `w_ih x + bias`, reusable across steps with a
    /// constant input.
    pub fn project(&self, tape: &mut Tape<'_>, x: Var) -> Result<Var, KernelError> {
        tape.linear(self.w_ih, Some(self.bias), x)
    }

    pub fn zero_state(&self, tape: &mut Tape<'_>) -> (Var, Var) {
        let h = tape.leaf(vec![0.0; self.hidden]);
        let c = tape.leaf(vec![0.0; self.hidden]);
        (h, c)
    }
}

fn finite(tape: &Tape<'_>, v: Var, gate: &'static str) -> Result<Var, KernelError> {
    if tape.value(v).iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(KernelError::NonFinite(gate))
    }
}

/// One LSTM update given the projected input `w_ih x + bias`.
pub fn lstm_step(
    tape: &mut Tape<'_>,
    x_proj: Var,
    h_prev: Var,
    c_prev: Var,
    p: &LstmParams,
) -> Result<(Var, Var), KernelError> {
    let hh = tape.linear(p.w_hh, None, h_prev)?;
    let gates = tape.add(x_proj, hh)?;
    let n = p.hidden;
    let pre_i = tape.slice(gates, 0, n)?;
    let pre_f = tape.slice(gates, n, n)?;
    let pre_g = tape.slice(gates, 2 * n, n)?;
    let pre_o = tape.slice(gates, 3 * n, n)?;
    let i = tape.sigmoid(pre_i);
    let i = finite(tape, i, "input gate")?;
    let f = tape.sigmoid(pre_f);
    let f = finite(tape, f, "forget gate")?;
    let g = tape.tanh(pre_g);
    let g = finite(tape, g, "cell gate")?;
    let o = tape.sigmoid(pre_o);
    let o = finite(tape, o, "output gate")?;
    let keep = tape.mul(f, c_prev)?;
    let write = tape.mul(i, g)?;
    let c = tape.add(keep, write)?;
    let c = finite(tape, c, "cell state")?;
    let tc = tape.tanh(c);
    let h = tape.mul(o, tc)?;
    Ok((h, c))
}

/// `(h, c)` after feeding `x` into a cell with state `(h_prev, c_prev)`.
pub fn lstm_cell(
    tape: &mut Tape<'_>,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    p: &LstmParams,
) -> Result<(Var, Var), KernelError> {
    let x_proj = p.project(tape, x)?;
    lstm_step(tape, x_proj, h_prev, c_prev, p)
}
