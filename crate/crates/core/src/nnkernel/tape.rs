use alloc::vec;
use alloc::vec::Vec;

use super::gaussian;
use super::{Grads, KernelError, ParamId, ParamSet};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(ParamId),
    Linear {
        w: ParamId,
        b: Option<ParamId>,
        x: Var,
    },
    Add(Var, Var),
    Mul(Var, Var),
    Sigmoid(Var),
    Tanh(Var),
    LeakyRelu {
        x: Var,
        alpha: f64,
    },
    Concat(Vec<Var>),
    Slice {
        x: Var,
        start: usize,
    },
    Sum(Vec<Var>),
    Scale {
        x: Var,
        k: f64,
    },
    SoftmaxXent {
        logits: Var,
        target: usize,
    },
    GaussianNll {
        raw: Var,
        truth: [f64; 2],
        scale: f64,
    },
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

/// Forward record of primitive operations; [`Tape::backward`] replays it
/// in reverse.
#[derive(Debug)]
pub struct Tape<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
}

fn check_len(op: &'static str, expected: usize, got: usize) -> Result<(), KernelError> {
    if expected == got {
        Ok(())
    } else {
        Err(KernelError::Dimension { op, expected, got })
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `x` for positive inputs, `alpha * x` otherwise.
pub fn leaky_relu(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        alpha * x
    }
}

/// Stable log-softmax of `logits` evaluated at `target`, plus the softmax.
pub(crate) fn log_softmax_at(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
    let total: f64 = exps.iter().sum();
    let lse = max + libm::log(total);
    let probs = exps.into_iter().map(|e| e / total).collect();
    (logits[target] - lse, probs)
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Self {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn params(&self) -> &'p ParamSet {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    fn unary(&mut self, x: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let value = self.value(x).iter().map(|&v| f(v)).collect();
        self.push(value, op)
    }

    /// Constant input; receives no gradient outside the tape.
    pub fn leaf(&mut self, value: Vec<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    /// A whole parameter tensor as a flat vector.
    pub fn param(&mut self, id: ParamId) -> Var {
        let value = self.params.get(id).as_slice().to_vec();
        self.push(value, Op::Param(id))
    }

    /// `w x + b`.
    pub fn linear(&mut self, w: ParamId, b: Option<ParamId>, x: Var) -> Result<Var, KernelError> {
        let wt = self.params.get(w);
        check_len("linear input", wt.cols(), self.value(x).len())?;
        let mut out = vec![0.0; wt.rows()];
        wt.matvec(self.value(x), &mut out);
        if let Some(b) = b {
            let bias = self.params.get(b).as_slice();
            check_len("linear bias", wt.rows(), bias.len())?;
            for (o, bi) in out.iter_mut().zip(bias) {
                *o += bi;
            }
        }
        Ok(self.push(out, Op::Linear { w, b, x }))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        check_len("add", self.value(a).len(), self.value(b).len())?;
        let value = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x + y).collect();
        Ok(self.push(value, Op::Add(a, b)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        check_len("mul", self.value(a).len(), self.value(b).len())?;
        let value = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).collect();
        Ok(self.push(value, Op::Mul(a, b)))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(x, sigmoid, Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, libm::tanh, Op::Tanh(x))
    }

    pub fn leaky_relu(&mut self, x: Var, alpha: f64) -> Var {
        self.unary(x, |v| leaky_relu(v, alpha), Op::LeakyRelu { x, alpha })
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let mut value = Vec::with_capacity(parts.iter().map(|p| self.value(*p).len()).sum());
        for p in parts {
            value.extend_from_slice(self.value(*p));
        }
        self.push(value, Op::Concat(parts.to_vec()))
    }

    pub fn slice(&mut self, x: Var, start: usize, len: usize) -> Result<Var, KernelError> {
        let src = self.value(x);
        if start + len > src.len() {
            return Err(KernelError::Dimension {
                op: "slice",
                expected: start + len,
                got: src.len(),
            });
        }
        let value = src[start..start + len].to_vec();
        Ok(self.push(value, Op::Slice { x, start }))
    }

    /// Elementwise sum of equally sized nodes.
    pub fn sum(&mut self, parts: &[Var]) -> Result<Var, KernelError> {
        let Some(first) = parts.first() else {
            return Ok(self.leaf(vec![0.0]));
        };
        let n = self.value(*first).len();
        let mut value = vec![0.0; n];
        for p in parts {
            check_len("sum", n, self.value(*p).len())?;
            for (a, b) in value.iter_mut().zip(self.value(*p)) {
                *a += b;
            }
        }
        Ok(self.push(value, Op::Sum(parts.to_vec())))
    }

    pub fn scale(&mut self, x: Var, k: f64) -> Var {
        self.unary(x, |v| k * v, Op::Scale { x, k })
    }

    /// `-log softmax(logits)[target]`, computed through log-sum-exp.
    pub fn softmax_xent(&mut self, logits: Var, target: usize) -> Result<Var, KernelError> {
        let l = self.value(logits);
        if target >= l.len() {
            return Err(KernelError::Index {
                index: target,
                classes: l.len(),
            });
        }
        let (logp, _) = log_softmax_at(l, target);
        Ok(self.push(vec![-logp], Op::SoftmaxXent { logits, target }))
    }

    /// Negative log density of `truth` under the bivariate Gaussian whose
    /// five raw head outputs are `raw`; see [`gaussian::head`].
    pub fn gaussian_nll(&mut self, raw: Var, truth: [f64; 2], scale: f64) -> Result<Var, KernelError> {
        let r = self.value(raw);
        check_len("gaussian_nll", 5, r.len())?;
        let (nll, _) = gaussian::nll_and_grad(&[r[0], r[1], r[2], r[3], r[4]], truth, scale);
        Ok(self.push(vec![nll], Op::GaussianNll { raw, truth, scale }))
    }

    /// Accumulates d(root)/d(param) into `grads`. `root` must be a scalar.
    pub fn backward(&self, root: Var, grads: &mut Grads) -> Result<(), KernelError> {
        check_len("backward root", 1, self.value(root).len())?;
        let mut adj: Vec<Vec<f64>> = vec![Vec::new(); root.0 + 1];
        adj[root.0] = vec![1.0];

        fn slot<'a>(adj: &'a mut [Vec<f64>], v: Var, len: usize) -> &'a mut [f64] {
            let a = &mut adj[v.0];
            if a.is_empty() {
                *a = vec![0.0; len];
            }
            a
        }

        for i in (0..=root.0).rev() {
            let g = core::mem::take(&mut adj[i]);
            if g.is_empty() {
                continue;
            }
            let node = &self.nodes[i];
            match &node.op {
                Op::Leaf => {}
                Op::Param(id) => {
                    for (a, b) in grads.get_mut(*id).as_mut_slice().iter_mut().zip(&g) {
                        *a += b;
                    }
                }
                Op::Linear { w, b, x } => {
                    let xv = self.value(*x);
                    grads.get_mut(*w).outer_acc(&g, xv);
                    if let Some(b) = b {
                        for (a, gi) in grads.get_mut(*b).as_mut_slice().iter_mut().zip(&g) {
                            *a += gi;
                        }
                    }
                    let n = xv.len();
                    self.params.get(*w).matvec_t_acc(&g, slot(&mut adj, *x, n));
                }
                Op::Add(a, b) => {
                    for v in [*a, *b] {
                        let s = slot(&mut adj, v, g.len());
                        for (si, gi) in s.iter_mut().zip(&g) {
                            *si += gi;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let s = slot(&mut adj, *a, g.len());
                    for ((si, gi), bi) in s.iter_mut().zip(&g).zip(bv) {
                        *si += gi * bi;
                    }
                    let s = slot(&mut adj, *b, g.len());
                    for ((si, gi), ai) in s.iter_mut().zip(&g).zip(av) {
                        *si += gi * ai;
                    }
                }
                Op::Sigmoid(x) => {
                    let s = slot(&mut adj, *x, g.len());
                    for ((si, gi), y) in s.iter_mut().zip(&g).zip(&node.value) {
                        *si += gi * y * (1.0 - y);
                    }
                }
                Op::Tanh(x) => {
                    let s = slot(&mut adj, *x, g.len());
                    for ((si, gi), y) in s.iter_mut().zip(&g).zip(&node.value) {
                        *si += gi * (1.0 - y * y);
                    }
                }
                Op::LeakyRelu { x, alpha } => {
                    let xv = self.value(*x);
                    let s = slot(&mut adj, *x, g.len());
                    for ((si, gi), xi) in s.iter_mut().zip(&g).zip(xv) {
                        *si += if *xi > 0.0 { *gi } else { alpha * gi };
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let n = self.value(*p).len();
                        let s = slot(&mut adj, *p, n);
                        for (si, gi) in s.iter_mut().zip(&g[offset..offset + n]) {
                            *si += gi;
                        }
                        offset += n;
                    }
                }
                Op::Slice { x, start } => {
                    let n = self.value(*x).len();
                    let s = slot(&mut adj, *x, n);
                    for (si, gi) in s[*start..*start + g.len()].iter_mut().zip(&g) {
                        *si += gi;
                    }
                }
                Op::Sum(parts) => {
                    for p in parts {
                        let s = slot(&mut adj, *p, g.len());
                        for (si, gi) in s.iter_mut().zip(&g) {
                            *si += gi;
                        }
                    }
                }
                Op::Scale { x, k } => {
                    let s = slot(&mut adj, *x, g.len());
                    for (si, gi) in s.iter_mut().zip(&g) {
                        *si += k * gi;
                    }
                }
                Op::SoftmaxXent { logits, target } => {
                    let (_, probs) = log_softmax_at(self.value(*logits), *target);
                    let s = slot(&mut adj, *logits, probs.len());
                    for (j, (si, p)) in s.iter_mut().zip(&probs).enumerate() {
                        let onehot = if j == *target { 1.0 } else { 0.0 };
                        *si += g[0] * (p - onehot);
                    }
                }
                Op::GaussianNll { raw, truth, scale } => {
                    let r = self.value(*raw);
                    let (_, d) = gaussian::nll_and_grad(&[r[0], r[1], r[2], r[3], r[4]], *truth, *scale);
                    let s = slot(&mut adj, *raw, 5);
                    for (si, di) in s.iter_mut().zip(d) {
                        *si += g[0] * di;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnkernel::Tensor2;

    #[test]
    fn identity_linear_passes_through() {
        let mut ps = ParamSet::new();
        let w = ps.add("w", Tensor2::from_fn(3, 3, |r, c| if r == c { 1.0 } else { 0.0 }));
        let b = ps.add("b", Tensor2::zeros(3, 1));
        let mut tape = Tape::new(&ps);
        let x = tape.leaf(vec![1.5, -2.0, 0.25]);
        let y = tape.linear(w, Some(b), x).unwrap();
        assert_eq!(tape.value(y), &[1.5, -2.0, 0.25]);
    }

    #[test]
    fn linear_shape_mismatch() {
        let mut ps = ParamSet::new();
        let w = ps.add("w", Tensor2::zeros(2, 3));
        let mut tape = Tape::new(&ps);
        let x = tape.leaf(vec![1.0, 2.0]);
        assert!(matches!(tape.linear(w, None, x), Err(KernelError::Dimension { .. })));
    }

    #[test]
    fn leaky_relu_values() {
        assert_eq!(leaky_relu(-1.0, 0.1), -0.1);
        assert_eq!(leaky_relu(2.5, 0.1), 2.5);
        assert_eq!(leaky_relu(0.0, 0.1), 0.0);
    }

    #[test]
    fn softmax_xent_examples() {
        let ps = ParamSet::new();
        let mut tape = Tape::new(&ps);
        let l = tape.leaf(vec![0.7, 0.7, 0.7]);
        let loss = tape.softmax_xent(l, 1).unwrap();
        assert!((tape.scalar(loss) - libm::log(3.0)).abs() < 1e-12);
        let l = tape.leaf(vec![1000.0, 0.0]);
        let loss = tape.softmax_xent(l, 0).unwrap();
        assert!(tape.scalar(loss).abs() < 1e-12);
        let loss = tape.softmax_xent(l, 1).unwrap();
        assert!((tape.scalar(loss) - 1000.0).abs() < 1e-9);
        assert_eq!(
            tape.softmax_xent(l, 2),
            Err(KernelError::Index { index: 2, classes: 2 })
        );
    }

    #[test]
    fn replay_is_bitwise_identical() {
        let mut ps = ParamSet::new();
        let w = ps.add("w", Tensor2::from_fn(4, 3, |r, c| 0.1 * r as f64 - 0.07 * c as f64 + 0.01));
        let run = || {
            let mut tape = Tape::new(&ps);
            let x = tape.leaf(vec![0.3, -1.2, 2.0]);
            let y = tape.linear(w, None, x).unwrap();
            let z = tape.tanh(y);
            tape.value(z).to_vec()
        };
        let a = run();
        let b = run();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
