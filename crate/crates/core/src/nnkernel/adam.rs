use super::{Grads, KernelError, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update. A non-finite gradient leaves the
/// parameters, moments and step counter untouched.
pub fn adam_step(params: &mut ParamSet, grads: &Grads, cfg: &AdamConfig) -> Result<(), KernelError> {
    if grads.len() != params.len() {
        return Err(KernelError::Dimension {
            op: "adam",
            expected: params.len(),
            got: grads.len(),
        });
    }
    for (id, g) in params.ids().zip(grads.iter()) {
        if params.get(id).shape() != g.shape() {
            return Err(KernelError::Dimension {
                op: "adam",
                expected: params.get(id).len(),
                got: g.len(),
            });
        }
    }
    if !grads.is_finite() {
        return Err(KernelError::NonFinite("gradient"));
    }
    let (entries, step) = params.moments_mut();
    *step += 1;
    let t = *step as i32;
    let bc1 = 1.0 - libm::pow(cfg.beta1, t as f64);
    let bc2 = 1.0 - libm::pow(cfg.beta2, t as f64);
    for ((value, m, v), g) in entries.zip(grads.iter()) {
        let it = value
            .as_mut_slice()
            .iter_mut()
            .zip(m.as_mut_slice().iter_mut())
            .zip(v.as_mut_slice().iter_mut())
            .zip(g.as_slice());
        for (((w, mi), vi), gi) in it {
            *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
            *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = *mi / bc1;
            let v_hat = *vi / bc2;
            *w -= cfg.lr * m_hat / (libm::sqrt(v_hat) + cfg.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnkernel::Tensor2;
    use alloc::vec;

    fn scalar(w: f64) -> ParamSet {
        let mut ps = ParamSet::new();
        ps.add("w", Tensor2::new(1, 1, vec![w]).unwrap());
        ps
    }

    fn grad(ps: &ParamSet, g: f64) -> Grads {
        let mut gr = ps.zero_grads();
        gr.get_mut(ps.id_of("w").unwrap()).set(0, 0, g);
        gr
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut ps = scalar(0.0);
        let g = grad(&ps, 4.0);
        adam_step(&mut ps, &g, &AdamConfig::default()).unwrap();
        let w = ps.get(ps.id_of("w").unwrap()).get(0, 0);
        assert!((w + 0.001).abs() < 1e-9);
        assert_eq!(ps.step(), 1);
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut ps = scalar(2.5);
        let g = grad(&ps, 0.0);
        for _ in 0..5 {
            adam_step(&mut ps, &g, &AdamConfig::default()).unwrap();
        }
        assert_eq!(ps.get(ps.id_of("w").unwrap()).get(0, 0), 2.5);
        assert_eq!(ps.step(), 5);
    }

    #[test]
    fn quadratic_descent() {
        let mut ps = scalar(1.0);
        let id = ps.id_of("w").unwrap();
        let mut prev = 1.0_f64;
        for _ in 0..200 {
            let w = ps.get(id).get(0, 0);
            let g = grad(&ps, 2.0 * w);
            adam_step(&mut ps, &g, &AdamConfig::default()).unwrap();
            let now = ps.get(id).get(0, 0).abs();
            assert!(now < prev);
            prev = now;
        }
        // Steps are at most lr, and shrink a little as the gradient decays.
        assert!(prev > 0.8 - 1e-9 && prev < 0.82, "{prev}");
    }

    #[test]
    fn nonfinite_gradient_is_skipped() {
        let mut ps = scalar(1.0);
        let g = grad(&ps, f64::NAN);
        assert_eq!(adam_step(&mut ps, &g, &AdamConfig::default()), Err(KernelError::NonFinite("gradient")));
        assert_eq!(ps.step(), 0);
        assert_eq!(ps.get(ps.id_of("w").unwrap()).get(0, 0), 1.0);
    }
}
