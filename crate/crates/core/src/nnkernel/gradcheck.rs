use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Grads, ParamSet};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub coords_checked: usize,
    pub max_rel_error: f64,
    /// Parameter name and flat offset of the worst coordinate.
    pub worst: Option<(String, usize)>,
}

/// Compares `analytic` against central differences of `loss` on at most
/// `max_coords` coordinates drawn with `seed`.
///
/// The relative error of a coordinate is
/// `|a - n| / (|a| + |n| + 1e-8)`. Parameters are restored afterwards.
pub fn grad_check<F>(
    params: &mut ParamSet,
    mut loss: F,
    analytic: &Grads,
    eps: f64,
    max_coords: usize,
    seed: u64,
) -> GradCheckReport
where
    F: FnMut(&ParamSet) -> f64,
{
    let total = params.num_scalars();
    let coords: Vec<usize> = if total <= max_coords {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, total, max_coords).into_vec();
        picked.sort_unstable();
        picked
    };

    let mut report = GradCheckReport {
        coords_checked: coords.len(),
        max_rel_error: 0.0,
        worst: None,
    };
    for &k in &coords {
        let orig = *params.scalar_mut(k);
        *params.scalar_mut(k) = orig + eps;
        let up = loss(params);
        *params.scalar_mut(k) = orig - eps;
        let down = loss(params);
        *params.scalar_mut(k) = orig;

        let numeric = (up - down) / (2.0 * eps);
        let a = analytic.scalar(k);
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs() + 1e-8);
        if rel > report.max_rel_error || !rel.is_finite() {
            report.max_rel_error = if rel.is_finite() { rel } else { f64::INFINITY };
            report.worst = Some(locate(params, k));
        }
    }
    report
}

fn locate(params: &ParamSet, flat: usize) -> (String, usize) {
    let mut offset = flat;
    for (name, t) in params.iter() {
        if offset < t.len() {
            return (String::from(name), offset);
        }
        offset -= t.len();
    }
    (String::new(), flat)
}
