use mlstm_core::model::{mixture, ClassifierNet, ManeuverModel, ModelConfig, TrajectoryNet, Variant};
use mlstm_core::nnkernel::ParamSet;
use mlstm_core::trackstore::{HISTORY_LEN, INPUT_CHANNELS};
use mlstm_core::{GaussianStep, ManeuverLabel};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scale_weights(params: &mut ParamSet, rng: &mut ChaCha8Rng) {
    let ids: Vec<_> = params.ids().collect();
    for id in ids {
        let k = rng.random_range(0.1..20.0);
        for v in params.get_mut(id).as_mut_slice() {
            *v *= k;
        }
    }
}

fn random_history(rng: &mut ChaCha8Rng) -> Vec<[f64; INPUT_CHANNELS]> {
    (0..HISTORY_LEN)
        .map(|_| core::array::from_fn(|_| rng.random_range(-100.0..100.0)))
        .collect()
}

#[test]
fn mixture_weights_sum_to_one_over_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for draw in 0..1000u64 {
        let config = ModelConfig {
            hidden: 4,
            embed: 3,
            ..ModelConfig::new(Variant::MLstm)
        };
        let mut traj = TrajectoryNet::new(config, draw).unwrap();
        let mut cls = ClassifierNet::new(config, draw + 1).unwrap();
        scale_weights(traj.params_mut(), &mut rng);
        scale_weights(cls.params_mut(), &mut rng);
        let model = ManeuverModel::new(traj, Some(cls));
        let dist = model.predict_multimodal(&random_history(&mut rng)).unwrap();
        assert_eq!(dist.modes.len(), 6);
        let total: f64 = dist.modes.iter().map(|m| m.probability).sum();
        assert!((total - 1.0).abs() <= 1e-9, "draw {draw}: total {total}");
        assert!(dist.modes.iter().all(|m| (0.0..=1.0).contains(&m.probability)));
    }
}

#[test]
fn zero_weights_give_uniform_maneuvers() {
    let config = ModelConfig {
        hidden: 4,
        embed: 3,
        ..ModelConfig::new(Variant::MLstm)
    };
    let mut cls = ClassifierNet::new(config, 0).unwrap();
    let ids: Vec<_> = cls.params().ids().collect();
    for id in ids {
        cls.params_mut().get_mut(id).as_mut_slice().fill(0.0);
    }
    let (lat, lon) = cls.classify(&vec![[1.0; INPUT_CHANNELS]; HISTORY_LEN]).unwrap();
    for p in lat {
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
    }
    assert_eq!(lon, [0.5, 0.5]);
}

#[test]
fn joint_probability_is_the_product() {
    let step = GaussianStep::from_raw(&[0.0; 5], 1.0);
    let dist = mixture([0.2, 0.5, 0.3], [0.9, 0.1], vec![vec![step]; 6]).unwrap();
    for m in &dist.modes {
        let l = m.label.unwrap();
        let want = [0.2, 0.5, 0.3][l.lateral.index()] * [0.9, 0.1][l.longitudinal.index()];
        assert!((m.probability - want).abs() < 1e-15);
    }
    let labels: Vec<ManeuverLabel> = dist.modes.iter().map(|m| m.label.unwrap()).collect();
    assert_eq!(labels, ManeuverLabel::all());
}

proptest! {
    #[test]
    fn head_is_valid_over_raw_range(raw in prop::array::uniform5(-50.0f64..=50.0), scale in 0.01f64..100.0) {
        let g = GaussianStep::from_raw(&raw, scale);
        prop_assert!(g.sx > 0.0 && g.sy > 0.0);
        prop_assert!(g.rho.abs() < 1.0);
        prop_assert!(g.is_valid());
    }
}

#[test]
fn head_is_valid_at_range_corners() {
    for bits in 0..32u32 {
        let raw: [f64; 5] = core::array::from_fn(|k| if bits >> k & 1 == 1 { 50.0 } else { -50.0 });
        let g = GaussianStep::from_raw(&raw, 1.0);
        assert!(g.sx > 0.0 && g.sy > 0.0 && g.rho.abs() < 1.0, "{raw:?} -> {g:?}");
    }
}
