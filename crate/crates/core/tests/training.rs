use mlstm_core::exec::Sequential;
use mlstm_core::model::{fit_trajectory, history_features, ModelConfig, TrainOptions, TrajectoryNet, Variant};
use mlstm_core::nnkernel::AdamConfig;
use mlstm_core::synth::{generate, SynthConfig};
use mlstm_core::trackstore::{Sample, INPUT_CHANNELS};

fn samples(n: usize) -> Vec<Sample> {
    let config = SynthConfig {
        n_vehicles: 60,
        duration_s: 60.0,
        pct_lane_changes: 0.4,
        pct_braking: 0.3,
        ..SynthConfig::default()
    };
    let scene = generate(&config, 21).unwrap();
    let mut out = Vec::new();
    'outer: for id in scene.store.vehicle_ids() {
        for t in (40..500).step_by(90) {
            if let Ok(s) = scene.store.build_sample(id, t) {
                out.push(s);
                if out.len() == n {
                    break 'outer;
                }
            }
        }
    }
    assert_eq!(out.len(), n);
    out
}

fn mean_loss(net: &TrajectoryNet, data: &[Sample]) -> f64 {
    data.iter().map(|s| net.layout().loss(net.params(), s).unwrap()).sum::<f64>() / data.len() as f64
}

#[test]
fn fifty_samples_overfit_deterministically() {
    let data = samples(50);
    let config = ModelConfig {
        hidden: 32,
        embed: 32,
        position_scale: 50.0,
        input_scale: 10.0,
        ..ModelConfig::new(Variant::MLstm)
    };
    let opts = TrainOptions {
        epochs: 200,
        batch_size: 10,
        seed: 3,
        adam: AdamConfig {
            lr: 0.003,
            ..AdamConfig::default()
        },
        ..TrainOptions::default()
    };
    let (net, report) = fit_trajectory(&data, config, &opts, &Sequential, &mut |_| {}).unwrap();
    assert_eq!(report.epoch_losses.len(), 200);
    let first = report.epoch_losses[0];
    let last = report.epoch_losses[199];
    assert!(first - last >= 0.5 * first.abs(), "NLL {first:.3} -> {last:.3}");
    assert!(mean_loss(&net, &data) < first);

    let (again, report_again) = fit_trajectory(&data, config, &opts, &Sequential, &mut |_| {}).unwrap();
    assert_eq!(report, report_again);
    assert_eq!(net.params(), again.params());
}

#[test]
fn cosine_schedule_runs_from_lr_to_final_ratio() {
    let opts = TrainOptions {
        epochs: 11,
        lr_final_ratio: 0.1,
        adam: AdamConfig {
            lr: 0.01,
            ..AdamConfig::default()
        },
        ..TrainOptions::default()
    };
    assert!((opts.lr_at(1) - 0.01).abs() < 1e-15);
    assert!((opts.lr_at(6) - 0.0055).abs() < 1e-15);
    assert!((opts.lr_at(11) - 0.001).abs() < 1e-15);
    for e in 1..11 {
        assert!(opts.lr_at(e + 1) < opts.lr_at(e));
    }
    let flat = TrainOptions::default();
    assert_eq!(flat.lr_at(1), flat.lr_at(flat.epochs));
}

#[test]
fn features_hold_relative_positions_and_their_rates() {
    let config = ModelConfig {
        input_scale: 2.0,
        ..ModelConfig::new(Variant::SLstm)
    };
    // Ego moves 4 m per row; neighbor slot 0 is present in rows 1 and 2
    // only and closes 1 m per row.
    let mut history = vec![[0.0; INPUT_CHANNELS]; 3];
    for (i, row) in history.iter_mut().enumerate() {
        row[0] = 1.0;
        row[1] = 4.0 * i as f64 - 8.0;
    }
    history[1][2] = 1.0;
    history[1][3] = 10.0;
    history[2][2] = 1.0;
    history[2][3] = 13.0;
    let f = history_features(&config, &history);
    assert_eq!(f.len(), 3);
    let half = INPUT_CHANNELS;
    assert!(f.iter().all(|r| r.len() == config.feature_width() && r.len() == 2 * half));
    assert_eq!(&f[2][..4], &[0.5, 0.0, 0.0, 6.5]);
    assert!(f[2][4..half].iter().all(|v| *v == 0.0));
    // 4 m per 0.2 s over a 2 m scale.
    for r in &f {
        assert!((r[half + 1] - 10.0).abs() < 1e-12);
        assert_eq!(r[half], 0.0);
    }
    assert_eq!(f[0][half + 3], 0.0);
    assert_eq!(f[1][half + 3], 0.0);
    assert!((f[2][half + 3] + 2.5).abs() < 1e-12);

    let ego_only = history_features(&ModelConfig::new(Variant::VLstm), &history[..1]);
    assert_eq!(ego_only, vec![vec![1.0, -8.0, 0.0, 0.0]]);
}
