use mlstm_core::baseline::{cv_filter_predict, CvKalman};
use mlstm_core::eval::{maneuver_accuracy, rmse_table};
use mlstm_core::trackstore::{FUTURE_LEN, HISTORY_LEN};
use mlstm_core::ManeuverLabel;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const DT: f64 = 0.2;

fn line(p0: [f64; 2], v: [f64; 2], from: i64, n: usize) -> Vec<[f64; 2]> {
    (0..n as i64)
        .map(|k| {
            let t = (from + k) as f64 * DT;
            [p0[0] + v[0] * t, p0[1] + v[1] * t]
        })
        .collect()
}

proptest! {
    #[test]
    fn constant_velocity_tracks_are_predicted_exactly(
        p0 in prop::array::uniform2(-500.0f64..500.0),
        v in prop::array::uniform2(-40.0f64..40.0),
    ) {
        let history = line(p0, v, 0, HISTORY_LEN);
        let truth = line(p0, v, HISTORY_LEN as i64, FUTURE_LEN);
        let pred = cv_filter_predict(&history, FUTURE_LEN).unwrap();
        let rmse = rmse_table(&[pred], &[truth]).unwrap();
        prop_assert!(rmse.iter().all(|e| *e < 1e-6), "{:?}", rmse);
    }

    #[test]
    fn rmse_ignores_sample_order(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..20);
        let mut pairs: Vec<(Vec<[f64; 2]>, Vec<[f64; 2]>)> = (0..n)
            .map(|_| {
                let p = (0..FUTURE_LEN).map(|_| [rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0)]).collect();
                let t = (0..FUTURE_LEN).map(|_| [rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0)]).collect();
                (p, t)
            })
            .collect();
        let table = |pairs: &[(Vec<[f64; 2]>, Vec<[f64; 2]>)]| {
            let (p, t): (Vec<_>, Vec<_>) = pairs.iter().cloned().unzip();
            rmse_table(&p, &t).unwrap()
        };
        let before = table(&pairs);
        pairs.reverse();
        pairs.rotate_left(n / 2);
        let after = table(&pairs);
        for k in 0..5 {
            prop_assert!((before[k] - after[k]).abs() <= 1e-12 * before[k].max(1.0));
        }
    }
}

#[test]
fn rmse_reads_each_whole_second() {
    // Error grows as 3-4-5 triangles scaled by the step number.
    let truth = vec![vec![[0.0, 0.0]; FUTURE_LEN]; 2];
    let pred: Vec<Vec<[f64; 2]>> = (0..2)
        .map(|_| (1..=FUTURE_LEN).map(|k| [3.0 * k as f64, 4.0 * k as f64]).collect())
        .collect();
    let rmse = rmse_table(&pred, &truth).unwrap();
    for (k, e) in rmse.iter().enumerate() {
        assert!((e - 25.0 * (k + 1) as f64).abs() < 1e-12);
    }
    for w in rmse.windows(2) {
        assert!(w[0] < w[1]);
    }
}

#[test]
fn rmse_rejects_mismatched_input() {
    let good = vec![vec![[0.0; 2]; FUTURE_LEN]];
    assert!(rmse_table(&[], &[]).is_err());
    assert!(rmse_table(&good, &[]).is_err());
    assert!(rmse_table(&good, &[vec![[0.0; 2]; 3]]).is_err());
}

#[test]
fn noisy_tracks_give_unbiased_forecasts_within_the_predicted_spread() {
    let filter = CvKalman::default();
    let noise = Normal::new(0.0, filter.measurement_std).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let runs = 4000;
    let step = 24;
    let (mut sum, mut sq) = ([0.0; 2], [0.0; 2]);
    let mut predicted = [0.0; 2];
    for _ in 0..runs {
        let v = [rng.random_range(-2.0..2.0), rng.random_range(5.0..30.0)];
        let history: Vec<[f64; 2]> = line([0.0, 0.0], v, 0, HISTORY_LEN)
            .into_iter()
            .map(|p| [p[0] + noise.sample(&mut rng), p[1] + noise.sample(&mut rng)])
            .collect();
        let truth = line([0.0, 0.0], v, HISTORY_LEN as i64, FUTURE_LEN)[step];
        let g = filter.forecast(&history, FUTURE_LEN).unwrap()[step];
        let err = [g.mux - truth[0], g.muy - truth[1]];
        for a in 0..2 {
            sum[a] += err[a];
            sq[a] += err[a] * err[a];
        }
        predicted = [g.sx * g.sx, g.sy * g.sy];
    }
    for a in 0..2 {
        let mean = sum[a] / runs as f64;
        let var = sq[a] / runs as f64 - mean * mean;
        assert!(mean.abs() < 4.0 * (var / runs as f64).sqrt(), "axis {a}: bias {mean}");
        // The filter also budgets for unmodelled acceleration, so the
        // empirical spread must not exceed the predicted one.
        assert!(var > 0.0 && var <= predicted[a] * 1.05, "axis {a}: {var} vs {}", predicted[a]);
    }
}

#[test]
fn random_guessing_scores_one_in_six() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let all = ManeuverLabel::all();
    let draw = |rng: &mut ChaCha8Rng| all[rng.random_range(0..all.len())];
    let truth: Vec<_> = (0..10_000).map(|_| draw(&mut rng)).collect();
    let guess: Vec<_> = (0..10_000).map(|_| draw(&mut rng)).collect();
    let acc = maneuver_accuracy(&guess, &truth).unwrap();
    assert!((acc.joint - 1.0 / 6.0).abs() < 0.05, "{acc:?}");
    assert!((acc.lateral - 1.0 / 3.0).abs() < 0.05);
    assert!((acc.longitudinal - 0.5).abs() < 0.05);
    assert_eq!(maneuver_accuracy(&truth, &truth).unwrap().joint, 1.0);
}
