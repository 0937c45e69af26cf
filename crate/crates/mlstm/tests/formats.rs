use mlstm::io::checkpoint::{decode_model, encode_model};
use mlstm::io::predictions::{from_json, to_json, PredictionRecord};
use mlstm::io::samples::{decode_binary, decode_jsonl, encode_binary, encode_jsonl};
use mlstm::io::tracks::{parse_trajectories, write_trajectories, ColumnMap, UnitMode};
use mlstm::CliError;
use mlstm_core::maneuvers::ManeuverLabel;
use mlstm_core::model::{ClassifierNet, ManeuverModel, ModelConfig, TrajectoryNet, Variant};
use mlstm_core::synth::{generate, SynthConfig};
use mlstm_core::trackstore::{Origin, Sample, FUTURE_LEN, HISTORY_LEN, INPUT_CHANNELS, NUM_NEIGHBORS};
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = Sample> {
    (
        any::<u32>(),
        -1_000_000i64..1_000_000,
        prop::array::uniform2(-1e4f64..1e4),
        0usize..6,
        prop::collection::vec(-1e3f64..1e3, HISTORY_LEN * INPUT_CHANNELS),
        prop::collection::vec(-1e3f64..1e3, FUTURE_LEN * 2),
        prop::array::uniform6(any::<bool>()),
    )
        .prop_map(|(vehicle_id, frame, origin, label, hist, fut, mask)| Sample {
            vehicle_id,
            history: hist.chunks(INPUT_CHANNELS).map(|c| c.try_into().unwrap()).collect(),
            future: fut.chunks(2).map(|c| [c[0], c[1]]).collect(),
            label: ManeuverLabel::all()[label],
            neighbor_mask: mask,
            origin: Origin {
                frame,
                x: origin[0],
                y: origin[1],
            },
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn samples_round_trip_in_both_formats(samples in prop::collection::vec(sample(), 0..6)) {
        prop_assert_eq!(&decode_binary(&encode_binary(&samples)).unwrap(), &samples);
        prop_assert_eq!(&decode_jsonl(&encode_jsonl(&samples)).unwrap(), &samples);
    }
}

#[test]
fn truncated_or_foreign_sample_files_are_data_errors() {
    let bytes = encode_binary(&[]);
    assert!(matches!(decode_binary(&bytes[..bytes.len() - 1]), Err(CliError::Data(_))));
    assert!(matches!(decode_binary(b"NOTSAMPLES"), Err(CliError::Data(_))));
    assert!(matches!(decode_jsonl("{\"vehicle_id\": 1}\n"), Err(CliError::Data(_))));
}

fn model(variant: Variant) -> ManeuverModel {
    let config = ModelConfig {
        hidden: 5,
        embed: 4,
        position_scale: 7.5,
        input_scale: 3.0,
        ..ModelConfig::new(variant)
    };
    let classifier = variant.needs_classifier().then(|| ClassifierNet::new(config, 2).unwrap());
    ManeuverModel::new(TrajectoryNet::new(config, 1).unwrap(), classifier)
}

#[test]
fn checkpoints_round_trip_every_variant() {
    for v in [Variant::VLstm, Variant::SLstm, Variant::MLstm, Variant::MLstmGt] {
        let m = model(v);
        let back = decode_model(&encode_model(&m)).unwrap();
        assert_eq!(back, m, "{}", v.name());
    }
}

#[test]
fn damaged_checkpoints_are_rejected() {
    let bytes = encode_model(&model(Variant::MLstm));
    assert!(decode_model(&bytes[..bytes.len() / 2]).is_err());
    let mut wrong_magic = bytes.clone();
    wrong_magic[0] = b'X';
    assert!(decode_model(&wrong_magic).is_err());
}

#[test]
fn trajectory_tables_round_trip() {
    let config = SynthConfig {
        n_vehicles: 12,
        duration_s: 40.0,
        position_noise_std: 0.3,
        ..SynthConfig::default()
    };
    let scene = generate(&config, 5).unwrap();
    let text = write_trajectories(&scene.store);
    let back = parse_trajectories(&text, &ColumnMap::default(), UnitMode::Meters, scene.store.dataset_tag()).unwrap();
    assert_eq!(back, scene.store);
}

#[test]
fn headerless_ngsim_rows_are_read_in_feet() {
    let row = |v: u32, f: i64, x: f64, y: f64| format!("{v} {f} 500 1118846979000 {x} {y} 0 0 14.5 4.9 2 30 0 3 0 0 0 0\n");
    let text = [row(7, 1, 10.0, 100.0), row(7, 2, 10.0, 103.0)].concat();
    let store = parse_trajectories(&text, &ColumnMap::default(), UnitMode::Feet, "us101").unwrap();
    let p = store.position(7, 2).unwrap();
    assert!((p.y - 103.0 * 0.3048).abs() < 1e-12);
    assert_eq!(p.lane, 3);
}

#[test]
fn predictions_round_trip_through_json() {
    let config = SynthConfig {
        n_vehicles: 10,
        duration_s: 40.0,
        ..SynthConfig::default()
    };
    let scene = generate(&config, 2).unwrap();
    let id = scene.store.vehicle_ids().next().unwrap();
    let s = scene.store.build_sample(id, 100).unwrap();
    let m = model(Variant::MLstm);
    let dist = m.predict_multimodal(&s.history).unwrap();
    let records = vec![PredictionRecord::new(&s, &dist)];
    let back = from_json(&to_json(&records)).unwrap();
    assert_eq!(back, records);
    assert_eq!(back[0].modes.len(), 6);
    assert_eq!(back[0].modes[0].trajectory.len(), FUTURE_LEN);
    assert!(from_json("[{\"vehicle_id\": 1}]").is_err());
    assert_eq!(s.neighbor_mask.len(), NUM_NEIGHBORS);
}

#[test]
fn config_dump_reloads_to_the_same_config() {
    let mut c = mlstm::Config::default();
    c.apply_str("model.hidden = 17\ntrain.clip_norm = 2.5\nbenchmark.seed = 44\ndata.units = feet\n")
        .unwrap();
    let mut back = mlstm::Config::default();
    back.apply_str(&c.dump()).unwrap();
    assert_eq!(back, c);
    assert!(matches!(c.set("model.nope", "1"), Err(CliError::Usage(_))));
    assert!(matches!(c.set("train.lr", "fast"), Err(CliError::Usage(_))));
}
