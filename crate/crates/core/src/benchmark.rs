//! Desk-scale benchmark built from a synthetic scene.
//!
//! Prediction frames are drawn only where the maneuver is observable from
//! the 3 s history: cruising far from any scripted event, a lane change
//! from 1 s before its cross-over until 3 s after it, and braking from
//! 1 s after the ego starts to decelerate. A vehicle in a brake chain is
//! taken from its own braking onset, when its leader has been braking for
//! at least 1.5 s. Frames near label boundaries are left out, as are
//! frames with a braking neighbor that is not part of the ego's chain.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::maneuvers::{Lateral, Longitudinal};
use crate::synth::{generate, ScriptedManeuver, SynthConfig, SynthError, SynthOutput};
use crate::trackstore::{split_train_test, FrameIndex, Sample, TrackStore, VehicleId, FUTURE_FRAMES, HISTORY_FRAMES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkConfig {
    pub synth: SynthConfig,
    pub seed: u64,
    /// Total samples across train and test.
    pub n_samples: usize,
    /// Spacing of candidate prediction frames.
    pub stride: i64,
    /// Upper bound on the share of (KeepLane, Normal) samples.
    pub max_cruise_fraction: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig {
                n_vehicles: 1440,
                n_lanes: 3,
                duration_s: 90.0,
                pct_lane_changes: 0.35,
                pct_braking: 0.2,
                brake_cascade: 30,
                ..SynthConfig::default()
            },
            seed: 2018,
            n_samples: 2000,
            stride: 15,
            max_cruise_fraction: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub scene: SynthOutput,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub train_vehicles: Vec<VehicleId>,
    pub test_vehicles: Vec<VehicleId>,
}

impl Benchmark {
    pub fn len(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchmarkError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("scene yields only {available} usable samples, {requested} requested")]
    TooFewSamples { available: usize, requested: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    Cruise,
    Maneuver,
    Excluded,
}

/// Classifies frame `t` of a vehicle given its scripted events.
fn regime(events: &[(FrameIndex, ScriptedManeuver)], t: FrameIndex) -> Regime {
    let mut result = Regime::Cruise;
    for &(frame, maneuver) in events {
        let r = match maneuver {
            ScriptedManeuver::LaneChange { .. } => {
                if (frame - 10..=frame + 30).contains(&t) {
                    Regime::Maneuver
                } else if t < frame - 70 || t > frame + 60 {
                    Regime::Cruise
                } else {
                    Regime::Excluded
                }
            }
            ScriptedManeuver::Brake {
                decel_frames,
                hold_frames,
                accel_frames,
                regime_end,
                leader,
                ..
            } => {
                let first = if leader.is_some() { frame } else { frame + 10 };
                let end = frame + decel_frames + hold_frames + accel_frames;
                if (first..=regime_end).contains(&t) {
                    Regime::Maneuver
                } else if t + FUTURE_FRAMES < frame - 30 || t - HISTORY_FRAMES > end + 10 {
                    Regime::Cruise
                } else {
                    Regime::Excluded
                }
            }
        };
        result = match (result, r) {
            (Regime::Excluded, _) | (_, Regime::Excluded) => Regime::Excluded,
            (Regime::Maneuver, _) | (_, Regime::Maneuver) => Regime::Maneuver,
            _ => Regime::Cruise,
        };
    }
    result
}

fn candidates(store: &TrackStore, scene: &SynthOutput, vehicles: &[VehicleId], stride: i64) -> (Vec<Sample>, Vec<Sample>) {
    let brakes = BrakeIndex::new(scene);
    let mut cruise = Vec::new();
    let mut maneuver = Vec::new();
    for &v in vehicles {
        let events: Vec<_> = scene
            .script
            .iter()
            .filter(|e| e.vehicle_id == v)
            .map(|e| (e.frame, e.maneuver))
            .collect();
        let mut t = HISTORY_FRAMES;
        while t + FUTURE_FRAMES + 1 < scene.frames {
            let r = regime(&events, t);
            if r != Regime::Excluded && !brakes.unrelated_brake_nearby(store, v, t) {
                if let Ok(sample) = store.build_sample(v, t) {
                    let plain = sample.label.lateral == Lateral::KeepLane && sample.label.longitudinal == Longitudinal::Normal;
                    match (r, plain) {
                        (Regime::Cruise, true) => cruise.push(sample),
                        (Regime::Maneuver, false) => maneuver.push(sample),
                        _ => {}
                    }
                }
            }
            t += stride;
        }
    }
    (cruise, maneuver)
}

/// Brake windows and chain links of the scripted brake events.
struct BrakeIndex {
    windows: BTreeMap<VehicleId, Vec<(FrameIndex, FrameIndex)>>,
    links: BTreeSet<(VehicleId, VehicleId)>,
}

impl BrakeIndex {
    fn new(scene: &SynthOutput) -> Self {
        let mut windows: BTreeMap<VehicleId, Vec<(FrameIndex, FrameIndex)>> = BTreeMap::new();
        let mut links = BTreeSet::new();
        for e in &scene.script {
            if let ScriptedManeuver::Brake { leader, .. } = e.maneuver {
                windows.entry(e.vehicle_id).or_default().push((e.frame, e.last_frame()));
                if let Some(l) = leader {
                    links.insert((e.vehicle_id, l));
                }
            }
        }
        Self { windows, links }
    }

    /// True when a neighbor of `v` at `t` brakes within the sample window
    /// without being its leader or follower in a brake chain. Such a
    /// sample shows a braking neighbor whose effect on the ego is not
    /// scripted.
    fn unrelated_brake_nearby(&self, store: &TrackStore, v: VehicleId, t: FrameIndex) -> bool {
        let Ok(neighbors) = store.select_neighbors(v, t) else {
            return false;
        };
        neighbors.into_iter().flatten().any(|u| {
            let braking = self.windows.get(&u).is_some_and(|w| {
                w.iter()
                    .any(|&(a, b)| a <= t + FUTURE_FRAMES && b >= t - HISTORY_FRAMES)
            });
            braking && !self.links.contains(&(v, u)) && !self.links.contains(&(u, v))
        })
    }
}

/// Samples `count` items; maneuver samples are preferred up to
/// `1 - max_cruise_fraction` of the total.
fn pick(mut cruise: Vec<Sample>, mut maneuver: Vec<Sample>, count: usize, max_cruise: f64, rng: &mut ChaCha8Rng) -> Vec<Sample> {
    cruise.shuffle(rng);
    maneuver.shuffle(rng);
    let min_cruise = count.saturating_sub(maneuver.len());
    let want_cruise = ((max_cruise * count as f64) as usize).max(min_cruise).min(cruise.len());
    let want_maneuver = (count - want_cruise).min(maneuver.len());
    cruise.truncate(want_cruise);
    maneuver.truncate(want_maneuver);
    let mut out = cruise;
    out.extend(maneuver);
    out.sort_by_key(|s| (s.vehicle_id, s.origin.frame));
    out
}

/// Generates the scene, splits vehicles three to one and draws samples
/// in the same proportion from each side.
pub fn build(config: &BenchmarkConfig) -> Result<Benchmark, BenchmarkError> {
    let scene = generate(&config.synth, config.seed)?;
    let split = split_train_test(core::slice::from_ref(&scene.store), config.seed)
        .pop()
        .expect("one subset");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xBE7C_4A11);
    let n_test = config.n_samples / 4;
    let n_train = config.n_samples - n_test;

    let mut sides = Vec::new();
    for (vehicles, count) in [(&split.train, n_train), (&split.test, n_test)] {
        let (cruise, maneuver) = candidates(&scene.store, &scene, vehicles, config.stride.max(1));
        let available = cruise.len() + maneuver.len();
        if available < count {
            return Err(BenchmarkError::TooFewSamples {
                available,
                requested: count,
            });
        }
        sides.push(pick(cruise, maneuver, count, config.max_cruise_fraction, &mut rng));
    }
    let test = sides.pop().unwrap();
    let train = sides.pop().unwrap();
    Ok(Benchmark {
        scene,
        train,
        test,
        train_vehicles: split.train,
        test_vehicles: split.test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_windows() {
        let lc = ScriptedManeuver::LaneChange {
            lateral: Lateral::ChangeLeft,
            from_lane: 2,
            to_lane: 1,
        };
        let ev = [(500, lc)];
        assert_eq!(regime(&ev, 490), Regime::Maneuver);
        assert_eq!(regime(&ev, 530), Regime::Maneuver);
        assert_eq!(regime(&ev, 480), Regime::Excluded);
        assert_eq!(regime(&ev, 545), Regime::Excluded);
        assert_eq!(regime(&ev, 429), Regime::Cruise);
        assert_eq!(regime(&ev, 561), Regime::Cruise);
        assert_eq!(regime(&[], 100), Regime::Cruise);
    }

    #[test]
    fn small_benchmark_is_deterministic_and_split_by_vehicle() {
        let config = BenchmarkConfig {
            synth: SynthConfig {
                n_vehicles: 48,
                duration_s: 60.0,
                brake_cascade: 3,
                ..BenchmarkConfig::default().synth
            },
            n_samples: 200,
            ..BenchmarkConfig::default()
        };
        let a = build(&config).unwrap();
        let b = build(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        assert_eq!(a.test.len(), 50);
        for s in &a.test {
            assert!(a.test_vehicles.contains(&s.vehicle_id));
        }
        for s in &a.train {
            assert!(a.train_vehicles.contains(&s.vehicle_id));
        }
    }

    #[test]
    fn too_many_samples_requested() {
        let config = BenchmarkConfig {
            synth: SynthConfig {
                n_vehicles: 8,
                ..BenchmarkConfig::default().synth
            },
            n_samples: 100_000,
            ..BenchmarkConfig::default()
        };
        assert!(matches!(build(&config), Err(BenchmarkError::TooFewSamples { .. })));
    }
}
