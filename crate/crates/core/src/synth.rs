//! Scripted synthetic freeway scenes with known maneuvers.
//!
//! Vehicles are kinematic scripts on straight lanes: constant lane speed,
//! optional braking episodes (linear deceleration, hold, linear recovery)
//! and optional lane changes executed as a smoothstep lateral ramp over
//! 4 s centred on the cross-over frame. A braking episode can cascade to
//! the vehicles behind in the same lane, each starting a short delay after
//! its leader. There is no car-following model.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::maneuvers::Lateral;
use crate::trackstore::{FrameIndex, TrackPoint, TrackStore, VehicleId, VehicleTrack, FRAME_RATE_HZ, FUTURE_FRAMES};

/// Frames kept free of events at both ends of the recording.
pub const EVENT_MARGIN: i64 = 80;
/// Half-length of the lateral ramp (2 s).
pub const RAMP_HALF: i64 = 20;
/// Scripted braking keeps the 5 s mean-speed ratio below this value
/// throughout its logged regime.
pub const BRAKE_TARGET_RATIO: f64 = 0.75;

const DECEL_FRAMES: (i64, i64) = (20, 30);
const BRAKE_RATIO: (f64, f64) = (0.3, 0.5);
const HOLD_FRAMES: (i64, i64) = (60, 90);
const ACCEL_FRAMES: (i64, i64) = (40, 60);
const CASCADE_DELAY: (i64, i64) = (15, 25);
const MAX_PROFILE: i64 = DECEL_FRAMES.1 + HOLD_FRAMES.1 + ACCEL_FRAMES.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_vehicles: usize,
    pub n_lanes: u32,
    pub duration_s: f64,
    pub lane_width_m: f64,
    /// Fraction of vehicles with one scripted lane change.
    pub pct_lane_changes: f64,
    /// Fraction of vehicles that start a braking episode on their own.
    pub pct_braking: f64,
    /// How many followers, one after another, repeat a braking episode.
    pub brake_cascade: usize,
    /// Standard deviation of Gaussian noise on recorded positions (m).
    pub position_noise_std: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Nominal gap between consecutive vehicles of a lane (m).
    pub spacing_m: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_vehicles: 60,
            n_lanes: 3,
            duration_s: 60.0,
            lane_width_m: 3.7,
            pct_lane_changes: 0.3,
            pct_braking: 0.3,
            brake_cascade: 0,
            position_noise_std: 0.0,
            speed_min: 20.0,
            speed_max: 30.0,
            spacing_m: 60.0,
        }
    }
}

impl SynthConfig {
    pub fn frames(&self) -> i64 {
        libm::round(self.duration_s * FRAME_RATE_HZ) as i64 + 1
    }

    fn validate(&self) -> Result<(), SynthError> {
        let err = |m: &str| Err(SynthError::Config(m.into()));
        let pct_ok = |p: f64| (0.0..=1.0).contains(&p);
        if self.n_lanes == 0 {
            return err("n_lanes must be at least 1");
        }
        if !pct_ok(self.pct_lane_changes) || !pct_ok(self.pct_braking) {
            return err("percentages must lie in [0, 1]");
        }
        if self.pct_lane_changes + self.pct_braking > 1.0 + 1e-12 {
            return err("at most one scripted event per vehicle: pct_lane_changes + pct_braking must be <= 1");
        }
        if self.pct_lane_changes > 0.0 && self.n_lanes < 2 {
            return err("lane changes need at least 2 lanes");
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return err("duration_s must be positive");
        }
        let events = self.pct_lane_changes > 0.0 || self.pct_braking > 0.0;
        if events && self.frames() < 2 * EVENT_MARGIN + MAX_PROFILE + 1 {
            return err("duration too short to fit scripted events");
        }
        if !(self.speed_min > 0.0 && self.speed_max >= self.speed_min && self.speed_max * 0.1 <= 5.0) {
            return err("speeds must satisfy 0 < speed_min <= speed_max <= 50 m/s");
        }
        if !(self.lane_width_m > 0.0 && self.spacing_m > 0.0 && self.position_noise_std >= 0.0) {
            return err("lane width, spacing and noise must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScriptedManeuver {
    LaneChange {
        lateral: Lateral,
        from_lane: u32,
        to_lane: u32,
    },
    Brake {
        decel_frames: i64,
        ratio: f64,
        hold_frames: i64,
        accel_frames: i64,
        /// Last frame of the window, starting at the event frame, in which
        /// the scripted speeds keep the 5 s mean ratio below
        /// [`BRAKE_TARGET_RATIO`].
        regime_end: FrameIndex,
        /// Vehicle whose braking this one repeats.
        leader: Option<VehicleId>,
    },
}

/// Script log entry: cross-over frame for lane changes, deceleration
/// start for braking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptEvent {
    pub vehicle_id: VehicleId,
    pub frame: FrameIndex,
    pub maneuver: ScriptedManeuver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub store: TrackStore,
    pub script: Vec<ScriptEvent>,
    pub frames: i64,
}

#[derive(Debug, Clone, Copy)]
struct BrakePlan {
    start: i64,
    decel: i64,
    ratio: f64,
    hold: i64,
    accel: i64,
    leader: Option<VehicleId>,
}

impl BrakePlan {
    fn factor(&self, f: i64) -> f64 {
        let k = f - self.start;
        let low = self.ratio;
        if k <= 0 {
            1.0
        } else if k <= self.decel {
            1.0 - (1.0 - low) * k as f64 / self.decel as f64
        } else if k <= self.decel + self.hold {
            low
        } else if k <= self.decel + self.hold + self.accel {
            low + (1.0 - low) * (k - self.decel - self.hold) as f64 / self.accel as f64
        } else {
            1.0
        }
    }

    fn end(&self) -> i64 {
        self.start + self.decel + self.hold + self.accel
    }
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    id: VehicleId,
    lane: u32,
    y0: f64,
    speed: f64,
    lane_change: Option<(i64, u32)>,
    brake: Option<BrakePlan>,
}

impl Plan {
    fn speed_at(&self, f: i64) -> f64 {
        self.speed * self.brake.map_or(1.0, |b| b.factor(f))
    }

    fn lane_at(&self, f: i64) -> u32 {
        match self.lane_change {
            Some((c, to)) if f >= c => to,
            _ => self.lane,
        }
    }

    /// Longitudinal positions for frames `0..frames` by exact integration
    /// of the piecewise-linear speed.
    fn ys(&self, frames: i64) -> Vec<f64> {
        let dt = 1.0 / FRAME_RATE_HZ;
        let mut y = self.y0;
        let mut out = Vec::with_capacity(frames as usize);
        for f in 0..frames {
            if f > 0 {
                y += 0.5 * (self.speed_at(f - 1) + self.speed_at(f)) * dt;
            }
            out.push(y);
        }
        out
    }

    fn y_at(&self, f: i64) -> f64 {
        *self.ys(f + 1).last().unwrap()
    }

    fn x_at(&self, f: i64, lane_width: f64) -> f64 {
        let center = |lane: u32| (lane as f64 - 0.5) * lane_width;
        match self.lane_change {
            Some((c, to)) => {
                let from = center(self.lane);
                let u = ((f - (c - RAMP_HALF)) as f64 / (2 * RAMP_HALF) as f64).clamp(0.0, 1.0);
                let s = u * u * (3.0 - 2.0 * u);
                from + (center(to) - from) * s
            }
            None => center(self.lane),
        }
    }
}

/// Last frame `t >= start` such that every frame in `[start, t]` has a
/// scripted 5 s mean-speed ratio below [`BRAKE_TARGET_RATIO`].
fn brake_regime_end(plan: &Plan, start: i64) -> i64 {
    let mut end = start;
    let horizon = FUTURE_FRAMES;
    for t in start..=start + DECEL_FRAMES.1 {
        let v0 = plan.speed_at(t);
        let mean = ((t + 1)..=(t + horizon)).map(|f| plan.speed_at(f)).sum::<f64>() / horizon as f64;
        if mean < BRAKE_TARGET_RATIO * v0 {
            end = t;
        } else {
            break;
        }
    }
    end
}

/// Generates tracks and the script log. Same config and seed give
/// bit-identical output.
pub fn generate(config: &SynthConfig, seed: u64) -> Result<SynthOutput, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = config.frames();
    let n = config.n_vehicles;

    let lane_speeds: Vec<f64> = (0..config.n_lanes)
        .map(|_| rng.random_range(config.speed_min..=config.speed_max))
        .collect();
    let mut plans: Vec<Plan> = (0..n)
        .map(|i| {
            let lane = (i as u32 % config.n_lanes) + 1;
            let slot = (i as u32 / config.n_lanes) as f64;
            let jitter = rng.random_range(0.0..0.25) * config.spacing_m;
            Plan {
                id: i as VehicleId + 1,
                lane,
                y0: slot * config.spacing_m + jitter,
                speed: lane_speeds[(lane - 1) as usize],
                lane_change: None,
                brake: None,
            }
        })
        .collect();

    let n_changes = libm::round(config.pct_lane_changes * n as f64) as usize;
    let n_brakes = libm::round(config.pct_braking * n as f64) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (changers, rest) = order.split_at(n_changes.min(n));
    let brakers = &rest[..n_brakes.min(rest.len())];

    for &i in changers {
        let lane = plans[i].lane;
        let to = match (lane > 1, lane < config.n_lanes) {
            (true, true) => {
                if rng.random_bool(0.5) {
                    lane - 1
                } else {
                    lane + 1
                }
            }
            (true, false) => lane - 1,
            (false, true) => lane + 1,
            (false, false) => unreachable!("validated n_lanes >= 2"),
        };
        let c = rng.random_range(EVENT_MARGIN..=frames - 1 - EVENT_MARGIN);
        plans[i].lane_change = Some((c, to));
    }
    let mut brakers: Vec<usize> = brakers.to_vec();
    brakers.sort_unstable();
    for &i in &brakers {
        plans[i].brake = Some(BrakePlan {
            start: rng.random_range(EVENT_MARGIN..=frames - 1 - EVENT_MARGIN - MAX_PROFILE),
            decel: rng.random_range(DECEL_FRAMES.0..=DECEL_FRAMES.1),
            ratio: rng.random_range(BRAKE_RATIO.0..=BRAKE_RATIO.1),
            hold: rng.random_range(HOLD_FRAMES.0..=HOLD_FRAMES.1),
            accel: rng.random_range(ACCEL_FRAMES.0..=ACCEL_FRAMES.1),
            leader: None,
        });
    }
    for &i in &brakers {
        let mut current = i;
        for _ in 0..config.brake_cascade {
            let lead = plans[current];
            let b = lead.brake.expect("leader brakes");
            let lane = lead.lane_at(b.start);
            let lead_y = lead.y_at(b.start);
            let follower = plans
                .iter()
                .enumerate()
                .filter(|(j, p)| *j != current && p.lane_at(b.start) == lane)
                .map(|(j, p)| (j, p.y_at(b.start)))
                .filter(|(_, y)| *y < lead_y)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            let Some((j, _)) = follower else { break };
            if plans[j].brake.is_some() || plans[j].lane_change.is_some() {
                break;
            }
            let start = b.start + rng.random_range(CASCADE_DELAY.0..=CASCADE_DELAY.1);
            let plan = BrakePlan {
                start,
                leader: Some(lead.id),
                ..b
            };
            if plan.end() > frames - 1 - EVENT_MARGIN {
                break;
            }
            plans[j].brake = Some(plan);
            current = j;
        }
    }

    let noise = Normal::new(0.0, config.position_noise_std.max(0.0)).expect("finite std");
    let mut tracks = Vec::with_capacity(n);
    let mut script = Vec::new();
    for plan in &plans {
        let ys = plan.ys(frames);
        let points = (0..frames)
            .map(|f| {
                let (mut x, mut y) = (plan.x_at(f, config.lane_width_m), ys[f as usize]);
                if config.position_noise_std > 0.0 {
                    x += noise.sample(&mut rng);
                    y += noise.sample(&mut rng);
                }
                TrackPoint {
                    frame: f,
                    x,
                    y,
                    lane: plan.lane_at(f),
                }
            })
            .collect();
        let track = VehicleTrack::new(plan.id, points).map_err(|e| SynthError::Config(alloc::format!("{e}")))?;
        tracks.push(track);

        if let Some((c, to)) = plan.lane_change {
            script.push(ScriptEvent {
                vehicle_id: plan.id,
                frame: c,
                maneuver: ScriptedManeuver::LaneChange {
                    lateral: if to < plan.lane {
                        Lateral::ChangeLeft
                    } else {
                        Lateral::ChangeRight
                    },
                    from_lane: plan.lane,
                    to_lane: to,
                },
            });
        }
        if let Some(b) = plan.brake {
            script.push(ScriptEvent {
                vehicle_id: plan.id,
                frame: b.start,
                maneuver: ScriptedManeuver::Brake {
                    decel_frames: b.decel,
                    ratio: b.ratio,
                    hold_frames: b.hold,
                    accel_frames: b.accel,
                    regime_end: brake_regime_end(plan, b.start),
                    leader: b.leader,
                },
            });
        }
    }
    script.sort_by_key(|e| (e.vehicle_id, e.frame));
    Ok(SynthOutput {
        store: TrackStore::from_tracks("synth", tracks),
        script,
        frames,
    })
}

impl ScriptEvent {
    /// Last frame touched by the scripted maneuver, including a lane
    /// change's ±4 s label window.
    pub fn last_frame(&self) -> FrameIndex {
        match self.maneuver {
            ScriptedManeuver::LaneChange { .. } => self.frame + crate::maneuvers::LANE_CHANGE_WINDOW,
            ScriptedManeuver::Brake {
                decel_frames,
                hold_frames,
                accel_frames,
                ..
            } => self.frame + decel_frames + hold_frames + accel_frames,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maneuvers::{label, label_lateral, label_longitudinal, Longitudinal};

    #[test]
    fn same_seed_same_output() {
        let cfg = SynthConfig {
            position_noise_std: 0.1,
            brake_cascade: 2,
            ..SynthConfig::default()
        };
        assert_eq!(generate(&cfg, 7).unwrap(), generate(&cfg, 7).unwrap());
        assert_ne!(generate(&cfg, 7).unwrap(), generate(&cfg, 8).unwrap());
    }

    #[test]
    fn no_events_means_keep_and_normal() {
        let cfg = SynthConfig {
            pct_lane_changes: 0.0,
            pct_braking: 0.0,
            n_vehicles: 12,
            ..SynthConfig::default()
        };
        let out = generate(&cfg, 1).unwrap();
        assert!(out.script.is_empty());
        for track in out.store.tracks() {
            for t in (0..out.frames - FUTURE_FRAMES).step_by(7) {
                assert_eq!(label(track, t).unwrap(), Default::default());
            }
        }
    }

    #[test]
    fn lane_change_window_is_labeled() {
        let cfg = SynthConfig {
            pct_lane_changes: 1.0,
            pct_braking: 0.0,
            n_vehicles: 9,
            ..SynthConfig::default()
        };
        let out = generate(&cfg, 3).unwrap();
        assert_eq!(out.script.len(), 9);
        for ev in &out.script {
            let ScriptedManeuver::LaneChange { lateral, from_lane, to_lane } = ev.maneuver else {
                panic!("unexpected event")
            };
            assert_eq!(from_lane.abs_diff(to_lane), 1);
            let track = out.store.track(ev.vehicle_id).unwrap();
            for t in ev.frame - 40..=ev.frame + 40 {
                assert_eq!(label_lateral(track, t), lateral);
            }
            assert_eq!(label_lateral(track, ev.frame - 41), Lateral::KeepLane);
            assert_eq!(label_lateral(track, ev.frame + 41), Lateral::KeepLane);
        }
    }

    #[test]
    fn scripted_brake_is_labeled_at_start() {
        let cfg = SynthConfig {
            pct_lane_changes: 0.0,
            pct_braking: 1.0,
            n_vehicles: 12,
            ..SynthConfig::default()
        };
        let out = generate(&cfg, 5).unwrap();
        for ev in &out.script {
            let ScriptedManeuver::Brake { regime_end, ratio, .. } = ev.maneuver else {
                panic!("unexpected event")
            };
            assert!(ratio <= 0.5);
            assert!(regime_end >= ev.frame);
            let track = out.store.track(ev.vehicle_id).unwrap();
            assert_eq!(label_longitudinal(track, ev.frame, 50), Ok(Longitudinal::Brake));
        }
    }

    #[test]
    fn cascade_assigns_followers() {
        let cfg = SynthConfig {
            pct_lane_changes: 0.0,
            pct_braking: 0.05,
            brake_cascade: 3,
            n_vehicles: 60,
            duration_s: 90.0,
            ..SynthConfig::default()
        };
        let out = generate(&cfg, 11).unwrap();
        let followers: Vec<_> = out
            .script
            .iter()
            .filter_map(|e| match e.maneuver {
                ScriptedManeuver::Brake { leader: Some(l), .. } => Some((e, l)),
                _ => None,
            })
            .collect();
        assert!(!followers.is_empty());
        for (ev, leader) in followers {
            let lead = out.script.iter().find(|e| e.vehicle_id == leader).unwrap();
            let delay = ev.frame - lead.frame;
            assert!((CASCADE_DELAY.0..=CASCADE_DELAY.1).contains(&delay));
            let (f, l) = (out.store.position(ev.vehicle_id, lead.frame).unwrap(), out.store.position(leader, lead.frame).unwrap());
            assert_eq!(f.lane, l.lane);
            assert!(f.y < l.y);
        }
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let bad = [
            SynthConfig { pct_lane_changes: 0.7, pct_braking: 0.5, ..SynthConfig::default() },
            SynthConfig { n_lanes: 1, ..SynthConfig::default() },
            SynthConfig { duration_s: 20.0, ..SynthConfig::default() },
            SynthConfig { pct_braking: 1.5, pct_lane_changes: 0.0, ..SynthConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(generate(&cfg, 0), Err(SynthError::Config(_))));
        }
    }
}
