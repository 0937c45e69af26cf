//! Lateral and longitudinal maneuver labels.
//!
//! Lane ids grow to the right, so a decreasing lane id is a change to the
//! left. Speeds come from finite differences of positions, never from a
//! dataset velocity column.

use crate::trackstore::{FrameIndex, VehicleTrack, FRAME_RATE_HZ, FUTURE_FRAMES};

/// A vehicle is in a lane-change state within this many frames (4 s) of
/// the cross-over.
pub const LANE_CHANGE_WINDOW: i64 = 40;
/// Braking when the mean horizon speed drops below this fraction of the
/// current speed.
pub const BRAKE_RATIO: f64 = 0.8;
/// Below this speed (m/s) the braking ratio is not evaluated.
pub const MIN_BRAKE_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lateral {
    KeepLane = 0,
    ChangeLeft = 1,
    ChangeRight = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Longitudinal {
    Normal = 0,
    Brake = 1,
}

impl Lateral {
    pub const ALL: [Lateral; 3] = [Lateral::KeepLane, Lateral::ChangeLeft, Lateral::ChangeRight];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Lateral::KeepLane => "keep",
            Lateral::ChangeLeft => "left",
            Lateral::ChangeRight => "right",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == s)
    }
}

impl Longitudinal {
    pub const ALL: [Longitudinal; 2] = [Longitudinal::Normal, Longitudinal::Brake];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Longitudinal::Normal => "normal",
            Longitudinal::Brake => "brake",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == s)
    }
}

/// Joint maneuver class. The joint index is `2 * lateral + longitudinal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ManeuverLabel {
    pub lateral: Lateral,
    pub longitudinal: Longitudinal,
}

impl Default for ManeuverLabel {
    fn default() -> Self {
        Self::new(Lateral::KeepLane, Longitudinal::Normal)
    }
}

impl ManeuverLabel {
    pub const COUNT: usize = 6;

    pub const fn new(lateral: Lateral, longitudinal: Longitudinal) -> Self {
        Self {
            lateral,
            longitudinal,
        }
    }

    pub fn class_index(self) -> usize {
        2 * self.lateral.index() + self.longitudinal.index()
    }

    pub fn from_class_index(i: usize) -> Option<Self> {
        if i >= Self::COUNT {
            return None;
        }
        Some(Self::new(Lateral::from_index(i / 2)?, Longitudinal::from_index(i % 2)?))
    }

    /// All six classes in joint-index order.
    pub fn all() -> [ManeuverLabel; Self::COUNT] {
        core::array::from_fn(|i| Self::from_class_index(i).unwrap())
    }

    /// Lateral one-hot (3) followed by longitudinal one-hot (2).
    pub fn one_hot(self) -> [f64; 5] {
        let mut v = [0.0; 5];
        v[self.lateral.index()] = 1.0;
        v[3 + self.longitudinal.index()] = 1.0;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("track of vehicle {vehicle} does not cover frames {from}..={to}")]
    OutOfRange {
        vehicle: u32,
        from: FrameIndex,
        to: FrameIndex,
    },
}

/// Lane-change state at frame `t`. The cross-over nearest to `t` within
/// ±4 s decides; an equidistant pair resolves to the earlier one.
pub fn label_lateral(track: &VehicleTrack, t: FrameIndex) -> Lateral {
    let mut best: Option<(i64, Lateral)> = None;
    for c in (t - LANE_CHANGE_WINDOW)..=(t + LANE_CHANGE_WINDOW) {
        let (Some(prev), Some(cur)) = (track.get(c - 1), track.get(c)) else {
            continue;
        };
        if prev.lane == cur.lane {
            continue;
        }
        let dist = (c - t).abs();
        // Scanning forward in time, so a strict comparison keeps the earlier tie.
        if best.map_or(true, |(d, _)| dist < d) {
            let dir = if cur.lane < prev.lane {
                Lateral::ChangeLeft
            } else {
                Lateral::ChangeRight
            };
            best = Some((dist, dir));
        }
    }
    best.map_or(Lateral::KeepLane, |(_, l)| l)
}

/// Speed in m/s at `frame` by central differences, one-sided at track ends.
pub fn speed_at(track: &VehicleTrack, frame: FrameIndex) -> Option<f64> {
    let dt = 1.0 / FRAME_RATE_HZ;
    let here = track.get(frame)?;
    let (a, b, span) = match (track.get(frame - 1), track.get(frame + 1)) {
        (Some(p), Some(n)) => (p, n, 2.0 * dt),
        (None, Some(n)) => (here, n, dt),
        (Some(p), None) => (p, here, dt),
        (None, None) => return None,
    };
    let vx = (b.x - a.x) / span;
    let vy = (b.y - a.y) / span;
    Some(libm::hypot(vx, vy))
}

/// Braking iff the mean speed over `(t, t + horizon]` is below 0.8 times
/// the speed at `t`. Near-stationary vehicles are labeled `Normal`.
pub fn label_longitudinal(
    track: &VehicleTrack,
    t: FrameIndex,
    horizon: i64,
) -> Result<Longitudinal, LabelError> {
    let out_of_range = LabelError::OutOfRange {
        vehicle: track.id(),
        from: t,
        to: t + horizon,
    };
    if horizon < 1 || !track.contains(t) || !track.contains(t + horizon) {
        return Err(out_of_range);
    }
    let v0 = speed_at(track, t).ok_or(out_of_range)?;
    if v0 < MIN_BRAKE_SPEED {
        return Ok(Longitudinal::Normal);
    }
    let mut total = 0.0;
    for f in (t + 1)..=(t + horizon) {
        total += speed_at(track, f).ok_or(out_of_range)?;
    }
    let mean = total / horizon as f64;
    Ok(if mean < BRAKE_RATIO * v0 {
        Longitudinal::Brake
    } else {
        Longitudinal::Normal
    })
}

/// Both labels at `t` with the standard 5 s horizon.
pub fn label(track: &VehicleTrack, t: FrameIndex) -> Result<ManeuverLabel, LabelError> {
    Ok(ManeuverLabel::new(
        label_lateral(track, t),
        label_longitudinal(track, t, FUTURE_FRAMES)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trackstore::TrackPoint;
    use alloc::vec::Vec;

    fn track_with_lanes(lane_of: impl Fn(i64) -> u32, frames: i64) -> VehicleTrack {
        let points = (0..frames)
            .map(|f| TrackPoint {
                frame: f,
                x: 0.0,
                y: f as f64,
                lane: lane_of(f),
            })
            .collect();
        VehicleTrack::new(1, points).unwrap()
    }

    /// Track whose per-frame displacement is `step(f)` meters.
    fn track_with_steps(step: impl Fn(i64) -> f64, frames: i64) -> VehicleTrack {
        let mut y = 0.0;
        let points = (0..frames)
            .map(|f| {
                if f > 0 {
                    y += step(f);
                }
                TrackPoint { frame: f, x: 0.0, y, lane: 1 }
            })
            .collect();
        VehicleTrack::new(1, points).unwrap()
    }

    #[test]
    fn lateral_examples() {
        let t = 100;
        let constant = track_with_lanes(|_| 2, 300);
        assert_eq!(label_lateral(&constant, t), Lateral::KeepLane);
        let left = track_with_lanes(|f| if f < t + 20 { 3 } else { 2 }, 300);
        assert_eq!(label_lateral(&left, t), Lateral::ChangeLeft);
        let late = track_with_lanes(|f| if f < t + 41 { 2 } else { 3 }, 300);
        assert_eq!(label_lateral(&late, t), Lateral::KeepLane);
        let edge = track_with_lanes(|f| if f < t + 40 { 2 } else { 3 }, 300);
        assert_eq!(label_lateral(&edge, t), Lateral::ChangeRight);
    }

    #[test]
    fn nearest_crossover_wins_and_ties_go_earlier() {
        // 2 -> 1 at t-10 (left), 1 -> 2 at t+5 (right): right is nearer.
        let t = 100;
        let tr = track_with_lanes(|f| if f < t - 10 { 2 } else if f < t + 5 { 1 } else { 2 }, 300);
        assert_eq!(label_lateral(&tr, t), Lateral::ChangeRight);
        // Equidistant at t-10 and t+10: earlier (left) wins.
        let tie = track_with_lanes(|f| if f < t - 10 { 2 } else if f < t + 10 { 1 } else { 2 }, 300);
        assert_eq!(label_lateral(&tie, t), Lateral::ChangeLeft);
    }

    #[test]
    fn window_clips_at_track_start() {
        let tr = track_with_lanes(|f| if f < 3 { 2 } else { 1 }, 60);
        assert_eq!(label_lateral(&tr, 0), Lateral::ChangeLeft);
    }

    #[test]
    fn longitudinal_ratio_threshold() {
        // 1.0 m/frame = 10 m/s at t, then a constant 0.79 or 0.81 m/frame.
        let t = 10;
        let brake = track_with_steps(|f| if f <= t + 1 { 1.0 } else { 0.79 }, 80);
        let normal = track_with_steps(|f| if f <= t + 1 { 1.0 } else { 0.81 }, 80);
        // Mean over (t, t+50]: frame t+1 straddles the change.
        let mean = |tr: &VehicleTrack| ((t + 1)..=(t + 50)).map(|f| speed_at(tr, f).unwrap()).sum::<f64>() / 50.0;
        assert!((speed_at(&brake, t).unwrap() - 10.0).abs() < 1e-9);
        assert!(mean(&brake) < 8.0);
        assert!(mean(&normal) >= 8.0);
        assert_eq!(label_longitudinal(&brake, t, 50), Ok(Longitudinal::Brake));
        assert_eq!(label_longitudinal(&normal, t, 50), Ok(Longitudinal::Normal));
        let constant = track_with_steps(|_| 2.0, 80);
        assert_eq!(label_longitudinal(&constant, t, 50), Ok(Longitudinal::Normal));
    }

    #[test]
    fn stationary_vehicle_is_normal() {
        let tr = track_with_steps(|f| if f < 20 { 0.0 } else { 0.0 }, 80);
        assert_eq!(label_longitudinal(&tr, 5, 50), Ok(Longitudinal::Normal));
    }

    #[test]
    fn short_future_is_an_error() {
        let tr = track_with_steps(|_| 1.0, 40);
        assert!(label_longitudinal(&tr, 5, 50).is_err());
    }

    #[test]
    fn joint_index_is_bijective() {
        let all = ManeuverLabel::all();
        let idx: Vec<usize> = all.iter().map(|m| m.class_index()).collect();
        assert_eq!(idx, (0..6).collect::<Vec<_>>());
        for m in all {
            assert_eq!(ManeuverLabel::from_class_index(m.class_index()), Some(m));
            let oh = m.one_hot();
            assert_eq!(oh[..3].iter().sum::<f64>(), 1.0);
            assert_eq!(oh[3..].iter().sum::<f64>(), 1.0);
        }
        assert_eq!(ManeuverLabel::from_class_index(6), None);
    }
}
