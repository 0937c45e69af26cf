//! Vehicle tracks, the prediction-time local frame and sample construction.
//!
//! Coordinates are meters throughout: `x` is lateral, `y` is longitudinal
//! (direction of travel). Frames are 10 Hz dataset frames; samples are
//! downsampled by two, keeping frames congruent to the prediction frame.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::maneuvers::{self, ManeuverLabel};

pub type VehicleId = u32;
pub type FrameIndex = i64;

/// Dataset sampling rate.
pub const FRAME_RATE_HZ: f64 = 10.0;
/// 3 s of history at 10 Hz.
pub const HISTORY_FRAMES: i64 = 30;
/// 5 s of future at 10 Hz.
pub const FUTURE_FRAMES: i64 = 50;
pub const DOWNSAMPLE: i64 = 2;
/// History points per sample, the prediction frame included.
pub const HISTORY_LEN: usize = (HISTORY_FRAMES / DOWNSAMPLE) as usize + 1;
pub const FUTURE_LEN: usize = (FUTURE_FRAMES / DOWNSAMPLE) as usize;
pub const NUM_NEIGHBORS: usize = 6;
/// Ego (x, y) followed by six neighbor (x, y) pairs.
pub const INPUT_CHANNELS: usize = 2 + 2 * NUM_NEIGHBORS;
/// Largest plausible longitudinal displacement between consecutive frames.
pub const MAX_STEP_M: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrackError {
    #[error("vehicle {vehicle}: duplicate row for frame {frame}")]
    DuplicateFrame { vehicle: VehicleId, frame: FrameIndex },
    #[error("vehicle {vehicle}: frames jump from {after} to {next}")]
    FrameGap {
        vehicle: VehicleId,
        after: FrameIndex,
        next: FrameIndex,
    },
    #[error("vehicle {vehicle}: lane id {lane} at frame {frame} is below 1")]
    InvalidLane {
        vehicle: VehicleId,
        frame: FrameIndex,
        lane: i64,
    },
    #[error("vehicle {vehicle}: implausible step of {dy} m before frame {frame}")]
    ImplausibleStep {
        vehicle: VehicleId,
        frame: FrameIndex,
        dy: f64,
    },
    #[error("vehicle {vehicle}: non-finite coordinate at frame {frame}")]
    NonFinite { vehicle: VehicleId, frame: FrameIndex },
    #[error("vehicle {vehicle} has no position at frame {frame}")]
    MissingFrame { vehicle: VehicleId, frame: FrameIndex },
    #[error("unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
}

/// One raw observation, already converted to meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRow {
    pub vehicle: VehicleId,
    pub frame: FrameIndex,
    pub x: f64,
    pub y: f64,
    pub lane: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub frame: FrameIndex,
    pub x: f64,
    pub y: f64,
    pub lane: u32,
}

impl TrackPoint {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// A gap-free, frame-ordered trajectory of one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTrack {
    id: VehicleId,
    points: Vec<TrackPoint>,
}

impl VehicleTrack {
    /// Validates ordering, contiguity, lane ids and step plausibility.
    pub fn new(id: VehicleId, points: Vec<TrackPoint>) -> Result<Self, TrackError> {
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(TrackError::NonFinite {
                    vehicle: id,
                    frame: p.frame,
                });
            }
            if p.lane < 1 {
                return Err(TrackError::InvalidLane {
                    vehicle: id,
                    frame: p.frame,
                    lane: p.lane as i64,
                });
            }
            if i == 0 {
                continue;
            }
            let prev = &points[i - 1];
            if p.frame == prev.frame {
                return Err(TrackError::DuplicateFrame {
                    vehicle: id,
                    frame: p.frame,
                });
            }
            if p.frame != prev.frame + 1 {
                return Err(TrackError::FrameGap {
                    vehicle: id,
                    after: prev.frame,
                    next: p.frame,
                });
            }
            let dy = p.y - prev.y;
            if dy.abs() > MAX_STEP_M {
                return Err(TrackError::ImplausibleStep {
                    vehicle: id,
                    frame: p.frame,
                    dy,
                });
            }
        }
        Ok(Self { id, points })
    }

    pub fn id(&self) -> VehicleId {
        self.id
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_frame(&self) -> Option<FrameIndex> {
        self.points.first().map(|p| p.frame)
    }

    pub fn last_frame(&self) -> Option<FrameIndex> {
        self.points.last().map(|p| p.frame)
    }

    pub fn get(&self, frame: FrameIndex) -> Option<&TrackPoint> {
        let first = self.first_frame()?;
        let offset = frame.checked_sub(first)?;
        if offset < 0 {
            return None;
        }
        self.points.get(offset as usize)
    }

    pub fn contains(&self, frame: FrameIndex) -> bool {
        self.get(frame).is_some()
    }
}

/// Immutable collection of tracks from one recording subset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackStore {
    dataset_tag: String,
    tracks: BTreeMap<VehicleId, VehicleTrack>,
    frame_index: BTreeMap<FrameIndex, BTreeSet<VehicleId>>,
}

impl TrackStore {
    /// Groups unsorted rows by vehicle and validates each track.
    pub fn from_rows<I>(dataset_tag: impl Into<String>, rows: I) -> Result<Self, TrackError>
    where
        I: IntoIterator<Item = TrackRow>,
    {
        let mut grouped: BTreeMap<VehicleId, Vec<TrackRow>> = BTreeMap::new();
        for row in rows {
            grouped.entry(row.vehicle).or_default().push(row);
        }
        let mut tracks = Vec::with_capacity(grouped.len());
        for (id, mut rows) in grouped {
            rows.sort_by_key(|r| r.frame);
            if let Some(w) = rows.windows(2).find(|w| w[0].frame == w[1].frame) {
                return Err(TrackError::DuplicateFrame {
                    vehicle: id,
                    frame: w[0].frame,
                });
            }
            let mut points = Vec::with_capacity(rows.len());
            for r in rows {
                if r.lane < 1 || r.lane > u32::MAX as i64 {
                    return Err(TrackError::InvalidLane {
                        vehicle: id,
                        frame: r.frame,
                        lane: r.lane,
                    });
                }
                points.push(TrackPoint {
                    frame: r.frame,
                    x: r.x,
                    y: r.y,
                    lane: r.lane as u32,
                });
            }
            tracks.push(VehicleTrack::new(id, points)?);
        }
        Ok(Self::from_tracks(dataset_tag, tracks))
    }

    /// Builds the store from already validated tracks. A later track with a
    /// repeated id replaces the earlier one.
    pub fn from_tracks<I>(dataset_tag: impl Into<String>, tracks: I) -> Self
    where
        I: IntoIterator<Item = VehicleTrack>,
    {
        let mut store = Self {
            dataset_tag: dataset_tag.into(),
            ..Self::default()
        };
        for track in tracks {
            store.tracks.insert(track.id, track);
        }
        for track in store.tracks.values() {
            for p in &track.points {
                store.frame_index.entry(p.frame).or_default().insert(track.id);
            }
        }
        store
    }

    pub fn dataset_tag(&self) -> &str {
        &self.dataset_tag
    }

    pub fn track(&self, id: VehicleId) -> Option<&VehicleTrack> {
        self.tracks.get(&id)
    }

    pub fn tracks(&self) -> impl Iterator<Item = &VehicleTrack> {
        self.tracks.values()
    }

    pub fn vehicle_ids(&self) -> impl Iterator<Item = VehicleId> + '_ {
        self.tracks.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// Vehicles observed at `frame`.
    pub fn vehicles_at(&self, frame: FrameIndex) -> impl Iterator<Item = VehicleId> + '_ {
        self.frame_index
            .get(&frame)
            .into_iter()
            .flat_map(|ids| ids.iter().copied())
    }

    pub fn position(&self, vehicle: VehicleId, frame: FrameIndex) -> Result<&TrackPoint, TrackError> {
        self.track(vehicle)
            .ok_or(TrackError::UnknownVehicle(vehicle))?
            .get(frame)
            .ok_or(TrackError::MissingFrame { vehicle, frame })
    }

    /// Position of `other` at frame `s` in the frame of reference centred on
    /// `vehicle` at frame `t`.
    pub fn to_local_frame(
        &self,
        vehicle: VehicleId,
        t: FrameIndex,
        other: VehicleId,
        s: FrameIndex,
    ) -> Result<[f64; 2], TrackError> {
        let origin = self.position(vehicle, t)?;
        let p = self.position(other, s)?;
        Ok([p.x - origin.x, p.y - origin.y])
    }

    /// Nearest vehicle ahead and behind in the ego lane and both adjacent
    /// lanes at frame `t`, in [`NeighborSlot`] order.
    ///
    /// A vehicle level with the ego (`Δy = 0`) counts as ahead; equal
    /// distances resolve to the lower vehicle id.
    pub fn select_neighbors(
        &self,
        vehicle: VehicleId,
        t: FrameIndex,
    ) -> Result<[Option<VehicleId>; NUM_NEIGHBORS], TrackError> {
        let ego = *self.position(vehicle, t)?;
        let mut best: [Option<(f64, VehicleId)>; NUM_NEIGHBORS] = [None; NUM_NEIGHBORS];
        for other in self.vehicles_at(t) {
            if other == vehicle {
                continue;
            }
            let p = self.position(other, t)?;
            let dy = p.y - ego.y;
            let Some(slot) = NeighborSlot::classify(ego.lane, p.lane, dy) else {
                continue;
            };
            let key = (dy.abs(), other);
            let entry = &mut best[slot as usize];
            let better = match entry {
                None => true,
                Some((d, id)) => key.0 < *d || (key.0 == *d && key.1 < *id),
            };
            if better {
                *entry = Some(key);
            }
        }
        Ok(best.map(|b| b.map(|(_, id)| id)))
    }

    /// Builds the prediction sample for `vehicle` at frame `t`.
    pub fn build_sample(&self, vehicle: VehicleId, t: FrameIndex) -> Result<Sample, SampleSkip> {
        let track = self.track(vehicle).ok_or(SampleSkip::VehicleAbsent)?;
        let origin = *track.get(t).ok_or(SampleSkip::VehicleAbsent)?;
        if !track.contains(t - HISTORY_FRAMES) {
            return Err(SampleSkip::InsufficientHistory);
        }
        if !track.contains(t + FUTURE_FRAMES) {
            return Err(SampleSkip::InsufficientFuture);
        }
        let neighbors = self
            .select_neighbors(vehicle, t)
            .map_err(|_| SampleSkip::VehicleAbsent)?;
        let label = maneuvers::label(track, t).map_err(|_| SampleSkip::InsufficientFuture)?;

        let mut history = Vec::with_capacity(HISTORY_LEN);
        for k in 0..HISTORY_LEN as i64 {
            let s = t - HISTORY_FRAMES + k * DOWNSAMPLE;
            let mut row = [0.0; INPUT_CHANNELS];
            let ego = track.get(s).ok_or(SampleSkip::InsufficientHistory)?;
            row[0] = ego.x - origin.x;
            row[1] = ego.y - origin.y;
            for (slot, id) in neighbors.iter().enumerate() {
                // Neighbors missing at a past frame stay zero-filled.
                if let Some(p) = id.and_then(|id| self.track(id)).and_then(|tr| tr.get(s)) {
                    row[2 + 2 * slot] = p.x - origin.x;
                    row[3 + 2 * slot] = p.y - origin.y;
                }
            }
            history.push(row);
        }
        let future = (1..=FUTURE_LEN as i64)
            .map(|k| {
                let p = track.get(t + k * DOWNSAMPLE).ok_or(SampleSkip::InsufficientFuture)?;
                Ok([p.x - origin.x, p.y - origin.y])
            })
            .collect::<Result<Vec<_>, SampleSkip>>()?;

        Ok(Sample {
            vehicle_id: vehicle,
            history,
            future,
            label,
            neighbor_mask: neighbors.map(|n| n.is_some()),
            origin: Origin {
                x: origin.x,
                y: origin.y,
                frame: t,
            },
        })
    }

    /// Samples for the given vehicles at every `stride`-th eligible frame.
    pub fn build_samples<I>(&self, vehicles: I, stride: usize) -> SampleBatch
    where
        I: IntoIterator<Item = VehicleId>,
    {
        let stride = stride.max(1) as i64;
        let mut batch = SampleBatch::default();
        for id in vehicles {
            let Some(track) = self.track(id) else {
                batch.skipped += 1;
                continue;
            };
            let (Some(first), Some(last)) = (track.first_frame(), track.last_frame()) else {
                continue;
            };
            let mut t = first + HISTORY_FRAMES;
            while t + FUTURE_FRAMES <= last {
                match self.build_sample(id, t) {
                    Ok(s) => batch.samples.push(s),
                    Err(_) => batch.skipped += 1,
                }
                t += stride;
            }
        }
        batch
    }
}

/// Neighbor slots, in the channel order used by [`Sample::history`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NeighborSlot {
    SameAhead = 0,
    SameBehind = 1,
    LeftAhead = 2,
    LeftBehind = 3,
    RightAhead = 4,
    RightBehind = 5,
}

impl NeighborSlot {
    pub const ALL: [NeighborSlot; NUM_NEIGHBORS] = [
        NeighborSlot::SameAhead,
        NeighborSlot::SameBehind,
        NeighborSlot::LeftAhead,
        NeighborSlot::LeftBehind,
        NeighborSlot::RightAhead,
        NeighborSlot::RightBehind,
    ];

    /// Slot of a vehicle in lane `other_lane` at longitudinal offset `dy`
    /// from an ego vehicle in `ego_lane`. Left is the lower lane id.
    pub fn classify(ego_lane: u32, other_lane: u32, dy: f64) -> Option<Self> {
        let ahead = dy >= 0.0;
        let slot = if other_lane == ego_lane {
            if ahead {
                NeighborSlot::SameAhead
            } else {
                NeighborSlot::SameBehind
            }
        } else if other_lane + 1 == ego_lane {
            if ahead {
                NeighborSlot::LeftAhead
            } else {
                NeighborSlot::LeftBehind
            }
        } else if other_lane == ego_lane + 1 {
            if ahead {
                NeighborSlot::RightAhead
            } else {
                NeighborSlot::RightBehind
            }
        } else {
            return None;
        };
        Some(slot)
    }
}

/// Global position and frame of the local-frame origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Origin {
    pub x: f64,
    pub y: f64,
    pub frame: FrameIndex,
}

/// One prediction instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub vehicle_id: VehicleId,
    /// `HISTORY_LEN` rows of ego and neighbor positions, oldest first.
    pub history: Vec<[f64; INPUT_CHANNELS]>,
    /// `FUTURE_LEN` ego positions at 0.2 s spacing.
    pub future: Vec<[f64; 2]>,
    pub label: ManeuverLabel,
    pub neighbor_mask: [bool; NUM_NEIGHBORS],
    pub origin: Origin,
}

impl Sample {
    pub fn to_global(&self, local: [f64; 2]) -> [f64; 2] {
        [local[0] + self.origin.x, local[1] + self.origin.y]
    }

    /// Ego positions of the history, oldest first.
    pub fn ego_history(&self) -> Vec<[f64; 2]> {
        self.history.iter().map(|r| [r[0], r[1]]).collect()
    }
}

/// Why a sample could not be built. Callers count these instead of failing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SampleSkip {
    #[error("vehicle not present at the prediction frame")]
    VehicleAbsent,
    #[error("less than 3 s of history")]
    InsufficientHistory,
    #[error("less than 5 s of future")]
    InsufficientFuture,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleBatch {
    pub samples: Vec<Sample>,
    pub skipped: usize,
}

/// Train/test vehicle split of one subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSplit {
    pub dataset_tag: String,
    pub train: Vec<VehicleId>,
    pub test: Vec<VehicleId>,
    /// Fewer than four vehicles; the test side still got one.
    pub undersized: bool,
}

/// Seeded per-subset shuffle sending a quarter of the vehicles to test.
pub fn split_train_test(stores: &[TrackStore], seed: u64) -> Vec<SubsetSplit> {
    stores
        .iter()
        .enumerate()
        .map(|(i, store)| {
            let mut ids: Vec<VehicleId> = store.vehicle_ids().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            ids.shuffle(&mut rng);
            let n = ids.len();
            let n_test = if n == 0 { 0 } else { (n / 4).max(1) };
            let train = ids.split_off(n_test);
            let mut test = ids;
            test.sort_unstable();
            let mut train = train;
            train.sort_unstable();
            SubsetSplit {
                dataset_tag: String::from(store.dataset_tag()),
                train,
                test,
                undersized: n > 0 && n < 4,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn row(vehicle: VehicleId, frame: FrameIndex, x: f64, y: f64, lane: i64) -> TrackRow {
        TrackRow {
            vehicle,
            frame,
            x,
            y,
            lane,
        }
    }

    fn straight(vehicle: VehicleId, frames: core::ops::Range<i64>, x: f64, y0: f64, v: f64, lane: i64) -> Vec<TrackRow> {
        frames.map(|f| row(vehicle, f, x, y0 + v * f as f64 * 0.1, lane)).collect()
    }

    #[test]
    fn empty_rows_give_empty_store() {
        let store = TrackStore::from_rows("x", Vec::new()).unwrap();
        assert!(store.is_empty());
    }

    #[test]
    fn unsorted_rows_are_ordered() {
        let rows = vec![row(1, 3, 0.0, 0.3, 1), row(1, 1, 0.0, 0.1, 1), row(1, 2, 0.0, 0.2, 1)];
        let store = TrackStore::from_rows("x", rows).unwrap();
        let frames: Vec<_> = store.track(1).unwrap().points().iter().map(|p| p.frame).collect();
        assert_eq!(frames, vec![1, 2, 3]);
        assert_eq!(store.vehicles_at(2).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn duplicate_frame_is_rejected() {
        let rows = vec![row(4, 1, 0.0, 0.0, 1), row(4, 1, 0.0, 0.0, 1)];
        let err = TrackStore::from_rows("x", rows).unwrap_err();
        assert_eq!(err, TrackError::DuplicateFrame { vehicle: 4, frame: 1 });
    }

    #[test]
    fn gaps_lanes_and_jumps_are_rejected() {
        let gap = vec![row(1, 1, 0.0, 0.0, 1), row(1, 3, 0.0, 0.0, 1)];
        assert!(matches!(TrackStore::from_rows("x", gap), Err(TrackError::FrameGap { vehicle: 1, .. })));
        let lane = vec![row(1, 1, 0.0, 0.0, 0)];
        assert!(matches!(TrackStore::from_rows("x", lane), Err(TrackError::InvalidLane { .. })));
        let jump = vec![row(1, 1, 0.0, 0.0, 1), row(1, 2, 0.0, 5.5, 1)];
        assert!(matches!(TrackStore::from_rows("x", jump), Err(TrackError::ImplausibleStep { .. })));
    }

    #[test]
    fn local_frame_examples() {
        let rows = vec![
            row(1, 0, 6.2, 80.5, 2),
            row(2, 20, 9.9, 120.5, 3),
        ]
        .into_iter()
        .chain((1..=20).map(|f| row(1, f, 6.2, 80.5 + f as f64, 2)));
        let store = TrackStore::from_rows("x", rows).unwrap();
        assert_eq!(store.to_local_frame(1, 20, 1, 20).unwrap(), [0.0, 0.0]);
        let p = store.to_local_frame(1, 20, 2, 20).unwrap();
        assert!((p[0] - 3.7).abs() < 1e-12 && (p[1] - 20.0).abs() < 1e-12);
        assert_eq!(store.to_local_frame(1, 20, 1, 0).unwrap(), [0.0, -20.0]);
        assert_eq!(
            store.to_local_frame(1, 20, 2, 5),
            Err(TrackError::MissingFrame { vehicle: 2, frame: 5 })
        );
    }

    #[test]
    fn lone_vehicle_has_no_neighbors() {
        let store = TrackStore::from_rows("x", straight(1, 0..5, 1.8, 0.0, 10.0, 2)).unwrap();
        assert_eq!(store.select_neighbors(1, 2).unwrap(), [None; 6]);
    }

    #[test]
    fn single_leader_fills_one_slot() {
        let rows = [straight(1, 0..5, 5.5, 0.0, 10.0, 2), straight(2, 0..5, 5.5, 15.0, 10.0, 2)].concat();
        let store = TrackStore::from_rows("x", rows).unwrap();
        let slots = store.select_neighbors(1, 3).unwrap();
        assert_eq!(slots[NeighborSlot::SameAhead as usize], Some(2));
        assert_eq!(slots.iter().filter(|s| s.is_some()).count(), 1);
    }

    #[test]
    fn sample_lengths_and_boundaries() {
        let store = TrackStore::from_rows("x", straight(1, 0..81, 1.8, 0.0, 20.0, 1)).unwrap();
        let s = store.build_sample(1, 30).unwrap();
        assert_eq!(s.history.len(), 16);
        assert_eq!(s.future.len(), 25);
        assert_eq!(s.history[15][0..2], [0.0, 0.0]);
        assert_eq!(store.build_sample(1, 29), Err(SampleSkip::InsufficientHistory));
        assert_eq!(store.build_sample(1, 31), Err(SampleSkip::InsufficientFuture));
    }

    #[test]
    fn constant_scene_sample() {
        let ego: Vec<_> = (0..100).map(|f| row(1, f, 1.85, 50.0, 1)).collect();
        let lead: Vec<_> = (0..100).map(|f| row(2, f, 1.85, 60.0, 1)).collect();
        let store = TrackStore::from_rows("x", [ego, lead].concat()).unwrap();
        let s = store.build_sample(1, 40).unwrap();
        for r in &s.history {
            let mut expected = [0.0; INPUT_CHANNELS];
            expected[3] = 10.0;
            assert_eq!(*r, expected);
        }
        assert!(s.future.iter().all(|p| *p == [0.0, 0.0]));
        assert_eq!(s.neighbor_mask, [true, false, false, false, false, false]);
    }

    #[test]
    fn split_sizes() {
        let mk = |n: u32, tag: &str| {
            let tracks = (0..n).map(|i| VehicleTrack::new(i, vec![TrackPoint { frame: 0, x: 0.0, y: 0.0, lane: 1 }]).unwrap());
            TrackStore::from_tracks(tag, tracks)
        };
        let one = split_train_test(&[mk(100, "a")], 3);
        assert_eq!((one[0].test.len(), one[0].train.len()), (25, 75));
        let three = split_train_test(&[mk(40, "a"), mk(40, "b"), mk(40, "c")], 3);
        assert_eq!(three.iter().map(|s| s.test.len()).sum::<usize>(), 30);
        let tiny = split_train_test(&[mk(3, "a")], 3);
        assert_eq!(tiny[0].test.len(), 1);
        assert!(tiny[0].undersized);
        assert_eq!(split_train_test(&[mk(100, "a")], 3), one);
    }
}
