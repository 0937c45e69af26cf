//! Prediction JSON and density-grid CSV.
//!
//! A prediction file is a JSON array with one object per sample:
//! `{vehicle_id, frame, origin: [x, y], modes: [...]}`. Each mode is
//! `{lateral, longitudinal, probability, trajectory}`, the maneuver names
//! being `null` for single-mode predictors, and each trajectory step is
//! `{t, mux, muy, sx, sy, rho}` with `t` in seconds after the prediction
//! frame and positions in the sample's local frame.

use std::fmt::Write as _;

use mlstm_core::model::ManeuverDistribution;
use mlstm_core::trackstore::Sample;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Seconds between consecutive predicted steps.
pub const STEP_SECONDS: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub mux: f64,
    pub muy: f64,
    pub sx: f64,
    pub sy: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub lateral: Option<String>,
    pub longitudinal: Option<String>,
    pub probability: f64,
    pub trajectory: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub vehicle_id: u32,
    pub frame: i64,
    pub origin: [f64; 2],
    pub modes: Vec<ModeRecord>,
}

impl PredictionRecord {
    pub fn new(sample: &Sample, dist: &ManeuverDistribution) -> Self {
        Self {
            vehicle_id: sample.vehicle_id,
            frame: sample.origin.frame,
            origin: [sample.origin.x, sample.origin.y],
            modes: dist
                .modes
                .iter()
                .map(|m| ModeRecord {
                    lateral: m.label.map(|l| l.lateral.name().to_string()),
                    longitudinal: m.label.map(|l| l.longitudinal.name().to_string()),
                    probability: m.probability,
                    trajectory: m
                        .trajectory
                        .iter()
                        .enumerate()
                        .map(|(k, g)| StepRecord {
                            t: STEP_SECONDS * (k + 1) as f64,
                            mux: g.mux,
                            muy: g.muy,
                            sx: g.sx,
                            sy: g.sy,
                            rho: g.rho,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn to_json(records: &[PredictionRecord]) -> String {
    serde_json::to_string_pretty(records).expect("serializable predictions")
}

pub fn from_json(text: &str) -> Result<Vec<PredictionRecord>> {
    serde_json::from_str(text).map_err(|e| CliError::Data(format!("prediction JSON: {e}")))
}

/// Rectangular mesh in the local frame: `x` lateral, `y` longitudinal,
/// spaced `res` meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub res: f64,
}

impl Grid {
    /// Parses `xmin,xmax,ymin,ymax,res`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("--grid expects xmin,xmax,ymin,ymax,res; got `{s}`")))?;
        let [xmin, xmax, ymin, ymax, res] = v[..] else {
            return Err(CliError::Usage(format!("--grid expects 5 numbers; got {}", v.len())));
        };
        if !(v.iter().all(|x| x.is_finite()) && res > 0.0 && xmax >= xmin && ymax >= ymin) {
            return Err(CliError::Usage("--grid needs xmin <= xmax, ymin <= ymax and res > 0".into()));
        }
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
            res,
        })
    }

    fn axis(lo: f64, hi: f64, res: f64) -> Vec<f64> {
        let n = ((hi - lo) / res + 1e-9).floor() as usize + 1;
        (0..n).map(|i| lo + res * i as f64).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.xmin, self.xmax, self.res)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.ymin, self.ymax, self.res)
    }
}

pub const GRID_HEADER: &str = "sample,vehicle_id,frame,t,x,y,density";

/// Appends the mixture density of every predicted step on the mesh.
pub fn append_grid(out: &mut String, index: usize, sample: &Sample, dist: &ManeuverDistribution, grid: &Grid) {
    let steps = dist.modes.iter().map(|m| m.trajectory.len()).max().unwrap_or(0);
    let (xs, ys) = (grid.xs(), grid.ys());
    for step in 0..steps {
        let t = STEP_SECONDS * (step + 1) as f64;
        for &y in &ys {
            for &x in &xs {
                let _ = writeln!(
                    out,
                    "{index},{},{},{t},{x},{y},{}",
                    sample.vehicle_id,
                    sample.origin.frame,
                    dist.density(step, [x, y])
                );
            }
        }
    }
}
