//! Maneuver-conditioned LSTM trajectory prediction for freeway vehicles.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic
//! piece of the pipeline:
//!
//! - [`trackstore`]: per-vehicle tracks, the prediction-time local frame,
//!   neighbor slots and sample construction.
//! - [`maneuvers`]: lateral / longitudinal maneuver labels.
//! - [`nnkernel`]: a small vector-level reverse-mode differentiation tape,
//!   LSTM cells, Adam and finite-difference gradient checking.
//! - [`model`]: encoder-decoder with bivariate Gaussian heads, maneuver
//!   classifier, mixture assembly and training loops.
//! - [`baseline`]: constant-velocity Kalman filter.
//! - [`synth`]: scripted synthetic freeway scenes with known maneuvers.
//! - [`eval`]: RMSE by horizon, maneuver accuracy, ablation runner.
//!
//! File formats, text parsing and the command line live in the `mlstm`
//! companion crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod baseline;
pub mod benchmark;
pub mod eval;
pub mod exec;
pub mod maneuvers;
pub mod model;
pub mod nnkernel;
pub mod synth;
pub mod trackstore;

pub use maneuvers::{Lateral, Longitudinal, ManeuverLabel};
pub use model::{GaussianStep, ManeuverDistribution, ModelConfig, Variant};
pub use trackstore::{Sample, TrackStore, VehicleTrack};
