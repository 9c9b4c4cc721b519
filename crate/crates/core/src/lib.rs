//! Multiscale change detection on two-dimensional grids.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod rng;
pub mod sim;
pub mod stat;
pub mod threshold;

pub use error::{Error, Result};
pub use grid::{Field, Grid, Mask, ScaleLadder, TrialsMap, WindowShape, WindowSpec};
pub use stat::{mcd_statistic, Family, ModelSpec, StatField};
pub use threshold::{
    neighborhood_variability, select_and_detect, DetectionResult, ThresholdScan, VarField,
};
