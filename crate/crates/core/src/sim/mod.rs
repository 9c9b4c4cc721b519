//! Simulation harness: synthetic data, accuracy metrics, replicated
//! experiments, ROC curves and the boundary/variability checks.

mod data;
mod experiment;
mod metrics;
mod roc;
mod shapes;
mod theorems;

pub use data::{simulate_grid, DataModel, SimulatedGrid};
pub use experiment::{
    run_experiment, run_sweep, ExperimentSummary, Method, MethodSpec, MethodSummary, SimConfig,
};
pub use metrics::{jaccard, sensitivity_specificity, Metrics};
pub use roc::{auc, roc_auc, roc_curve, RocPoint};
pub use shapes::{gen_shape, ShapeKind};
pub use theorems::{
    boundary_cell_check, partition, theorem1_check, theorem2_check, BoundaryCellCheck, ClassMeans,
    Partition, PixelClass, TheoremReport, TheoremSetting, VariabilityContrast,
};
