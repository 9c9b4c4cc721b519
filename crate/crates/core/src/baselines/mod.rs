//! Comparison methods: single-scale per-pixel testing with Storey's direct
//! FDR control, and a circular spatial scan statistic.

mod fdr;
mod pvalues;
mod scan;

pub use fdr::{storey_fdr, FdrResult, DEFAULT_LAMBDA};
pub use pvalues::{
    binomial_upper_tail, normal_upper_tail, pixel_pvalues, pixel_pvalues_with, poisson_upper_tail,
    PValueField, TailMethod,
};
pub use scan::{circular_scan, Cluster, ScanConfig, ScanResult};
