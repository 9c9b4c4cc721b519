use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{circular_scan, pixel_pvalues, storey_fdr, ScanConfig};
use crate::error::{Error, Result};
use crate::grid::{Field, Mask, ScaleLadder};
use crate::rng::{derive_seed, Domain};
use crate::stat::{mcd_statistic, ModelSpec};
use crate::threshold::{neighborhood_variability, select_and_detect, DEFAULT_THRESHOLD_COUNT};

use super::data::{simulate_grid, DataModel};
use super::metrics::{sensitivity_specificity, Metrics};
use super::roc::{roc_curve, RocPoint};
use super::shapes::ShapeKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Mcd {
        ladder: ScaleLadder,
        threshold_count: usize,
    },
    Fdr {
        alpha: f64,
        lambda: f64,
    },
    Scan {
        radii: Vec<usize>,
        mc_reps: usize,
        cluster_alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub label: String,
    #[serde(flatten)]
    pub method: Method,
}

impl MethodSpec {
    pub fn mcd(label: impl Into<String>, ladder: ScaleLadder) -> Self {
        MethodSpec {
            label: label.into(),
            method: Method::Mcd {
                ladder,
                threshold_count: DEFAULT_THRESHOLD_COUNT,
            },
        }
    }

    pub fn fdr(label: impl Into<String>, alpha: f64, lambda: f64) -> Self {
        MethodSpec {
            label: label.into(),
            method: Method::Fdr { alpha, lambda },
        }
    }

    pub fn scan(
        label: impl Into<String>,
        radii: Vec<usize>,
        mc_reps: usize,
        cluster_alpha: f64,
    ) -> Self {
        MethodSpec {
            label: label.into(),
            method: Method::Scan {
                radii,
                mc_reps,
                cluster_alpha,
            },
        }
    }

    /// Detection mask for one data set. A constant statistic field yields
    /// an empty detection rather than an error.
    fn detect(&self, grid: &crate::grid::Grid, model: &ModelSpec, scan_seed: u64) -> Result<Mask> {
        match &self.method {
            Method::Mcd {
                ladder,
                threshold_count,
            } => {
                let stat = mcd_statistic(grid, model, ladder)?;
                let var = neighborhood_variability(grid, model)?;
                match select_and_detect(&stat, &var, *threshold_count) {
                    Ok(d) => Ok(d.mask),
                    Err(Error::NoSignal(_)) => Ok(Mask::empty(grid.rows(), grid.cols())),
                    Err(e) => Err(e),
                }
            }
            Method::Fdr { alpha, lambda } => {
                let p = pixel_pvalues(grid, model, None)?;
                Ok(storey_fdr(&p, *alpha, *lambda)?.mask)
            }
            Method::Scan {
                radii,
                mc_reps,
                cluster_alpha,
            } => {
                let config = ScanConfig {
                    radii: radii.clone(),
                    mc_reps: *mc_reps,
                    cluster_alpha: *cluster_alpha,
                    seed: scan_seed,
                    ..ScanConfig::default()
                };
                Ok(circular_scan(grid, model, &config)?.mask)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rows: usize,
    pub cols: usize,
    pub model: DataModel,
    pub shape: ShapeKind,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<MethodSpec>,
    /// When set, each MCD method also reports an ROC curve with this many
    /// thresholds, computed on the first replicate.
    pub roc_points: Option<usize>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replicates < 2 {
            return Err(Error::config(format!(
                "need at least 2 replicates for a standard deviation, got {}",
                self.replicates
            )));
        }
        if self
            .model
            .alternative()
            .partial_cmp(&self.model.null_param())
            != Some(std::cmp::Ordering::Greater)
        {
            return Err(Error::config(format!(
                "alternative {} must exceed the null {}",
                self.model.alternative(),
                self.model.null_param()
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::config("no methods to evaluate"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::config(format!(
                    "duplicate method label '{}'",
                    m.label
                )));
            }
        }
        if let Some(k) = self.roc_points {
            if k < 2 {
                return Err(Error::config("an ROC curve needs at least 2 points"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub label: String,
    pub sensitivity_mean: f64,
    pub sensitivity_std: f64,
    pub specificity_mean: f64,
    pub specificity_std: f64,
    pub per_replicate: Vec<Metrics>,
    /// Fraction of replicates in which each cell was detected.
    #[serde(skip)]
    pub probability_map: Field<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roc: Option<Vec<RocPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub setting: String,
    pub alternative: f64,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

impl ExperimentSummary {
    pub fn method(&self, label: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.label == label)
    }
}

struct ReplicateOutcome {
    masks: Vec<Mask>,
    metrics: Vec<Metrics>,
    rocs: Vec<Option<Vec<RocPoint>>>,
}

fn run_replicate(config: &SimConfig, model: &ModelSpec, index: usize) -> Result<ReplicateOutcome> {
    let data = simulate_grid(
        &config.model,
        &config.shape,
        config.rows,
        config.cols,
        config.seed,
        index as u64,
    )?;
    let scan_seed = derive_seed(config.seed, Domain::ScanSeed, index as u64);
    let mut out = ReplicateOutcome {
        masks: Vec::with_capacity(config.methods.len()),
        metrics: Vec::with_capacity(config.methods.len()),
        rocs: Vec::with_capacity(config.methods.len()),
    };
    for spec in &config.methods {
        let mask = spec.detect(&data.grid, model, scan_seed)?;
        out.metrics
            .push(sensitivity_specificity(&mask, &data.truth)?);
        out.masks.push(mask);
        let roc = match (&spec.method, config.roc_points) {
            (Method::Mcd { ladder, .. }, Some(k)) if index == 0 => {
                let stat = mcd_statistic(&data.grid, model, ladder)?;
                Some(roc_curve(stat.values(), &data.truth, k)?)
            }
            _ => None,
        };
        out.rocs.push(roc);
    }
    Ok(out)
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let ss = values.map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Runs every configured method on `replicates` independent data sets.
///
/// Replicates run in parallel; each draws from its own generator stream,
/// so results are identical for any thread count.
pub fn run_experiment(config: &SimConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let model = config.model.model_spec(config.rows, config.cols)?;
    let outcomes: Vec<ReplicateOutcome> = (0..config.replicates)
        .into_par_iter()
        .map(|i| {
            run_replicate(config, &model, i).map_err(|e| Error::Replicate {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let reps = config.replicates as f64;
    let methods = config
        .methods
        .iter()
        .enumerate()
        .map(|(m, spec)| {
            let per_replicate: Vec<Metrics> = outcomes.iter().map(|o| o.metrics[m]).collect();
            let (sensitivity_mean, sensitivity_std) =
                mean_std(per_replicate.iter().map(|x| x.sensitivity));
            let (specificity_mean, specificity_std) =
                mean_std(per_replicate.iter().map(|x| x.specificity));
            let mut hits = vec![0usize; config.rows * config.cols];
            for o in &outcomes {
                for (h, &d) in hits.iter_mut().zip(o.masks[m].iter()) {
                    *h += d as usize;
                }
            }
            let probability_map = Field::new(
                config.rows,
                config.cols,
                hits.into_iter().map(|h| h as f64 / reps).collect(),
            )
            .expect("dimensions match");
            MethodSummary {
                label: spec.label.clone(),
                sensitivity_mean,
                sensitivity_std,
                specificity_mean,
                specificity_std,
                per_replicate,
                probability_map,
                roc: outcomes[0].rocs[m].clone(),
            }
        })
        .collect();
    Ok(ExperimentSummary {
        setting: config.shape.name(),
        alternative: config.model.alternative(),
        replicates: config.replicates,
        seed: config.seed,
        methods,
    })
}

/// [`run_experiment`] once per alternative value, same seed throughout.
pub fn run_sweep(config: &SimConfig, alternatives: &[f64]) -> Result<Vec<ExperimentSummary>> {
    alternatives
        .iter()
        .map(|&a| {
            let mut c = config.clone();
            c.model = c.model.with_alternative(a);
            run_experiment(&c)
        })
        .collect()
}
