use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Mask, TrialsMap};
use crate::rng::{stream, Domain};
use crate::stat::{Family, ModelSpec};

use super::shapes::{gen_shape, ShapeKind};

/// Generating distribution: null parameter outside the signal region,
/// alternative inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DataModel {
    Binomial { trials: u64, p0: f64, p1: f64 },
    Poisson { lambda0: f64, lambda1: f64 },
    Normal { mu0: f64, mu1: f64, sigma: f64 },
}

impl DataModel {
    pub fn family(&self) -> Family {
        match self {
            DataModel::Binomial { .. } => Family::Binomial,
            DataModel::Poisson { .. } => Family::Poisson,
            DataModel::Normal { .. } => Family::Normal,
        }
    }

    pub fn null_param(&self) -> f64 {
        match *self {
            DataModel::Binomial { p0, .. } => p0,
            DataModel::Poisson { lambda0, .. } => lambda0,
            DataModel::Normal { mu0, .. } => mu0,
        }
    }

    pub fn alternative(&self) -> f64 {
        match *self {
            DataModel::Binomial { p1, .. } => p1,
            DataModel::Poisson { lambda1, .. } => lambda1,
            DataModel::Normal { mu1, .. } => mu1,
        }
    }

    /// Same model with the alternative parameter replaced.
    pub fn with_alternative(&self, value: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            DataModel::Binomial { p1, .. } => *p1 = value,
            DataModel::Poisson { lambda1, .. } => *lambda1 = value,
            DataModel::Normal { mu1, .. } => *mu1 = value,
        }
        out
    }

    /// Range checks on the parameters; equal null and alternative is allowed.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DataModel::Binomial { trials, p0, p1 } => {
                if trials == 0 {
                    return Err(Error::config("trials per cell must be positive"));
                }
                for (name, p) in [("p0", p0), ("p1", p1)] {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::config(format!("{name} must lie in [0,1], got {p}")));
                    }
                }
            }
            DataModel::Poisson { lambda0, lambda1 } => {
                for (name, l) in [("lambda0", lambda0), ("lambda1", lambda1)] {
                    if !(l >= 0.0 && l.is_finite()) {
                        return Err(Error::config(format!(
                            "{name} must be a non-negative rate, got {l}"
                        )));
                    }
                }
            }
            DataModel::Normal { mu0, mu1, sigma } => {
                if !(mu0.is_finite() && mu1.is_finite()) {
                    return Err(Error::config("means must be finite"));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::config(format!(
                        "sigma must be positive, got {sigma}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Observation model used to analyse data from this generator. The
    /// trial count and Normal sigma are treated as known.
    pub fn model_spec(&self, rows: usize, cols: usize) -> Result<ModelSpec> {
        Ok(match *self {
            DataModel::Binomial { trials, .. } => {
                ModelSpec::binomial(TrialsMap::uniform(rows, cols, trials)?)
            }
            DataModel::Poisson { .. } => ModelSpec::poisson(),
            DataModel::Normal { sigma, .. } => ModelSpec::normal(Some(sigma)),
        })
    }
}

/// One synthetic data set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedGrid {
    pub grid: Grid,
    pub truth: Mask,
    pub trials: Option<TrialsMap>,
}

/// Draws replicate `index` of `model` over `shape` on a `rows x cols` grid.
pub fn simulate_grid(
    model: &DataModel,
    shape: &ShapeKind,
    rows: usize,
    cols: usize,
    seed: u64,
    index: u64,
) -> Result<SimulatedGrid> {
    model.validate()?;
    let truth = gen_shape(shape, rows, cols)?;
    let mut rng = stream(seed, Domain::Simulation, index);
    let grid = draw(model, &truth, &mut rng)?;
    let trials = match *model {
        DataModel::Binomial { trials, .. } => Some(TrialsMap::uniform(rows, cols, trials)?),
        _ => None,
    };
    Ok(SimulatedGrid {
        grid,
        truth,
        trials,
    })
}

pub(crate) fn draw<R: Rng>(model: &DataModel, truth: &Mask, rng: &mut R) -> Result<Grid> {
    let sampler_err = |e: &dyn std::fmt::Display| Error::internal(format!("sampler: {e}"));
    let data: Vec<f64> = match *model {
        DataModel::Binomial { trials, p0, p1 } => {
            let d0 = Binomial::new(trials, p0).map_err(|e| sampler_err(&e))?;
            let d1 = Binomial::new(trials, p1).map_err(|e| sampler_err(&e))?;
            truth
                .iter()
                .map(|&s| if s { d1.sample(rng) } else { d0.sample(rng) } as f64)
                .collect()
        }
        DataModel::Poisson { lambda0, lambda1 } => {
            let d = |l: f64| -> Result<Option<Poisson<f64>>> {
                if l == 0.0 {
                    Ok(None)
                } else {
                    Poisson::new(l).map(Some).map_err(|e| sampler_err(&e))
                }
            };
            let (d0, d1) = (d(lambda0)?, d(lambda1)?);
            truth
                .iter()
                .map(|&s| match if s { &d1 } else { &d0 } {
                    Some(d) => d.sample(rng),
                    None => 0.0,
                })
                .collect()
        }
        DataModel::Normal { mu0, mu1, sigma } => {
            let noise = Normal::new(0.0, sigma).map_err(|e| sampler_err(&e))?;
            truth
                .iter()
                .map(|&s| if s { mu1 } else { mu0 } + noise.sample(rng))
                .collect()
        }
    };
    Field::new(truth.rows(), truth.cols(), data)
}
