use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::stat::{estimate_null, robust_sigma, Family, ModelSpec};

/// One-sided (upper-tail) p-values, one per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueField {
    values: Field<f64>,
}

impl PValueField {
    pub fn new(values: Field<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|p| !(0.0..=1.0).contains(p)) {
            let (r, c) = values.coords(i);
            return Err(Error::invalid(format!(
                "p-value at ({r},{c}) is {} (outside [0,1])",
                values[i]
            )));
        }
        Ok(PValueField { values })
    }

    pub fn values(&self) -> &Field<f64> {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMethod {
    #[default]
    Exact,
    /// Gaussian approximation without continuity correction.
    NormalApprox,
}

/// `P(X >= y)` for `X ~ Bin(n, p)`.
pub fn binomial_upper_tail(y: u64, n: u64, p: f64) -> f64 {
    if y == 0 {
        1.0
    } else if y > n {
        0.0
    } else {
        // P(X >= y) = I_p(y, n - y + 1)
        beta_reg(y as f64, (n - y + 1) as f64, p).clamp(0.0, 1.0)
    }
}

/// `P(X >= y)` for `X ~ Poisson(lambda)`.
pub fn poisson_upper_tail(y: u64, lambda: f64) -> f64 {
    if y == 0 {
        1.0
    } else {
        // P(X >= y) = P(y, lambda), the regularized lower incomplete gamma
        gamma_lr(y as f64, lambda).clamp(0.0, 1.0)
    }
}

/// `1 - Φ(z)`.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

pub fn pixel_pvalues(
    grid: &Grid,
    model: &ModelSpec,
    null_param: Option<f64>,
) -> Result<PValueField> {
    pixel_pvalues_with(grid, model, null_param, TailMethod::Exact)
}

/// Per-pixel upper-tail p-values against the null parameter (estimated by
/// the grid-wide median rule when `null_param` is `None`).
pub fn pixel_pvalues_with(
    grid: &Grid,
    model: &ModelSpec,
    null_param: Option<f64>,
    method: TailMethod,
) -> Result<PValueField> {
    model.validate(grid)?;
    let null = match null_param {
        Some(p) => p,
        None => estimate_null(grid, model)?,
    };
    let values = match model.family {
        Family::Binomial => {
            if !(null > 0.0 && null < 1.0) {
                return Err(Error::config(format!(
                    "binomial null probability {null} outside (0,1)"
                )));
            }
            let trials = model.trials.as_ref().expect("validated");
            let counts = grid.to_counts()?;
            let data = counts
                .iter()
                .zip(trials.field().iter())
                .map(|(&y, &n)| match method {
                    TailMethod::Exact => binomial_upper_tail(y as u64, n, null),
                    TailMethod::NormalApprox => {
                        let nf = n as f64;
                        normal_upper_tail(
                            (y as f64 - nf * null) / (nf * null * (1.0 - null)).sqrt(),
                        )
                    }
                })
                .collect();
            Field::new(grid.rows(), grid.cols(), data)?
        }
        Family::Poisson => {
            if !(null > 0.0 && null.is_finite()) {
                return Err(Error::config(format!(
                    "Poisson null rate {null} must be positive"
                )));
            }
            let counts = grid.to_counts()?;
            counts.map(|&y| match method {
                TailMethod::Exact => poisson_upper_tail(y as u64, null),
                TailMethod::NormalApprox => normal_upper_tail((y as f64 - null) / null.sqrt()),
            })
        }
        Family::Normal => {
            if !null.is_finite() {
                return Err(Error::config(format!(
                    "Normal null mean {null} must be finite"
                )));
            }
            let sigma = model.sigma.unwrap_or_else(|| robust_sigma(grid));
            if sigma.is_nan() || sigma <= 0.0 {
                return Err(Error::degenerate(
                    "robust sigma estimate is 0; supply sigma explicitly",
                ));
            }
            grid.map(|&y| normal_upper_tail((y - null) / sigma))
        }
    };
    PValueField::new(values)
}
