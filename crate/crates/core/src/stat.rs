//! Per-pixel multi-scale likelihood-ratio statistic `T(s) = -2 log Λ`.
//!
//! At every pixel the working alternative lets the parameter take its own
//! value on each annulus `D_r \ D_{r-1}`; the null fixes it at a robust
//! grid-wide estimate. Annulus estimates are clipped below by the null
//! estimate, so a pixel whose neighbourhood is no hotter than the background
//! scores exactly zero.
//!
//! Weights use increment cardinalities `Δm_r = m_r - m_{r-1}` and increment
//! trial totals `ΔN_r`, with `x_0 = m_0 = N_0 = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{aggregate_scales, Aggregation, Field, Grid, ScaleLadder, TrialsMap};

/// MAD-to-standard-deviation factor for Gaussian data.
pub const MAD_SCALE: f64 = 1.4826;

/// Offset added to every Poisson count when the continuity option is on.
pub const CONTINUITY_OFFSET: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Binomial,
    Poisson,
    Normal,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Binomial => "binomial",
            Family::Poisson => "poisson",
            Family::Normal => "normal",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binomial" => Ok(Family::Binomial),
            "poisson" => Ok(Family::Poisson),
            "normal" => Ok(Family::Normal),
            other => Err(Error::config(format!(
                "unknown model family '{other}' (expected binomial, poisson or normal)"
            ))),
        }
    }
}

/// Observation model: family plus the per-family nuisance inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    /// Required iff the family is Binomial.
    pub trials: Option<TrialsMap>,
    /// Known noise standard deviation (Normal only); estimated by MAD when absent.
    pub sigma: Option<f64>,
    /// Poisson only: add 0.5 to every count so an all-zero median is usable.
    pub continuity_offset: bool,
}

impl ModelSpec {
    pub fn binomial(trials: TrialsMap) -> Self {
        ModelSpec {
            family: Family::Binomial,
            trials: Some(trials),
            sigma: None,
            continuity_offset: false,
        }
    }

    pub fn poisson() -> Self {
        ModelSpec {
            family: Family::Poisson,
            trials: None,
            sigma: None,
            continuity_offset: false,
        }
    }

    pub fn normal(sigma: Option<f64>) -> Self {
        ModelSpec {
            family: Family::Normal,
            trials: None,
            sigma,
            continuity_offset: false,
        }
    }

    pub fn with_continuity_offset(mut self) -> Self {
        self.continuity_offset = true;
        self
    }

    /// Checks the model against `grid`: trials present exactly for
    /// Binomial, matching shapes, count data where counts are required.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match (self.family, &self.trials) {
            (Family::Binomial, None) => {
                return Err(Error::config("the Binomial model needs a trials map"));
            }
            (Family::Poisson | Family::Normal, Some(_)) => {
                return Err(Error::config(format!(
                    "the {} model takes no trials map",
                    self.family
                )));
            }
            _ => {}
        }
        if let Some(sigma) = self.sigma {
            if self.family != Family::Normal {
                return Err(Error::config("sigma only applies to the Normal model"));
            }
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::config(format!(
                    "sigma must be positive, got {sigma}"
                )));
            }
        }
        if self.continuity_offset && self.family != Family::Poisson {
            return Err(Error::config(
                "the continuity offset only applies to the Poisson model",
            ));
        }
        if let Some((i, _)) = grid.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (r, c) = grid.coords(i);
            return Err(Error::invalid(format!("cell ({r},{c}) is not finite")));
        }
        match self.family {
            Family::Binomial => {
                let trials = self.trials.as_ref().expect("checked above");
                grid.check_shape(trials.field(), "trials map")?;
                let counts = grid.to_counts()?;
                for (i, (&y, &n)) in counts.iter().zip(trials.field().iter()).enumerate() {
                    if y as u64 > n {
                        let (r, c) = grid.coords(i);
                        return Err(Error::invalid(format!(
                            "cell ({r},{c}) has {y} successes out of {n} trials"
                        )));
                    }
                }
            }
            Family::Poisson => {
                grid.to_counts()?;
            }
            Family::Normal => {}
        }
        Ok(())
    }
}

/// Median with the even-count midpoint convention. Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty set");
    let n = values.len();
    let mid = n / 2;
    let (_, &mut upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

pub fn median(values: &[f64]) -> f64 {
    median_in_place(&mut values.to_vec())
}

/// Wilson-style adjusted proportions `(Y + 1) / (N + 2)`.
pub fn adjusted_proportions(grid: &Grid, trials: &TrialsMap) -> Result<Field<f64>> {
    grid.check_shape(trials.field(), "trials map")?;
    let data = grid
        .iter()
        .zip(trials.field().iter())
        .map(|(&y, &n)| (y + 1.0) / (n as f64 + 2.0))
        .collect();
    Field::new(grid.rows(), grid.cols(), data)
}

/// `1.4826 * median(|Y - median(Y)|)` over the whole grid.
pub fn robust_sigma(grid: &Grid) -> f64 {
    let center = median(grid.as_slice());
    let mut dev: Vec<f64> = grid.iter().map(|v| (v - center).abs()).collect();
    MAD_SCALE * median_in_place(&mut dev)
}

fn effective_values(grid: &Grid, model: &ModelSpec) -> Result<Field<f64>> {
    Ok(match model.family {
        Family::Binomial => adjusted_proportions(grid, model.trials.as_ref().expect("validated"))?,
        Family::Poisson if model.continuity_offset => grid.map(|v| v + CONTINUITY_OFFSET),
        _ => grid.clone(),
    })
}

/// Grid-wide null estimate: the median of adjusted proportions (Binomial)
/// or of the raw values (Poisson, Normal).
pub fn estimate_null(grid: &Grid, model: &ModelSpec) -> Result<f64> {
    model.validate(grid)?;
    let values = effective_values(grid, model)?;
    Ok(median_in_place(&mut values.into_vec()))
}

/// Estimates for every pixel and scale, plus the null they were clipped against.
#[derive(Debug, Clone)]
pub struct EstimateSet {
    pub null_estimate: f64,
    scale_count: usize,
    scale_estimates: Vec<f64>,
    pub sigma_used: Option<f64>,
}

impl EstimateSet {
    pub fn scale_count(&self) -> usize {
        self.scale_count
    }

    /// `M` estimates at the pixel with row-major index `pixel`.
    pub fn at(&self, pixel: usize) -> &[f64] {
        &self.scale_estimates[pixel * self.scale_count..(pixel + 1) * self.scale_count]
    }
}

/// Precomputed inputs shared by every per-pixel evaluation.
struct Workspace<'a> {
    model: &'a ModelSpec,
    ladder: &'a ScaleLadder,
    values: Field<f64>,
    aggregation: Aggregation,
    rings: Vec<Vec<(isize, isize)>>,
    null: f64,
    sigma: Option<f64>,
}

impl<'a> Workspace<'a> {
    fn new(grid: &Grid, model: &'a ModelSpec, ladder: &'a ScaleLadder) -> Result<Self> {
        model.validate(grid)?;
        let values = effective_values(grid, model)?;
        let null = median(values.as_slice());
        let sigma = match model.family {
            Family::Normal => {
                let s = model.sigma.unwrap_or_else(|| robust_sigma(grid));
                if s.is_nan() || s <= 0.0 {
                    return Err(Error::degenerate(
                        "robust sigma estimate is 0 (constant grid?); supply sigma explicitly",
                    ));
                }
                Some(s)
            }
            _ => None,
        };
        if model.family == Family::Poisson && null <= 0.0 {
            return Err(Error::degenerate(
                "Poisson null rate estimate (median count) is 0; rerun with the +0.5 continuity offset",
            ));
        }
        let aggregation = match model.family {
            Family::Binomial => aggregate_scales(grid, ladder, model.trials.as_ref())?,
            _ => aggregate_scales(&values, ladder, None)?,
        };
        Ok(Workspace {
            model,
            ladder,
            values,
            aggregation,
            rings: ladder.annulus_offsets(),
            null,
            sigma,
        })
    }

    fn scale_estimates(
        &self,
        pixel: usize,
        out: &mut Vec<f64>,
        scratch: &mut Vec<f64>,
    ) -> Result<()> {
        out.clear();
        match self.model.family {
            Family::Binomial => {
                let (rows, cols) = self.values.shape();
                let (r, c) = self.values.coords(pixel);
                for ring in &self.rings {
                    scratch.clear();
                    for &(di, dj) in ring {
                        let (rr, cc) = (r as isize + di, c as isize + dj);
                        if rr >= 0 && cc >= 0 && (rr as usize) < rows && (cc as usize) < cols {
                            scratch.push(self.values[(rr as usize, cc as usize)]);
                        }
                    }
                    if scratch.is_empty() {
                        return Err(Error::internal(format!("empty annulus at pixel ({r},{c})")));
                    }
                    out.push(median_in_place(scratch).max(self.null));
                }
            }
            Family::Poisson | Family::Normal => {
                let x = self.aggregation.sums(pixel);
                let m = self.aggregation.counts(pixel);
                let (mut px, mut pm) = (0.0, 0u32);
                for k in 0..self.ladder.len() {
                    let dm = m[k] - pm;
                    if dm == 0 {
                        let (r, c) = self.values.coords(pixel);
                        return Err(Error::internal(format!("empty annulus at pixel ({r},{c})")));
                    }
                    out.push(((x[k] - px) / dm as f64).max(self.null));
                    px = x[k];
                    pm = m[k];
                }
            }
        }
        Ok(())
    }

    fn statistic(&self, pixel: usize, est: &[f64]) -> Result<f64> {
        let x = self.aggregation.sums(pixel);
        let null = self.null;
        let mut total = 0.0;
        let mut prev_x = 0.0;
        match self.model.family {
            Family::Binomial => {
                let trials = self
                    .aggregation
                    .trials(pixel)
                    .expect("binomial aggregation has trials");
                let (ln_p0, ln_q0) = (null.ln(), (1.0 - null).ln());
                let mut prev_n = 0.0;
                for (k, &p) in est.iter().enumerate() {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(Error::internal(format!(
                            "binomial estimate {p} outside (0,1)"
                        )));
                    }
                    let dx = x[k] - prev_x;
                    let dn = trials[k] - prev_n;
                    total += dx * (ln_p0 - p.ln()) + (dn - dx) * (ln_q0 - (1.0 - p).ln());
                    prev_x = x[k];
                    prev_n = trials[k];
                }
                Ok(-2.0 * total)
            }
            Family::Poisson => {
                let m = self.aggregation.counts(pixel);
                let ln_l0 = null.ln();
                let mut prev_m = 0u32;
                for (k, &lambda) in est.iter().enumerate() {
                    let dx = x[k] - prev_x;
                    let dm = (m[k] - prev_m) as f64;
                    total += dx * (ln_l0 - lambda.ln()) + dm * (lambda - null);
                    prev_x = x[k];
                    prev_m = m[k];
                }
                Ok(-2.0 * total)
            }
            Family::Normal => {
                let m = self.aggregation.counts(pixel);
                let sigma2 = self.sigma.expect("normal model has sigma").powi(2);
                let mut prev_m = 0u32;
                for (k, &mu) in est.iter().enumerate() {
                    let dx = x[k] - prev_x;
                    let dm = (m[k] - prev_m) as f64;
                    total += 2.0 * dx * (mu - null) + dm * (null * null - mu * mu);
                    prev_x = x[k];
                    prev_m = m[k];
                }
                Ok(total / sigma2)
            }
        }
    }

    fn all_estimates(&self) -> Result<EstimateSet> {
        let m = self.ladder.len();
        let n = self.values.len();
        let chunks: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map_init(
                || (Vec::with_capacity(m), Vec::new()),
                |(out, scratch), pixel| {
                    self.scale_estimates(pixel, out, scratch)?;
                    Ok(out.clone())
                },
            )
            .collect::<Result<_>>()?;
        Ok(EstimateSet {
            null_estimate: self.null,
            scale_count: m,
            scale_estimates: chunks.into_iter().flatten().collect(),
            sigma_used: self.sigma,
        })
    }

    fn field(&self) -> Result<Field<f64>> {
        let m = self.ladder.len();
        let n = self.values.len();
        let data: Vec<f64> = (0..n)
            .into_par_iter()
            .map_init(
                || (Vec::with_capacity(m), Vec::new()),
                |(est, scratch), pixel| {
                    self.scale_estimates(pixel, est, scratch)?;
                    self.statistic(pixel, est)
                },
            )
            .collect::<Result<_>>()?;
        Field::new(self.values.rows(), self.values.cols(), data)
    }
}

/// Annulus estimates at one pixel, clipped below by `null_estimate`.
pub fn estimate_scales(
    grid: &Grid,
    model: &ModelSpec,
    ladder: &ScaleLadder,
    null_estimate: f64,
    pixel: (usize, usize),
) -> Result<Vec<f64>> {
    if pixel.0 >= grid.rows() || pixel.1 >= grid.cols() {
        return Err(Error::invalid(format!("pixel {pixel:?} outside the grid")));
    }
    let mut ws = Workspace::new(grid, model, ladder)?;
    ws.null = null_estimate;
    let mut out = Vec::new();
    ws.scale_estimates(grid.index_of(pixel.0, pixel.1), &mut out, &mut Vec::new())?;
    Ok(out)
}

/// Estimates at every pixel; useful for diagnostics and oracles.
pub fn estimate_all(grid: &Grid, model: &ModelSpec, ladder: &ScaleLadder) -> Result<EstimateSet> {
    Workspace::new(grid, model, ladder)?.all_estimates()
}

/// The MCD statistic field together with the inputs that produced it.
#[derive(Debug, Clone)]
pub struct StatField {
    values: Field<f64>,
    family: Family,
    ladder: ScaleLadder,
    null_estimate: f64,
    sigma_used: Option<f64>,
}

impl StatField {
    pub fn values(&self) -> &Field<f64> {
        &self.values
    }

    pub fn into_values(self) -> Field<f64> {
        self.values
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn ladder(&self) -> &ScaleLadder {
        &self.ladder
    }

    pub fn null_estimate(&self) -> f64 {
        self.null_estimate
    }

    pub fn sigma_used(&self) -> Option<f64> {
        self.sigma_used
    }

    /// Degrees of freedom of the nominal chi-square reference law. Recorded
    /// for reporting only; thresholds never use it.
    pub fn reference_df(&self) -> usize {
        self.ladder.len()
    }

    /// Wraps an arbitrary score field, e.g. for ROC comparisons.
    pub fn from_parts(
        values: Field<f64>,
        family: Family,
        ladder: ScaleLadder,
        null_estimate: f64,
    ) -> Self {
        StatField {
            values,
            family,
            ladder,
            null_estimate,
            sigma_used: None,
        }
    }
}

/// Computes `T(s)` for any model family.
pub fn mcd_statistic(grid: &Grid, model: &ModelSpec, ladder: &ScaleLadder) -> Result<StatField> {
    let ws = Workspace::new(grid, model, ladder)?;
    let values = ws.field()?;
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        let (r, c) = values.coords(i);
        return Err(Error::internal(format!(
            "non-finite statistic at ({r},{c})"
        )));
    }
    Ok(StatField {
        values,
        family: model.family,
        ladder: ladder.clone(),
        null_estimate: ws.null,
        sigma_used: ws.sigma,
    })
}

pub fn stat_binomial(grid: &Grid, trials: &TrialsMap, ladder: &ScaleLadder) -> Result<StatField> {
    mcd_statistic(grid, &ModelSpec::binomial(trials.clone()), ladder)
}

pub fn stat_poisson(grid: &Grid, ladder: &ScaleLadder) -> Result<StatField> {
    mcd_statistic(grid, &ModelSpec::poisson(), ladder)
}

pub fn stat_normal(grid: &Grid, ladder: &ScaleLadder, sigma: Option<f64>) -> Result<StatField> {
    mcd_statistic(grid, &ModelSpec::normal(sigma), ladder)
}
