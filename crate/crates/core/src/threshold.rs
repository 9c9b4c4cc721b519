//! Variability-guided threshold choice.
//!
//! `V(s)` is the sample variance of a pixel and its in-grid 4-neighbours.
//! The statistic range is cut into `K - 1` belts by an arithmetic ladder of
//! thresholds; the belt with the largest mean variability is taken to sit
//! on the cluster boundary and the detection threshold is its midpoint.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Mask};
use crate::stat::{adjusted_proportions, Family, ModelSpec, StatField};

pub const DEFAULT_THRESHOLD_COUNT: usize = 100;

/// Neighbourhood variability field.
#[derive(Debug, Clone, PartialEq)]
pub struct VarField {
    values: Field<f64>,
}

impl VarField {
    pub fn values(&self) -> &Field<f64> {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Sample variance (denominator `n - 1`) of an arbitrary field over each
/// pixel's clipped 5-point cross.
pub fn cross_variance(values: &Field<f64>) -> Result<VarField> {
    let (rows, cols) = values.shape();
    if rows < 2 || cols < 2 {
        return Err(Error::invalid(format!(
            "neighbourhood variability needs at least a 2x2 grid, got {rows}x{cols}"
        )));
    }
    let data: Vec<f64> = (0..values.len())
        .into_par_iter()
        .map(|i| {
            let (r, c) = values.coords(i);
            let mut buf = [0.0f64; 5];
            buf[0] = values[i];
            let mut n = 1;
            for (rr, cc) in values.neighbours4(r, c) {
                buf[n] = values[(rr, cc)];
                n += 1;
            }
            let cells = &buf[..n];
            let mean = cells.iter().sum::<f64>() / n as f64;
            let ss: f64 = cells.iter().map(|v| (v - mean) * (v - mean)).sum();
            ss / (n - 1) as f64
        })
        .collect();
    Ok(VarField {
        values: Field::new(rows, cols, data)?,
    })
}

/// `V(s)` on the model's natural scale: adjusted proportions for Binomial
/// data, raw values otherwise.
pub fn neighborhood_variability(grid: &Grid, model: &ModelSpec) -> Result<VarField> {
    match model.family {
        Family::Binomial => {
            let trials = model
                .trials
                .as_ref()
                .ok_or_else(|| Error::config("the Binomial model needs a trials map"))?;
            cross_variance(&adjusted_proportions(grid, trials)?)
        }
        Family::Poisson | Family::Normal => cross_variance(grid),
    }
}

/// Result of scanning the threshold ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdScan {
    /// `t_1..t_K`, arithmetic from `min T` to `max T`.
    pub thresholds: Vec<f64>,
    /// Mean `V` over each belt `{t_k < T <= t_{k+1}}`; `None` for empty belts.
    pub belt_means: Vec<Option<f64>>,
    pub belt_counts: Vec<usize>,
    /// Zero-based index of the chosen belt.
    pub chosen: usize,
    pub t_star: f64,
    /// Mean of `V` over the whole grid.
    pub global_mean_variability: f64,
    /// Chosen belt mean divided by the global mean; near 1 suggests no boundary.
    pub peak_ratio: f64,
}

impl ThresholdScan {
    pub fn threshold_count(&self) -> usize {
        self.thresholds.len()
    }
}

/// Zero-based belt index `b` with `t[b] < value <= t[b+1]`, or `None` when
/// `value <= t[0]`.
fn belt_index(thresholds: &[f64], value: f64) -> Option<usize> {
    let k = thresholds.len();
    if value <= thresholds[0] {
        return None;
    }
    let (lo, hi) = (thresholds[0], thresholds[k - 1]);
    let guess = ((value - lo) / (hi - lo) * (k - 1) as f64).ceil() as isize - 1;
    let mut b = guess.clamp(0, k as isize - 2) as usize;
    while b > 0 && value <= thresholds[b] {
        b -= 1;
    }
    while b < k - 2 && value > thresholds[b + 1] {
        b += 1;
    }
    Some(b)
}

/// Scans `threshold_count` arithmetic thresholds and picks the belt with the
/// highest mean variability. Ties go to the lowest belt; empty belts never win.
pub fn scan_thresholds(
    stat: &StatField,
    var: &VarField,
    threshold_count: usize,
) -> Result<ThresholdScan> {
    scan_threshold_values(stat.values(), var, threshold_count)
}

pub fn scan_threshold_values(
    stat: &Field<f64>,
    var: &VarField,
    threshold_count: usize,
) -> Result<ThresholdScan> {
    if threshold_count < 3 {
        return Err(Error::config(format!(
            "threshold count must be at least 3, got {threshold_count}"
        )));
    }
    stat.check_shape(var.values(), "variability field")?;
    let (lo, hi) = stat.min_max();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("statistic field has non-finite values"));
    }
    if hi <= lo {
        return Err(Error::NoSignal(format!(
            "statistic field is constant ({lo})"
        )));
    }
    let k = threshold_count;
    let step = (hi - lo) / (k - 1) as f64;
    let mut thresholds: Vec<f64> = (0..k).map(|i| lo + i as f64 * step).collect();
    thresholds[k - 1] = hi;

    let mut sums = vec![0.0f64; k - 1];
    let mut counts = vec![0usize; k - 1];
    for (&t, &v) in stat.iter().zip(var.values().iter()) {
        if let Some(b) = belt_index(&thresholds, t) {
            sums[b] += v;
            counts[b] += 1;
        }
    }
    let belt_means: Vec<Option<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &n)| (n > 0).then(|| s / n as f64))
        .collect();

    let mut chosen = None;
    let mut best = f64::NEG_INFINITY;
    for (b, mean) in belt_means.iter().enumerate() {
        if let Some(m) = *mean {
            if m > best {
                best = m;
                chosen = Some(b);
            }
        }
    }
    let chosen = chosen.ok_or_else(|| Error::internal("no non-empty belt above the minimum"))?;
    let global = var.mean();
    Ok(ThresholdScan {
        t_star: 0.5 * (thresholds[chosen] + thresholds[chosen + 1]),
        thresholds,
        belt_means,
        belt_counts: counts,
        chosen,
        global_mean_variability: global,
        peak_ratio: if global > 0.0 {
            best / global
        } else {
            f64::INFINITY
        },
    })
}

/// Final detection: the mask `{T > t_star}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub mask: Mask,
    pub t_star: f64,
    pub scan: Option<ThresholdScan>,
}

pub fn detect(stat: &StatField, t_star: f64) -> Result<DetectionResult> {
    detect_values(stat.values(), t_star)
}

pub fn detect_values(stat: &Field<f64>, t_star: f64) -> Result<DetectionResult> {
    if !t_star.is_finite() {
        return Err(Error::invalid(format!(
            "threshold must be finite, got {t_star}"
        )));
    }
    Ok(DetectionResult {
        mask: stat.map(|&t| t > t_star),
        t_star,
        scan: None,
    })
}

/// Threshold scan followed by detection at the chosen threshold.
pub fn select_and_detect(
    stat: &StatField,
    var: &VarField,
    threshold_count: usize,
) -> Result<DetectionResult> {
    let scan = scan_thresholds(stat, var, threshold_count)?;
    let mut result = detect(stat, scan.t_star)?;
    result.scan = Some(scan);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScaleLadder;

    fn field(rows: usize, cols: usize, data: &[f64]) -> Field<f64> {
        Field::new(rows, cols, data.to_vec()).unwrap()
    }

    fn stat(values: Field<f64>) -> StatField {
        StatField::from_parts(values, Family::Normal, ScaleLadder::two_scale(), 0.0)
    }

    #[test]
    fn constant_grid_has_zero_variability() {
        let v = cross_variance(&Field::from_fn(5, 5, |_, _| 3.0)).unwrap();
        assert!(v.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn interior_cross_variance() {
        let mut g = Field::from_fn(3, 3, |_, _| 0.0).into_vec();
        g[4] = 4.0;
        let v = cross_variance(&field(3, 3, &g)).unwrap();
        assert!((v.values()[(1, 1)] - 3.2).abs() < 1e-12);
    }

    #[test]
    fn corner_uses_three_cells() {
        // corner (0,0)=1 with neighbours (0,1)=2 and (1,0)=3
        let g = field(2, 2, &[1.0, 2.0, 3.0, 9.0]);
        let v = cross_variance(&g).unwrap();
        assert!((v.values()[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(cross_variance(&field(1, 3, &[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn constant_statistic_is_no_signal() {
        let s = stat(Field::from_fn(4, 4, |_, _| 0.0));
        let v = cross_variance(&Field::from_fn(4, 4, |r, _| r as f64)).unwrap();
        assert!(matches!(
            scan_thresholds(&s, &v, 10),
            Err(Error::NoSignal(_))
        ));
    }

    #[test]
    fn threshold_count_lower_bound() {
        let s = stat(Field::from_fn(4, 4, |r, _| r as f64));
        let v = cross_variance(&Field::from_fn(4, 4, |r, _| r as f64)).unwrap();
        assert!(matches!(scan_thresholds(&s, &v, 2), Err(Error::Config(_))));
    }

    #[test]
    fn equal_belt_means_pick_the_lowest_belt() {
        // five distinct statistic levels, one per belt with K = 5; V constant
        let s = stat(field(1, 5, &[0.0, 1.0, 2.0, 3.0, 4.0]));
        let v = VarField {
            values: Field::from_fn(1, 5, |_, _| 1.0),
        };
        let scan = scan_thresholds(&s, &v, 5).unwrap();
        assert_eq!(scan.belt_counts, vec![1, 1, 1, 1]);
        assert_eq!(scan.chosen, 0);
        assert_eq!(scan.t_star, 0.5);
    }

    #[test]
    fn empty_belts_are_skipped() {
        let s = stat(field(1, 4, &[0.0, 0.0, 10.0, 10.0]));
        let v = VarField {
            values: field(1, 4, &[5.0, 5.0, 1.0, 1.0]),
        };
        let scan = scan_thresholds(&s, &v, 6).unwrap();
        assert_eq!(scan.belt_counts, vec![0, 0, 0, 0, 2]);
        assert_eq!(scan.belt_means[0], None);
        assert_eq!(scan.chosen, 4);
    }

    #[test]
    fn detection_is_strict() {
        let s = stat(field(1, 4, &[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(detect(&s, 4.0).unwrap().mask.count_true(), 0);
        assert_eq!(detect(&s, 0.5).unwrap().mask.count_true(), 4);
        assert_eq!(detect(&s, 2.0).unwrap().mask.count_true(), 2);
        assert!(detect(&s, f64::NAN).is_err());
    }

    #[test]
    fn belt_index_respects_boundaries() {
        let t = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(belt_index(&t, 0.0), None);
        assert_eq!(belt_index(&t, 1.0), Some(0));
        assert_eq!(belt_index(&t, 1.0 + 1e-12), Some(1));
        assert_eq!(belt_index(&t, 3.0), Some(2));
    }
}
