use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub false_positive_rate: f64,
    pub true_positive_rate: f64,
}

fn class_sizes(scores: &Field<f64>, truth: &Mask) -> Result<(usize, usize)> {
    scores.check_shape(truth, "truth mask")?;
    let pos = truth.count_true();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(
            "ROC needs both signal and null cells".into(),
        ));
    }
    Ok((pos, neg))
}

/// ROC of the rule `score >= t` for `points` thresholds evenly spaced from
/// the maximum score down to the minimum, preceded by the origin.
pub fn roc_curve(scores: &Field<f64>, truth: &Mask, points: usize) -> Result<Vec<RocPoint>> {
    if points < 2 {
        return Err(Error::config("an ROC curve needs at least 2 points"));
    }
    let (pos, neg) = class_sizes(scores, truth)?;
    let (lo, hi) = scores.min_max();
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(truth.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut curve = vec![RocPoint {
        threshold: f64::INFINITY,
        false_positive_rate: 0.0,
        true_positive_rate: 0.0,
    }];
    let (mut tp, mut fp, mut next) = (0usize, 0usize, 0usize);
    for k in 0..points {
        let t = if k + 1 == points {
            lo
        } else {
            hi - (hi - lo) * k as f64 / (points - 1) as f64
        };
        while next < pairs.len() && pairs[next].0 >= t {
            if pairs[next].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            next += 1;
        }
        curve.push(RocPoint {
            threshold: t,
            false_positive_rate: fp as f64 / neg as f64,
            true_positive_rate: tp as f64 / pos as f64,
        });
    }
    Ok(curve)
}

/// Trapezoidal area under a curve from [`roc_curve`].
pub fn roc_auc(curve: &[RocPoint]) -> f64 {
    curve
        .windows(2)
        .map(|w| {
            (w[1].false_positive_rate - w[0].false_positive_rate)
                * (w[1].true_positive_rate + w[0].true_positive_rate)
                / 2.0
        })
        .sum()
}

/// Exact AUC: the probability that a random signal cell outscores a random
/// null cell, ties counting one half.
pub fn auc(scores: &Field<f64>, truth: &Mask) -> Result<f64> {
    let (pos, neg) = class_sizes(scores, truth)?;
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(truth.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // sum of midranks of the signal cells
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j + 1 < pairs.len() && pairs[j + 1].0 == pairs[i].0 {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += midrank * pairs[i..=j].iter().filter(|p| p.1).count() as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}
