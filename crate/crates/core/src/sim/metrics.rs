use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Mask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub sensitivity: f64,
    pub specificity: f64,
}

/// Sensitivity `|D ∩ S| / |S|` and specificity `|Dᶜ ∩ Sᶜ| / |Sᶜ|`.
pub fn sensitivity_specificity(detected: &Mask, truth: &Mask) -> Result<Metrics> {
    truth.check_shape(detected, "detection mask")?;
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&d, &t) in detected.iter().zip(truth.iter()) {
        if t {
            pos += 1;
            tp += d as usize;
        } else {
            neg += 1;
            tn += !d as usize;
        }
    }
    if pos == 0 {
        return Err(Error::UndefinedMetric(
            "sensitivity needs a non-empty signal region".into(),
        ));
    }
    if neg == 0 {
        return Err(Error::UndefinedMetric(
            "specificity needs a non-empty null region".into(),
        ));
    }
    Ok(Metrics {
        sensitivity: tp as f64 / pos as f64,
        specificity: tn as f64 / neg as f64,
    })
}

/// Intersection over union; 1 when both masks are empty.
pub fn jaccard(a: &Mask, b: &Mask) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b.iter()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;

    #[test]
    fn perfect_and_empty_detection() {
        let truth = Field::from_fn(4, 4, |r, _| r < 2);
        let m = sensitivity_specificity(&truth, &truth).unwrap();
        assert_eq!((m.sensitivity, m.specificity), (1.0, 1.0));
        let m = sensitivity_specificity(&Mask::empty(4, 4), &truth).unwrap();
        assert_eq!((m.sensitivity, m.specificity), (0.0, 1.0));
    }

    #[test]
    fn undefined_when_a_class_is_empty() {
        let all = Field::from_fn(3, 3, |_, _| true);
        assert!(matches!(
            sensitivity_specificity(&all, &Mask::empty(3, 3)),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(matches!(
            sensitivity_specificity(&all, &all),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn jaccard_values() {
        let a = Field::from_fn(2, 2, |r, _| r == 0);
        let b = Field::from_fn(2, 2, |_, c| c == 0);
        assert!((jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(jaccard(&Mask::empty(2, 2), &Mask::empty(2, 2)), 1.0);
    }
}
