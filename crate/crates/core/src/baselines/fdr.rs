use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Mask;

use super::PValueField;

pub const DEFAULT_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct FdrResult {
    pub mask: Mask,
    /// Rejection cutoff: every p-value `<= gamma` is rejected. 0 when nothing is.
    pub gamma: f64,
    pub pi0_hat: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub rejections: usize,
}

#[derive(Serialize)]
pub(crate) struct FdrSummary {
    pub gamma: f64,
    pub pi0_hat: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub rejections: usize,
    pub estimated_fdr: f64,
}

impl FdrResult {
    pub(crate) fn summary(&self) -> FdrSummary {
        let m = self.mask.len() as f64;
        FdrSummary {
            gamma: self.gamma,
            pi0_hat: self.pi0_hat,
            alpha: self.alpha,
            lambda: self.lambda,
            rejections: self.rejections,
            estimated_fdr: self.pi0_hat * self.gamma * m / self.rejections.max(1) as f64,
        }
    }
}

/// Storey's direct FDR rule over the rejection regions `[0, γ]`.
///
/// `π0 = #{p > λ} / ((1 - λ) m)`, floored at one count and capped at 1.
/// `γ` is the largest observed p-value whose plug-in FDR
/// `π0 γ m / #{p <= γ}` is at most `alpha`.
pub fn storey_fdr(pvals: &PValueField, alpha: f64, lambda: f64) -> Result<FdrResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!(
            "FDR level must lie in (0,1), got {alpha}"
        )));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::config(format!(
            "lambda must lie in (0,1), got {lambda}"
        )));
    }
    let values = pvals.values();
    let m = values.len();
    let above = values.iter().filter(|&&p| p > lambda).count();
    let pi0 = (above.max(1) as f64 / ((1.0 - lambda) * m as f64)).min(1.0);

    let mut sorted: Vec<f64> = values.as_slice().to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut gamma = None;
    let mut i = 0;
    while i < m {
        // advance to the last copy of this value so R counts ties
        let g = sorted[i];
        let mut j = i;
        while j + 1 < m && sorted[j + 1] == g {
            j += 1;
        }
        let rejected = (j + 1) as f64;
        if pi0 * g * m as f64 / rejected <= alpha {
            gamma = Some(g);
        }
        i = j + 1;
    }
    let (mask, gamma) = match gamma {
        Some(g) => (values.map(|&p| p <= g), g),
        None => (Mask::empty(values.rows(), values.cols()), 0.0),
    };
    Ok(FdrResult {
        rejections: mask.count_true(),
        mask,
        gamma,
        pi0_hat: pi0,
        alpha,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;

    fn pv(data: Vec<f64>) -> PValueField {
        let n = data.len();
        PValueField::new(Field::new(1, n, data).unwrap()).unwrap()
    }

    #[test]
    fn all_ones_rejects_nothing() {
        let r = storey_fdr(&pv(vec![1.0; 100]), 0.6, 0.5).unwrap();
        assert_eq!(r.pi0_hat, 1.0);
        assert_eq!(r.rejections, 0);
        assert_eq!(r.gamma, 0.0);
    }

    #[test]
    fn parameter_ranges() {
        let p = pv(vec![0.5; 4]);
        assert!(storey_fdr(&p, 0.0, 0.5).is_err());
        assert!(storey_fdr(&p, 0.5, 1.0).is_err());
    }

    #[test]
    fn ties_are_rejected_together() {
        let p = pv(vec![0.01, 0.01, 0.01, 0.9, 0.95, 0.99]);
        let r = storey_fdr(&p, 0.2, 0.5).unwrap();
        assert_eq!(r.rejections, 3);
        assert_eq!(r.gamma, 0.01);
    }
}
