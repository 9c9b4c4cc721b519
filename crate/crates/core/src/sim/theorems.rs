//! Empirical checks of two properties of the Normal-model statistic:
//! boundary pixels score between noise and signal pixels on average, and
//! the local variability is larger at the boundary than elsewhere.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Mask, ScaleLadder, WindowSpec};
use crate::rng::{stream, Domain};
use crate::stat::{mcd_statistic, ModelSpec};
use crate::threshold::cross_variance;

use super::data::{draw, DataModel};
use super::shapes::{gen_shape, ShapeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum PixelClass {
    Noise,
    /// Some in-grid cell of the 5-point cross belongs to the other group.
    Boundary {
        /// Signal cells in the cross.
        signal_count: u8,
        /// In-grid cells in the cross (5 away from the edges).
        cross_size: u8,
    },
    Signal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub classes: Field<PixelClass>,
    pub noise: usize,
    pub boundary: usize,
    pub signal: usize,
}

impl Partition {
    pub fn boundary_mask(&self) -> Mask {
        self.classes
            .map(|c| matches!(c, PixelClass::Boundary { .. }))
    }
}

pub fn partition(truth: &Mask) -> Partition {
    let classes = Field::from_fn(truth.rows(), truth.cols(), |r, c| {
        let own = truth[(r, c)];
        let mut size = 1u8;
        let mut signal = own as u8;
        let mut mixed = false;
        for (nr, nc) in truth.neighbours4(r, c) {
            size += 1;
            signal += truth[(nr, nc)] as u8;
            mixed |= truth[(nr, nc)] != own;
        }
        match (mixed, own) {
            (true, _) => PixelClass::Boundary {
                signal_count: signal,
                cross_size: size,
            },
            (false, true) => PixelClass::Signal,
            (false, false) => PixelClass::Noise,
        }
    });
    let count = |f: fn(&PixelClass) -> bool| classes.iter().filter(|c| f(c)).count();
    Partition {
        noise: count(|c| *c == PixelClass::Noise),
        boundary: count(|c| matches!(c, PixelClass::Boundary { .. })),
        signal: count(|c| *c == PixelClass::Signal),
        classes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSetting {
    pub rows: usize,
    pub cols: usize,
    pub shape: ShapeKind,
    /// Mean shift inside the signal region; noise has unit variance.
    pub delta: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl TheoremSetting {
    pub fn new(delta: f64) -> Self {
        TheoremSetting {
            rows: 100,
            cols: 100,
            shape: ShapeKind::disc(20.0),
            delta,
            replicates: 50,
            seed: 0,
        }
    }

    fn prepare(&self) -> Result<(Mask, Partition)> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::config(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        if self.replicates < 2 {
            return Err(Error::config("need at least 2 replicates"));
        }
        let truth = gen_shape(&self.shape, self.rows, self.cols)?;
        let part = partition(&truth);
        if part.noise == 0 || part.boundary == 0 || part.signal == 0 {
            return Err(Error::config(format!(
                "shape leaves an empty class (noise {}, boundary {}, signal {})",
                part.noise, part.boundary, part.signal
            )));
        }
        Ok((truth, part))
    }

    fn note(&self) -> Option<String> {
        (self.delta == 0.0)
            .then(|| "delta is 0, so the signal region is indistinguishable from noise".to_string())
    }

    fn data_model(&self) -> DataModel {
        DataModel::Normal {
            mu0: 0.0,
            mu1: self.delta,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMeans {
    pub noise: f64,
    pub boundary: f64,
    pub signal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariabilityContrast {
    pub boundary_mean: f64,
    pub non_boundary_mean: f64,
    /// Mean of the cross sum of squares over full-cross boundary cells.
    pub vtilde_boundary_mean: f64,
    /// Its expectation, averaged over the same cells.
    pub vtilde_expected: f64,
    pub vtilde_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: u8,
    pub setting: TheoremSetting,
    pub noise_count: usize,
    pub boundary_count: usize,
    pub signal_count: usize,
    pub boundary_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_means: Option<ClassMeans>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variability: Option<VariabilityContrast>,
    /// Whether the ordering held in each replicate.
    pub successes: Vec<bool>,
    pub success_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn std_error(values: &[f64]) -> f64 {
    let m = mean(values);
    let n = values.len() as f64;
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0) / n).sqrt()
}

fn report(
    theorem: u8,
    setting: &TheoremSetting,
    part: &Partition,
    successes: Vec<bool>,
) -> TheoremReport {
    TheoremReport {
        theorem,
        setting: setting.clone(),
        noise_count: part.noise,
        boundary_count: part.boundary,
        signal_count: part.signal,
        boundary_fraction: part.boundary as f64 / part.classes.len() as f64,
        class_means: None,
        variability: None,
        success_fraction: successes.iter().filter(|&&s| s).count() as f64 / successes.len() as f64,
        successes,
        note: setting.note(),
    }
}

/// Mean statistic over noise, boundary and signal pixels, with the
/// single-pixel plus radius-1 circle ladder and known unit variance.
pub fn theorem1_check(setting: &TheoremSetting) -> Result<TheoremReport> {
    let (truth, part) = setting.prepare()?;
    let ladder = ScaleLadder::new(vec![WindowSpec::square(0), WindowSpec::circle(1)])?;
    let model = ModelSpec::normal(Some(1.0));
    let data_model = setting.data_model();
    let mut per_rep = Vec::with_capacity(setting.replicates);
    for i in 0..setting.replicates {
        let mut rng = stream(setting.seed, Domain::Theorem, i as u64);
        let grid = draw(&data_model, &truth, &mut rng)?;
        let stat = mcd_statistic(&grid, &model, &ladder)?;
        let mut sums = [0.0; 3];
        for (&t, c) in stat.values().iter().zip(part.classes.iter()) {
            let slot = match c {
                PixelClass::Noise => 0,
                PixelClass::Boundary { .. } => 1,
                PixelClass::Signal => 2,
            };
            sums[slot] += t;
        }
        per_rep.push(ClassMeans {
            noise: sums[0] / part.noise as f64,
            boundary: sums[1] / part.boundary as f64,
            signal: sums[2] / part.signal as f64,
        });
    }
    let successes = per_rep
        .iter()
        .map(|m| m.noise < m.boundary && m.boundary < m.signal)
        .collect();
    let n = per_rep.len() as f64;
    let mut out = report(1, setting, &part, successes);
    out.class_means = Some(ClassMeans {
        noise: per_rep.iter().map(|m| m.noise).sum::<f64>() / n,
        boundary: per_rep.iter().map(|m| m.boundary).sum::<f64>() / n,
        signal: per_rep.iter().map(|m| m.signal).sum::<f64>() / n,
    });
    Ok(out)
}

/// Mean cross variability over boundary pixels against all other pixels.
pub fn theorem2_check(setting: &TheoremSetting) -> Result<TheoremReport> {
    let (truth, part) = setting.prepare()?;
    let data_model = setting.data_model();
    let d2 = setting.delta * setting.delta;
    let full_cross: Vec<(usize, f64)> = part
        .classes
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match *c {
            PixelClass::Boundary {
                signal_count,
                cross_size: 5,
            } => {
                let k = signal_count as f64;
                Some((i, 4.0 + k * d2 - k * k * d2 / 5.0))
            }
            _ => None,
        })
        .collect();
    let (mut boundary, mut other, mut vtilde, mut successes) = (vec![], vec![], vec![], vec![]);
    for i in 0..setting.replicates {
        let mut rng = stream(setting.seed, Domain::Theorem, i as u64);
        let grid = draw(&data_model, &truth, &mut rng)?;
        let var = cross_variance(&grid)?;
        let (mut b, mut o) = (0.0, 0.0);
        for (&v, c) in var.values().iter().zip(part.classes.iter()) {
            match c {
                PixelClass::Boundary { .. } => b += v,
                _ => o += v,
            }
        }
        let (b, o) = (
            b / part.boundary as f64,
            o / (part.noise + part.signal) as f64,
        );
        successes.push(b > o);
        boundary.push(b);
        other.push(o);
        if !full_cross.is_empty() {
            let s: f64 = full_cross.iter().map(|&(p, _)| 4.0 * var.values()[p]).sum();
            vtilde.push(s / full_cross.len() as f64);
        }
    }
    let mut out = report(2, setting, &part, successes);
    out.variability = Some(VariabilityContrast {
        boundary_mean: mean(&boundary),
        non_boundary_mean: mean(&other),
        vtilde_boundary_mean: if vtilde.is_empty() {
            f64::NAN
        } else {
            mean(&vtilde)
        },
        vtilde_expected: if full_cross.is_empty() {
            f64::NAN
        } else {
            full_cross.iter().map(|&(_, e)| e).sum::<f64>() / full_cross.len() as f64
        },
        vtilde_std_error: if vtilde.is_empty() {
            f64::NAN
        } else {
            std_error(&vtilde)
        },
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryCellCheck {
    pub signal_count: usize,
    pub delta: f64,
    pub replicates: usize,
    pub mean: f64,
    pub std_error: f64,
    /// `4 + k δ² - k² δ² / 5`.
    pub expected: f64,
}

/// Monte Carlo mean of the cross sum of squares for one isolated
/// configuration: `signal_count` of the five cells shifted by `delta`.
pub fn boundary_cell_check(
    signal_count: usize,
    delta: f64,
    replicates: usize,
    seed: u64,
) -> Result<BoundaryCellCheck> {
    if signal_count > 5 {
        return Err(Error::config(format!(
            "a cross has 5 cells, got signal count {signal_count}"
        )));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::config(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    if replicates < 2 {
        return Err(Error::config("need at least 2 replicates"));
    }
    let mut rng = stream(seed, Domain::BoundaryCell, signal_count as u64);
    let values: Vec<f64> = (0..replicates)
        .map(|_| {
            let y: Vec<f64> = (0..5)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z + if j < signal_count { delta } else { 0.0 }
                })
                .collect();
            let m = mean(&y);
            y.iter().map(|v| (v - m) * (v - m)).sum()
        })
        .collect();
    let k = signal_count as f64;
    Ok(BoundaryCellCheck {
        signal_count,
        delta,
        replicates,
        mean: mean(&values),
        std_error: std_error(&values),
        expected: 4.0 + k * delta * delta - k * k * delta * delta / 5.0,
    })
}
