//! Circular spatial scan statistic with Monte Carlo inference.
//!
//! Zones are discrete circles (`di^2 + dj^2 <= r^2`, clipped to the grid)
//! around every cell for every requested radius, limited to half of the
//! total exposure. Significance compares each zone's log likelihood ratio
//! with the distribution of the maximum LLR over null replicates drawn
//! from the fitted null model.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Mask, SatValue, SummedAreaTable, WindowSpec};
use crate::rng::{stream, Domain};
use crate::stat::{Family, ModelSpec};

pub const MIN_MC_REPS: usize = 19;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub radii: Vec<usize>,
    pub mc_reps: usize,
    pub cluster_alpha: f64,
    /// Largest zone exposure allowed, as a fraction of the total.
    pub max_exposure_fraction: f64,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            radii: (1..=20).collect(),
            mc_reps: 99,
            cluster_alpha: 0.05,
            max_exposure_fraction: 0.5,
            seed: 0,
        }
    }
}

impl ScanConfig {
    fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::config("scan needs at least one radius"));
        }
        if self.mc_reps < MIN_MC_REPS {
            return Err(Error::config(format!(
                "scan needs at least {MIN_MC_REPS} Monte Carlo replicates, got {}",
                self.mc_reps
            )));
        }
        if !(self.cluster_alpha > 0.0 && self.cluster_alpha < 1.0) {
            return Err(Error::config(format!(
                "cluster alpha must lie in (0,1), got {}",
                self.cluster_alpha
            )));
        }
        if !(self.max_exposure_fraction > 0.0 && self.max_exposure_fraction <= 0.5) {
            return Err(Error::config(
                "maximum exposure fraction must lie in (0, 0.5]",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub center: (usize, usize),
    pub radius: usize,
    /// Row-major indices of the zone's cells.
    #[serde(skip)]
    pub cells: Vec<usize>,
    pub cell_count: usize,
    pub observed: f64,
    pub exposure: f64,
    pub llr: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Most likely cluster first, then disjoint secondary clusters by LLR.
    pub clusters: Vec<Cluster>,
    /// Union of reported clusters with `p <= cluster_alpha`.
    pub mask: Mask,
    /// Maximum LLR of each null replicate, ascending.
    pub null_max_llr: Vec<f64>,
    pub config: ScanConfig,
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Zone totals needed by every model.
#[derive(Clone, Copy)]
struct ZoneTotals {
    sum: f64,
    exposure: f64,
    cells: f64,
}

#[derive(Clone, Copy)]
enum Likelihood {
    Bernoulli { cases: f64, trials: f64 },
    Poisson { cases: f64, cells: f64 },
    Normal { cells: f64, sum: f64, sumsq: f64 },
}

impl Likelihood {
    /// Log likelihood ratio of the zone against the rest; 0 unless the zone is elevated.
    fn llr(&self, z: ZoneTotals) -> f64 {
        match *self {
            Likelihood::Bernoulli { cases, trials } => {
                let (c, n) = (z.sum, z.exposure);
                let (co, no) = (cases - c, trials - n);
                if no <= 0.0 || c * no <= co * n {
                    return 0.0;
                }
                let f = |a: f64, b: f64| xlogx(a) + xlogx(b - a) - xlogx(b);
                (f(c, n) + f(co, no) - f(cases, trials)).max(0.0)
            }
            Likelihood::Poisson { cases, cells } => {
                let c = z.sum;
                let e = cases * z.cells / cells;
                if c <= e || e <= 0.0 {
                    return 0.0;
                }
                let rest = cases - c;
                let term = if rest > 0.0 {
                    rest * (rest / (cases - e)).ln()
                } else {
                    0.0
                };
                (c * (c / e).ln() + term).max(0.0)
            }
            Likelihood::Normal { cells, sum, sumsq } => {
                let (n, s) = (z.cells, z.sum);
                let no = cells - n;
                if no <= 0.0 || s / n <= (sum - s) / no {
                    return 0.0;
                }
                let var0 = (sumsq - sum * sum / cells) / cells;
                let var1 = (sumsq - s * s / n - (sum - s) * (sum - s) / no) / cells;
                if var0 <= 0.0 {
                    return 0.0;
                }
                if var1 <= 0.0 {
                    return f64::INFINITY;
                }
                (0.5 * cells * (var0 / var1).ln()).max(0.0)
            }
        }
    }
}

/// Geometry and exposure of every admissible zone.
struct ZoneSet {
    rows: usize,
    cols: usize,
    radii: Vec<usize>,
    half_widths: Vec<Vec<usize>>,
    /// Number of admissible radii per centre (a prefix of `radii`).
    admissible: Vec<usize>,
    exposure: Vec<f64>,
    cell_counts: Vec<f64>,
}

impl ZoneSet {
    fn new(
        rows: usize,
        cols: usize,
        radii: &[usize],
        exposure: &Field<f64>,
        max_fraction: f64,
    ) -> Self {
        let mut radii = radii.to_vec();
        radii.sort_unstable();
        radii.dedup();
        let half_widths: Vec<Vec<usize>> = radii
            .iter()
            .map(|&r| {
                let w = WindowSpec::circle(r);
                (0..=r).map(|d| w.half_width(d).unwrap_or(0)).collect()
            })
            .collect();
        let sat = SummedAreaTable::new(exposure);
        let ones = SummedAreaTable::new(&Field::from_fn(rows, cols, |_, _| 1i64));
        let limit = sat.total() * max_fraction;
        let nr = radii.len();
        let mut admissible = vec![0; rows * cols];
        let mut exp = vec![0.0; rows * cols * nr];
        let mut counts = vec![0.0; rows * cols * nr];
        for r in 0..rows {
            for c in 0..cols {
                let p = r * cols + c;
                for k in 0..nr {
                    let e = segments_sum(&sat, rows, cols, (r, c), radii[k], &half_widths[k]);
                    if e > limit + 1e-9 {
                        break;
                    }
                    exp[p * nr + k] = e;
                    counts[p * nr + k] =
                        segments_sum(&ones, rows, cols, (r, c), radii[k], &half_widths[k]) as f64;
                    admissible[p] = k + 1;
                }
            }
        }
        ZoneSet {
            rows,
            cols,
            radii,
            half_widths,
            admissible,
            exposure: exp,
            cell_counts: counts,
        }
    }

    fn totals<T: SatValue>(&self, sums: &SummedAreaTable<T>, p: usize, k: usize) -> ZoneTotals {
        let center = (p / self.cols, p % self.cols);
        let nr = self.radii.len();
        let hw = &self.half_widths[k];
        ZoneTotals {
            sum: segments_sum(sums, self.rows, self.cols, center, self.radii[k], hw).to_f64(),
            exposure: self.exposure[p * nr + k],
            cells: self.cell_counts[p * nr + k],
        }
    }

    fn cells(&self, p: usize, k: usize) -> Vec<usize> {
        let (r, c) = (p / self.cols, p % self.cols);
        let radius = self.radii[k];
        let mut out = Vec::new();
        for rr in r.saturating_sub(radius)..=(r + radius).min(self.rows - 1) {
            let w = self.half_widths[k][rr.abs_diff(r)];
            for cc in c.saturating_sub(w)..=(c + w).min(self.cols - 1) {
                out.push(rr * self.cols + cc);
            }
        }
        out
    }
}

#[inline]
fn segments_sum<T: SatValue>(
    sat: &SummedAreaTable<T>,
    rows: usize,
    cols: usize,
    (r, c): (usize, usize),
    radius: usize,
    half_widths: &[usize],
) -> T {
    let mut acc = T::default();
    for rr in r.saturating_sub(radius)..=(r + radius).min(rows - 1) {
        let w = half_widths[rr.abs_diff(r)];
        acc = acc + sat.rect_sum(rr, c.saturating_sub(w), rr, (c + w).min(cols - 1));
    }
    acc
}

/// Data prepared for repeated zone evaluation.
enum ScanData {
    Counts(SummedAreaTable<i64>),
    Reals(SummedAreaTable<f64>),
}

impl ScanData {
    fn new(grid: &Grid, family: Family) -> Result<Self> {
        Ok(match family {
            Family::Binomial | Family::Poisson => {
                ScanData::Counts(SummedAreaTable::new(&grid.to_counts()?))
            }
            Family::Normal => ScanData::Reals(SummedAreaTable::new(grid)),
        })
    }

    fn totals(&self, zones: &ZoneSet, p: usize, k: usize) -> ZoneTotals {
        match self {
            ScanData::Counts(s) => zones.totals(s, p, k),
            ScanData::Reals(s) => zones.totals(s, p, k),
        }
    }

    fn max_llr(&self, zones: &ZoneSet, model: Likelihood) -> f64 {
        let mut best = 0.0f64;
        for p in 0..zones.rows * zones.cols {
            for k in 0..zones.admissible[p] {
                best = best.max(model.llr(self.totals(zones, p, k)));
            }
        }
        best
    }
}

fn likelihood(grid: &Grid, model: &ModelSpec) -> Likelihood {
    match model.family {
        Family::Binomial => Likelihood::Bernoulli {
            cases: grid.iter().sum(),
            trials: model
                .trials
                .as_ref()
                .expect("validated")
                .field()
                .iter()
                .map(|&n| n as f64)
                .sum(),
        },
        Family::Poisson => Likelihood::Poisson {
            cases: grid.iter().sum(),
            cells: grid.len() as f64,
        },
        Family::Normal => Likelihood::Normal {
            cells: grid.len() as f64,
            sum: grid.iter().sum(),
            sumsq: grid.iter().map(|v| v * v).sum(),
        },
    }
}

/// Draws a null replicate from the fitted null model.
fn null_replicate(grid: &Grid, model: &ModelSpec, rng: &mut impl Rng) -> Result<Grid> {
    let n = grid.len() as f64;
    let data: Vec<f64> = match model.family {
        Family::Binomial => {
            let trials = model.trials.as_ref().expect("validated").field();
            let total_trials: f64 = trials.iter().map(|&t| t as f64).sum();
            let p = grid.iter().sum::<f64>() / total_trials;
            trials
                .iter()
                .map(|&t| {
                    Binomial::new(t, p)
                        .map(|d| d.sample(rng) as f64)
                        .map_err(|e| Error::internal(format!("binomial sampler: {e}")))
                })
                .collect::<Result<_>>()?
        }
        Family::Poisson => {
            let rate = grid.iter().sum::<f64>() / n;
            if rate <= 0.0 {
                vec![0.0; grid.len()]
            } else {
                let d = Poisson::new(rate)
                    .map_err(|e| Error::internal(format!("poisson sampler: {e}")))?;
                (0..grid.len()).map(|_| d.sample(rng)).collect()
            }
        }
        Family::Normal => {
            let mean = grid.iter().sum::<f64>() / n;
            let var = grid.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let d = Normal::new(mean, var.sqrt())
                .map_err(|e| Error::internal(format!("normal sampler: {e}")))?;
            (0..grid.len()).map(|_| d.sample(rng)).collect()
        }
    };
    Grid::new(grid.rows(), grid.cols(), data)
}

/// Runs the circular scan and its Monte Carlo significance test.
pub fn circular_scan(grid: &Grid, model: &ModelSpec, config: &ScanConfig) -> Result<ScanResult> {
    config.validate()?;
    model.validate(grid)?;
    let (rows, cols) = grid.shape();
    let exposure = match model.family {
        Family::Binomial => model
            .trials
            .as_ref()
            .expect("validated")
            .field()
            .map(|&n| n as f64),
        _ => Field::from_fn(rows, cols, |_, _| 1.0),
    };
    let zones = ZoneSet::new(
        rows,
        cols,
        &config.radii,
        &exposure,
        config.max_exposure_fraction,
    );

    let observed = ScanData::new(grid, model.family)?;
    let lik = likelihood(grid, model);
    let mut ranked: Vec<(f64, usize, usize)> = Vec::new();
    for p in 0..rows * cols {
        for k in 0..zones.admissible[p] {
            let llr = lik.llr(observed.totals(&zones, p, k));
            if llr > 0.0 {
                ranked.push((llr, p, k));
            }
        }
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut null_max_llr: Vec<f64> = (0..config.mc_reps as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(config.seed, Domain::ScanNull, j);
            let replicate = null_replicate(grid, model, &mut rng)?;
            let data = ScanData::new(&replicate, model.family)?;
            Ok(data.max_llr(&zones, likelihood(&replicate, model)))
        })
        .collect::<Result<_>>()?;
    null_max_llr.sort_by(f64::total_cmp);
    let p_value = |llr: f64| {
        let exceed = null_max_llr.len() - null_max_llr.partition_point(|&v| v < llr);
        (1 + exceed) as f64 / (config.mc_reps + 1) as f64
    };

    let mut covered = vec![false; rows * cols];
    let mut clusters: Vec<Cluster> = Vec::new();
    for &(llr, p, k) in &ranked {
        let pv = p_value(llr);
        if !clusters.is_empty() && pv > config.cluster_alpha {
            break;
        }
        if covered[p] || overlaps_reported(&clusters, &zones, &covered, p, k) {
            continue;
        }
        let cells = zones.cells(p, k);
        for &cell in &cells {
            covered[cell] = true;
        }
        let totals = observed.totals(&zones, p, k);
        clusters.push(Cluster {
            center: (p / cols, p % cols),
            radius: zones.radii[k],
            cell_count: cells.len(),
            cells,
            observed: totals.sum,
            exposure: totals.exposure,
            llr,
            p_value: pv,
        });
        if pv > config.cluster_alpha {
            break;
        }
    }

    let mut mask = vec![false; rows * cols];
    for cluster in clusters
        .iter()
        .filter(|c| c.p_value <= config.cluster_alpha)
    {
        for &cell in &cluster.cells {
            mask[cell] = true;
        }
    }
    Ok(ScanResult {
        clusters,
        mask: Field::new(rows, cols, mask)?,
        null_max_llr,
        config: config.clone(),
    })
}

fn overlaps_reported(
    clusters: &[Cluster],
    zones: &ZoneSet,
    covered: &[bool],
    p: usize,
    k: usize,
) -> bool {
    let (r, c) = ((p / zones.cols) as i64, (p % zones.cols) as i64);
    let radius = zones.radii[k] as i64;
    let near = clusters.iter().any(|cl| {
        let (dr, dc) = (cl.center.0 as i64 - r, cl.center.1 as i64 - c);
        let reach = cl.radius as i64 + radius;
        dr * dr + dc * dc <= reach * reach
    });
    near && zones.cells(p, k).into_iter().any(|cell| covered[cell])
}
