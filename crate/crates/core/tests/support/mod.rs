//! Naive reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::path::Path;
use std::process::Command;

use mcd::stat::ModelSpec;
use mcd::{Field, Grid, ScaleLadder, TrialsMap, WindowShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_mcd");

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn in_window(shape: WindowShape, r: usize, di: i64, dj: i64) -> bool {
    let r = r as i64;
    match shape {
        WindowShape::Square => di.abs() <= r && dj.abs() <= r,
        WindowShape::Circle => di * di + dj * dj <= r * r,
    }
}

pub fn sorted_median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Clone, Copy)]
pub enum Fam {
    Binomial,
    Poisson,
    Normal(f64),
}

/// Per-pixel statistic computed from explicit annulus cell lists.
pub fn naive_stat(
    grid: &[Vec<f64>],
    trials: &[Vec<f64>],
    fam: Fam,
    shape: WindowShape,
    radii: &[usize],
) -> Vec<Vec<f64>> {
    let rows = grid.len();
    let cols = grid[0].len();
    let adj = |r: usize, c: usize| (grid[r][c] + 1.0) / (trials[r][c] + 2.0);
    let null = match fam {
        Fam::Binomial => sorted_median(
            (0..rows)
                .flat_map(|r| (0..cols).map(move |c| (r, c)))
                .map(|(r, c)| adj(r, c))
                .collect(),
        ),
        _ => sorted_median(grid.iter().flatten().copied().collect()),
    };
    let mut out = vec![vec![0.0; cols]; rows];
    for r in 0..rows {
        for c in 0..cols {
            let mut total = 0.0;
            for (k, &rad) in radii.iter().enumerate() {
                let mut cells = Vec::new();
                for rr in 0..rows {
                    for cc in 0..cols {
                        let (di, dj) = (rr as i64 - r as i64, cc as i64 - c as i64);
                        let inside = in_window(shape, rad, di, dj);
                        let inner = k > 0 && in_window(shape, radii[k - 1], di, dj);
                        if inside && !inner {
                            cells.push((rr, cc));
                        }
                    }
                }
                let dx: f64 = cells.iter().map(|&(a, b)| grid[a][b]).sum();
                let dn: f64 = cells.iter().map(|&(a, b)| trials[a][b]).sum();
                let dm = cells.len() as f64;
                match fam {
                    Fam::Binomial => {
                        let est = sorted_median(cells.iter().map(|&(a, b)| adj(a, b)).collect())
                            .max(null);
                        total += -2.0
                            * (dx * (null.ln() - est.ln())
                                + (dn - dx) * ((1.0 - null).ln() - (1.0 - est).ln()));
                    }
                    Fam::Poisson => {
                        let est = (dx / dm).max(null);
                        total += -2.0 * (dx * (null.ln() - est.ln()) + dm * (est - null));
                    }
                    Fam::Normal(sigma) => {
                        let est = (dx / dm).max(null);
                        total += (2.0 * dx * (est - null) + dm * (null * null - est * est))
                            / (sigma * sigma);
                    }
                }
            }
            out[r][c] = total;
        }
    }
    out
}

pub fn random_ladder(rng: &mut ChaCha8Rng) -> (WindowShape, Vec<usize>) {
    let shape = if rng.random_bool(0.5) {
        WindowShape::Square
    } else {
        WindowShape::Circle
    };
    let mut radii = vec![0];
    let scales = rng.random_range(1..=3);
    for _ in 1..scales {
        let last = *radii.last().unwrap();
        radii.push(last + rng.random_range(1..=3));
    }
    (shape, radii)
}

pub fn to_rows(f: &Field<f64>) -> Vec<Vec<f64>> {
    (0..f.rows())
        .map(|r| (0..f.cols()).map(|c| f[(r, c)]).collect())
        .collect()
}

/// A random 15x15 grid with its model, ladder and oracle statistic.
pub struct OracleCase {
    pub grid: Grid,
    pub model: ModelSpec,
    pub ladder: ScaleLadder,
    pub oracle: Vec<Vec<f64>>,
}

/// `fam` is binomial, poisson or normal. Normal cases alternate between a
/// known sigma and the MAD estimate.
pub fn family_case(fam: &str, case: usize, g: &mut ChaCha8Rng) -> OracleCase {
    let (shape, radii) = random_ladder(g);
    let ladder = ScaleLadder::from_radii(shape, &radii).unwrap();
    let ones = vec![vec![1.0; 15]; 15];
    let (grid, model, oracle) = match fam {
        "binomial" => {
            let trials: Vec<u64> = (0..225).map(|_| g.random_range(20..=120)).collect();
            let data: Vec<f64> = trials
                .iter()
                .map(|&n| g.random_range(0..=(n as f64 * 0.4) as u64) as f64)
                .collect();
            let grid = Grid::new(15, 15, data).unwrap();
            let tmap = TrialsMap::new(Field::new(15, 15, trials).unwrap()).unwrap();
            let n = to_rows(&tmap.field().map(|&n| n as f64));
            let oracle = naive_stat(&to_rows(&grid), &n, Fam::Binomial, shape, &radii);
            (grid, ModelSpec::binomial(tmap), oracle)
        }
        "poisson" => {
            let lambda = g.random_range(2.0..8.0);
            let data: Vec<f64> = (0..225)
                .map(|_| g.random_range(0..=(2.0 * lambda) as u64 + 1) as f64)
                .collect();
            let grid = Grid::new(15, 15, data).unwrap();
            let oracle = naive_stat(&to_rows(&grid), &ones, Fam::Poisson, shape, &radii);
            (grid, ModelSpec::poisson(), oracle)
        }
        "normal" => {
            let data: Vec<f64> = (0..225).map(|_| g.random_range(-3.0..3.0)).collect();
            let grid = Grid::new(15, 15, data).unwrap();
            let (model, sigma) = if case.is_multiple_of(2) {
                let s = g.random_range(0.5..2.0);
                (ModelSpec::normal(Some(s)), s)
            } else {
                let med = sorted_median(grid.as_slice().to_vec());
                let mad = sorted_median(grid.iter().map(|v| (v - med).abs()).collect());
                (ModelSpec::normal(None), 1.4826 * mad)
            };
            let oracle = naive_stat(&to_rows(&grid), &ones, Fam::Normal(sigma), shape, &radii);
            (grid, model, oracle)
        }
        other => panic!("unknown family {other}"),
    };
    OracleCase {
        grid,
        model,
        ladder,
        oracle,
    }
}

/// Largest `|a - b| / max(|b|, 1)` and where it occurs.
pub fn worst_relative_error(lib: &Field<f64>, oracle: &[Vec<f64>]) -> (f64, (usize, usize)) {
    let mut worst = (0.0, (0, 0));
    for r in 0..lib.rows() {
        for c in 0..lib.cols() {
            let (a, b) = (lib[(r, c)], oracle[r][c]);
            let e = (a - b).abs() / b.abs().max(1.0);
            if e.is_nan() || e > worst.0 {
                worst = (e, (r, c));
            }
        }
    }
    worst
}

/// Number of rectangles on a `n x n` integer grid whose SAT sum differs
/// from direct summation, and the number checked.
pub fn sat_mismatches(n: usize, seed: u64) -> (usize, usize) {
    let mut g = rng(seed);
    let field = Field::from_fn(n, n, |_, _| g.random_range(-50i64..50));
    let sat = mcd::grid::SummedAreaTable::new(&field);
    let (mut bad, mut checked) = (0, 0);
    for r0 in 0..n {
        for r1 in r0..n {
            for c0 in 0..n {
                for c1 in c0..n {
                    let mut s = 0i64;
                    for r in r0..=r1 {
                        for c in c0..=c1 {
                            s += field[(r, c)];
                        }
                    }
                    bad += (sat.rect_sum(r0, c0, r1, c1) != s) as usize;
                    checked += 1;
                }
            }
        }
    }
    (bad, checked)
}

/// Runs `args` twice in fresh directories; returns whether every file
/// written under `out/` is byte-identical, or the failure reason.
pub fn rerun_identical(args: &[&str]) -> Result<(), String> {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let o = Command::new(BIN)
            .args(args)
            .current_dir(dir.path())
            .env_remove("MCD_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!(
                "{args:?} exited {:?}: {}",
                o.status.code(),
                String::from_utf8_lossy(&o.stderr)
            ));
        }
        runs.push(read_dir_sorted(&dir.path().join("out"))?);
    }
    if runs[0].is_empty() {
        return Err(format!("{args:?} wrote nothing"));
    }
    if runs[0] != runs[1] {
        return Err(format!("{args:?} differs between runs"));
    }
    Ok(())
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for e in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        files.push((
            e.file_name().to_string_lossy().into_owned(),
            std::fs::read(e.path()).map_err(|e| e.to_string())?,
        ));
    }
    files.sort();
    Ok(files)
}

/// Subcommand invocations used for the determinism checks, with paths
/// rooted at the crate directory.
pub fn determinism_cases() -> Vec<Vec<String>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let grid = root
        .join("fixtures/disc_grid.csv")
        .to_string_lossy()
        .into_owned();
    let smoke = root
        .join("configs/smoke.toml")
        .to_string_lossy()
        .into_owned();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        s(&["detect", "-i", &grid, "-o", "out"]),
        s(&["fdr", "-i", &grid, "-o", "out"]),
        s(&[
            "--seed",
            "4",
            "scan",
            "-i",
            &grid,
            "--radii",
            "1-5",
            "--mc-reps",
            "19",
            "-o",
            "out",
        ]),
        s(&["simulate", "-c", &smoke, "-o", "out"]),
        s(&[
            "theorems",
            "--delta",
            "1",
            "--replicates",
            "4",
            "--rows",
            "60",
            "--cols",
            "60",
            "--shape",
            "disc:12",
            "--cell-replicates",
            "200",
            "-o",
            "out",
        ]),
    ]
}
