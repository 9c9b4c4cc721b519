//! Belt-by-belt view of threshold selection on a Normal disc.
//!
//! cargo run --release --example threshold_scan -- [delta] [K]

use mcd::sim::{sensitivity_specificity, simulate_grid, DataModel, ShapeKind};
use mcd::threshold::{detect, scan_thresholds};
use mcd::{mcd_statistic, neighborhood_variability, ModelSpec, ScaleLadder};

fn main() -> mcd::Result<()> {
    let mut args = std::env::args().skip(1);
    let delta: f64 = args.next().map_or(2.0, |s| s.parse().expect("delta"));
    let k: usize = args.next().map_or(30, |s| s.parse().expect("K"));

    let model = DataModel::Normal {
        mu0: 0.0,
        mu1: delta,
        sigma: 1.0,
    };
    let data = simulate_grid(&model, &ShapeKind::disc(20.0), 100, 100, 3, 0)?;
    let spec = ModelSpec::normal(Some(1.0));
    let stat = mcd_statistic(&data.grid, &spec, &ScaleLadder::two_scale())?;
    let var = neighborhood_variability(&data.grid, &spec)?;
    let scan = scan_thresholds(&stat, &var, k)?;

    println!(
        "{:>4} {:>10} {:>10} {:>7} {:>9}",
        "belt", "from", "to", "cells", "mean V"
    );
    for (b, (count, mean)) in scan.belt_counts.iter().zip(&scan.belt_means).enumerate() {
        let mark = if b == scan.chosen { " <" } else { "" };
        match mean {
            Some(v) => println!(
                "{b:>4} {:>10.3} {:>10.3} {count:>7} {v:>9.4}{mark}",
                scan.thresholds[b],
                scan.thresholds[b + 1]
            ),
            None => println!(
                "{b:>4} {:>10.3} {:>10.3} {count:>7} {:>9}",
                scan.thresholds[b],
                scan.thresholds[b + 1],
                "-"
            ),
        }
    }
    let mask = detect(&stat, scan.t_star)?.mask;
    let m = sensitivity_specificity(&mask, &data.truth)?;
    println!(
        "t* = {:.3}: sensitivity {:.4}, specificity {:.4}",
        scan.t_star, m.sensitivity, m.specificity
    );
    Ok(())
}
