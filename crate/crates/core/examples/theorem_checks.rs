//! Monte Carlo checks of the boundary properties under the Normal model.
//!
//! cargo run --release --example theorem_checks -- [delta] [replicates]

use mcd::sim::{boundary_cell_check, theorem1_check, theorem2_check, TheoremSetting};

fn main() -> mcd::Result<()> {
    let mut args = std::env::args().skip(1);
    let delta: f64 = args.next().map_or(1.0, |s| s.parse().expect("delta"));
    let mut setting = TheoremSetting::new(delta);
    setting.replicates = args.next().map_or(200, |s| s.parse().expect("replicates"));

    let t1 = theorem1_check(&setting)?;
    let means = t1.class_means.expect("class means");
    println!(
        "cells: noise {}, boundary {}, signal {} (p_B = {:.4})",
        t1.noise_count, t1.boundary_count, t1.signal_count, t1.boundary_fraction
    );
    println!(
        "mean T: noise {:.3} < boundary {:.3} < signal {:.3} in {:.1}% of replicates",
        means.noise,
        means.boundary,
        means.signal,
        100.0 * t1.success_fraction
    );

    let t2 = theorem2_check(&setting)?;
    let v = t2.variability.expect("variability contrast");
    println!(
        "mean V: boundary {:.4} vs rest {:.4}, larger in {:.1}% of replicates",
        v.boundary_mean,
        v.non_boundary_mean,
        100.0 * t2.success_fraction
    );
    println!(
        "boundary cross sum of squares {:.4} +- {:.4} (expected {:.4})",
        v.vtilde_boundary_mean, v.vtilde_std_error, v.vtilde_expected
    );

    for k in 1..=4 {
        let c = boundary_cell_check(k, delta, 20_000, 9)?;
        println!(
            "k = {k}: {:.4} +- {:.4}, expected {:.4}",
            c.mean, c.std_error, c.expected
        );
    }
    Ok(())
}
