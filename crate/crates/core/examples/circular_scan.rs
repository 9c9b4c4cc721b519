//! Circular scan statistic on the oval shape.
//!
//! cargo run --release --example circular_scan -- [p1] [mc_reps]

use mcd::baselines::{circular_scan, ScanConfig};
use mcd::sim::{sensitivity_specificity, simulate_grid, DataModel, ShapeKind};
use mcd::ModelSpec;

fn main() -> mcd::Result<()> {
    let mut args = std::env::args().skip(1);
    let p1: f64 = args.next().map_or(0.22, |s| s.parse().expect("p1"));
    let mc_reps: usize = args.next().map_or(99, |s| s.parse().expect("mc_reps"));

    let data = simulate_grid(
        &DataModel::Binomial {
            trials: 100,
            p0: 0.2,
            p1,
        },
        &ShapeKind::oval(),
        100,
        100,
        5,
        0,
    )?;
    let spec = ModelSpec::binomial(data.trials.clone().expect("binomial data"));
    let config = ScanConfig {
        mc_reps,
        seed: 5,
        ..ScanConfig::default()
    };
    let result = circular_scan(&data.grid, &spec, &config)?;
    for c in &result.clusters {
        println!(
            "centre {:?} radius {:>2}  cells {:>4}  llr {:>8.3}  p {:.3}",
            c.center, c.radius, c.cell_count, c.llr, c.p_value
        );
    }
    let m = sensitivity_specificity(&result.mask, &data.truth)?;
    println!(
        "sensitivity {:.4}  specificity {:.4}",
        m.sensitivity, m.specificity
    );
    Ok(())
}
