//! Per-pixel exact tests with Storey's direct FDR rule on the L-shape.
//!
//! cargo run --release --example fdr_baseline -- [p1] [alpha]

use mcd::baselines::{pixel_pvalues, storey_fdr, DEFAULT_LAMBDA};
use mcd::sim::{sensitivity_specificity, simulate_grid, DataModel, ShapeKind};
use mcd::ModelSpec;

fn main() -> mcd::Result<()> {
    let mut args = std::env::args().skip(1);
    let p1: f64 = args.next().map_or(0.25, |s| s.parse().expect("p1"));
    let alpha: f64 = args.next().map_or(0.6, |s| s.parse().expect("alpha"));

    let data = simulate_grid(
        &DataModel::Binomial {
            trials: 100,
            p0: 0.2,
            p1,
        },
        &ShapeKind::l_shape(),
        100,
        100,
        11,
        0,
    )?;
    let spec = ModelSpec::binomial(data.trials.clone().expect("binomial data"));
    for (label, null) in [("median null", None), ("known p0 = 0.2", Some(0.2))] {
        let p = pixel_pvalues(&data.grid, &spec, null)?;
        let r = storey_fdr(&p, alpha, DEFAULT_LAMBDA)?;
        let m = sensitivity_specificity(&r.mask, &data.truth)?;
        println!(
            "{label:<15} pi0 {:.4}  gamma {:.3e}  rejected {:>5}  sensitivity {:.4}  specificity {:.4}",
            r.pi0_hat, r.gamma, r.rejections, m.sensitivity, m.specificity
        );
    }
    Ok(())
}
