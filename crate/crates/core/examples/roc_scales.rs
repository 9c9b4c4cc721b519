//! ROC comparison of one, two and five scales on the weak-signal L-shape.
//!
//! cargo run --release --example roc_scales -- [replicates]

use mcd::sim::{auc, roc_auc, roc_curve, simulate_grid, DataModel, ShapeKind};
use mcd::{mcd_statistic, ModelSpec, ScaleLadder};

fn main() -> mcd::Result<()> {
    let reps: u64 = std::env::args()
        .nth(1)
        .map_or(20, |s| s.parse().expect("replicates"));
    let ladders = [
        ("single", ScaleLadder::single_scale()),
        ("two", ScaleLadder::two_scale()),
        ("five", ScaleLadder::five_scale()),
    ];
    let model = DataModel::Binomial {
        trials: 100,
        p0: 0.2,
        p1: 0.22,
    };
    let mut exact = [0.0; 3];
    let mut trapezoid = [0.0; 3];
    for i in 0..reps {
        let data = simulate_grid(&model, &ShapeKind::l_shape(), 100, 100, 1, i)?;
        let spec = ModelSpec::binomial(data.trials.clone().expect("binomial data"));
        for (j, (_, ladder)) in ladders.iter().enumerate() {
            let stat = mcd_statistic(&data.grid, &spec, ladder)?;
            exact[j] += auc(stat.values(), &data.truth)? / reps as f64;
            trapezoid[j] += roc_auc(&roc_curve(stat.values(), &data.truth, 200)?) / reps as f64;
        }
    }
    for (j, (name, _)) in ladders.iter().enumerate() {
        println!(
            "{name:<7} AUC {:.4} (200-point curve {:.4})",
            exact[j], trapezoid[j]
        );
    }
    Ok(())
}
