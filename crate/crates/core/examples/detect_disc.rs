//! End-to-end detection on a simulated Binomial disc.
//!
//! cargo run --release --example detect_disc -- [p1] [seed]

use mcd::sim::{jaccard, sensitivity_specificity, simulate_grid, DataModel, ShapeKind};
use mcd::{mcd_statistic, neighborhood_variability, select_and_detect, ModelSpec, ScaleLadder};

fn main() -> mcd::Result<()> {
    let mut args = std::env::args().skip(1);
    let p1: f64 = args.next().map_or(0.3, |s| s.parse().expect("p1"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let model = DataModel::Binomial {
        trials: 100,
        p0: 0.2,
        p1,
    };
    let data = simulate_grid(&model, &ShapeKind::disc(15.0), 100, 100, seed, 0)?;
    let spec = ModelSpec::binomial(data.trials.clone().expect("binomial data"));

    let stat = mcd_statistic(&data.grid, &spec, &ScaleLadder::two_scale())?;
    let var = neighborhood_variability(&data.grid, &spec)?;
    let detection = select_and_detect(&stat, &var, 100)?;
    let scan = detection.scan.as_ref().expect("scan diagnostics");

    let m = sensitivity_specificity(&detection.mask, &data.truth)?;
    println!("null estimate      {:.4}", stat.null_estimate());
    println!(
        "threshold t*       {:.3} (belt {} of {})",
        detection.t_star,
        scan.chosen,
        scan.belt_counts.len()
    );
    println!("peak/global V      {:.3}", scan.peak_ratio);
    println!(
        "detected cells     {} (truth {})",
        detection.mask.count_true(),
        data.truth.count_true()
    );
    println!("sensitivity        {:.4}", m.sensitivity);
    println!("specificity        {:.4}", m.specificity);
    println!(
        "jaccard            {:.4}",
        jaccard(&detection.mask, &data.truth)
    );
    Ok(())
}
