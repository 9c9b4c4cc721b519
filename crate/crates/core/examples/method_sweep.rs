//! Replicated comparison of MCD, FDR and the circular scan across
//! alternative success probabilities.
//!
//! cargo run --release --example method_sweep -- [shape] [replicates] [methods]
//!
//! `shape` is l, oval, triangle or y; `methods` a comma list of mcd, fdr, scan.

use mcd::baselines::ScanConfig;
use mcd::sim::{run_sweep, DataModel, MethodSpec, ShapeKind, SimConfig};
use mcd::ScaleLadder;

fn main() -> mcd::Result<()> {
    let mut args = std::env::args().skip(1);
    let shape = ShapeKind::from_name(&args.next().unwrap_or_else(|| "l".into()))?;
    let replicates: usize = args.next().map_or(20, |s| s.parse().expect("replicates"));
    let methods: Vec<MethodSpec> = args
        .next()
        .unwrap_or_else(|| "mcd,fdr".into())
        .split(',')
        .map(|m| match m {
            "mcd" => MethodSpec::mcd("mcd", ScaleLadder::two_scale()),
            "fdr" => MethodSpec::fdr("fdr", 0.6, 0.5),
            "scan" => MethodSpec::scan("scan", ScanConfig::default().radii, 99, 0.05),
            other => panic!("unknown method {other}"),
        })
        .collect();

    let config = SimConfig {
        rows: 100,
        cols: 100,
        model: DataModel::Binomial {
            trials: 100,
            p0: 0.2,
            p1: 0.21,
        },
        shape,
        replicates,
        seed: 1,
        methods,
        roc_points: None,
    };
    println!(
        "{:<5} {:<6} {:>19} {:>19}",
        "p1", "method", "specificity (sd)", "sensitivity (sd)"
    );
    for s in run_sweep(&config, &[0.21, 0.22, 0.23, 0.24, 0.25])? {
        for m in &s.methods {
            println!(
                "{:<5} {:<6} {:>10.4} ({:.4}) {:>10.4} ({:.4})",
                s.alternative,
                m.label,
                m.specificity_mean,
                m.specificity_std,
                m.sensitivity_mean,
                m.sensitivity_std
            );
        }
    }
    Ok(())
}
