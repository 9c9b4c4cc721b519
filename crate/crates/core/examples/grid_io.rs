//! Writes a simulated Binomial grid, its trials and truth mask as CSV,
//! reads them back and checks the round trip.
//!
//! cargo run --example grid_io -- [output-dir]
//!
//! With `crates/core/fixtures` as the directory this regenerates the
//! bundled example grid used by the README and the CLI tests.

use std::path::PathBuf;

use mcd::io;
use mcd::sim::{simulate_grid, DataModel, ShapeKind};

fn main() -> mcd::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mcd-grid-io"));
    let model = DataModel::Binomial {
        trials: 100,
        p0: 0.2,
        p1: 0.3,
    };
    let data = simulate_grid(&model, &ShapeKind::disc(12.0), 60, 60, 2024, 0)?;

    let grid_path = dir.join("disc_grid.csv");
    let truth_path = dir.join("disc_truth.csv");
    io::write_grid(&grid_path, &data.grid, Some(100))?;
    io::write_mask(&truth_path, &data.truth)?;
    io::write_mask_pgm(&dir.join("disc_truth.pgm"), &data.truth)?;

    let back = io::read_grid(&grid_path)?;
    assert_eq!(back.grid, data.grid);
    assert_eq!(back.trials_uniform, Some(100));
    assert_eq!(io::read_mask(&truth_path)?, data.truth);
    println!(
        "wrote {}x{} grid with {} signal cells to {}",
        data.grid.rows(),
        data.grid.cols(),
        data.truth.count_true(),
        dir.display()
    );
    Ok(())
}
