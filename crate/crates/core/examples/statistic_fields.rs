//! The multiscale statistic for each observation family on one small grid
//! with a raised block in the middle.
//!
//! cargo run --example statistic_fields

use mcd::grid::Field;
use mcd::stat::{stat_binomial, stat_normal, stat_poisson};
use mcd::{Grid, ScaleLadder, StatField, TrialsMap};

fn show(name: &str, f: &StatField) {
    let t = f.values();
    let (lo, hi) = t.min_max();
    println!(
        "{name:<9} null {:>8.4}  T range [{lo:>8.3}, {hi:>8.3}]  centre {:>8.3}  corner {:>6.3}",
        f.null_estimate(),
        t[(10, 10)],
        t[(0, 0)]
    );
}

fn main() -> mcd::Result<()> {
    let ladder = ScaleLadder::from_radii(mcd::WindowShape::Square, &[0, 2])?;
    let inside = |r: usize, c: usize| (7..14).contains(&r) && (7..14).contains(&c);
    // deterministic texture so the example needs no RNG
    let wobble = |r: usize, c: usize| ((r * 7 + c * 3) % 5) as f64;

    let counts: Grid = Field::from_fn(
        21,
        21,
        |r, c| if inside(r, c) { 30.0 } else { 18.0 } + wobble(r, c),
    );
    show(
        "binomial",
        &stat_binomial(&counts, &TrialsMap::uniform(21, 21, 100)?, &ladder)?,
    );

    let rates: Grid = Field::from_fn(
        21,
        21,
        |r, c| if inside(r, c) { 9.0 } else { 3.0 } + wobble(r, c),
    );
    show("poisson", &stat_poisson(&rates, &ladder)?);

    let levels: Grid = Field::from_fn(
        21,
        21,
        |r, c| if inside(r, c) { 2.0 } else { 0.0 } + wobble(r, c) / 5.0,
    );
    show("normal", &stat_normal(&levels, &ladder, Some(0.5))?);
    Ok(())
}
