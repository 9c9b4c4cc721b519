//! Grid containers, window geometry and exact window aggregation.
//!
//! Every window query is answered from a [`SummedAreaTable`]. Square windows
//! are a single rectangle query; circles are a stack of one-row rectangles.
//! Windows that hang over the grid edge are clipped, and the reported cell
//! count reflects the clipping.

use std::fmt;
use std::ops::{Add, Index, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major 2D field.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Raw observations `Y(s)`: counts for the Binomial/Poisson models, reals for Normal.
pub type Grid = Field<f64>;

/// Boolean field used for detections and ground truth.
pub type Mask = Field<bool>;

impl<T> Field<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "grid dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "grid {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Field { rows, cols, data })
    }

    /// Builds a field by evaluating `f(row, col)` in row-major order.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "field dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Field { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn index_of(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&T> {
        (row < self.rows && col < self.cols).then(|| &self.data[row * self.cols + col])
    }

    pub fn same_shape<U>(&self, other: &Field<U>) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub(crate) fn check_shape<U>(&self, other: &Field<U>, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{what} is {}x{} but the grid is {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )))
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Field<U> {
        Field {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Up to four in-grid orthogonal neighbours of `(row, col)`.
    pub fn neighbours4(&self, row: usize, col: usize) -> impl Iterator<Item = (usize, usize)> {
        let (rows, cols) = (self.rows, self.cols);
        let up = (row > 0).then(|| (row - 1, col));
        let down = (row + 1 < rows).then(|| (row + 1, col));
        let left = (col > 0).then(|| (row, col - 1));
        let right = (col + 1 < cols).then(|| (row, col + 1));
        [up, down, left, right].into_iter().flatten()
    }
}

impl<T> Index<(usize, usize)> for Field<T> {
    type Output = T;

    fn index(&self, (row, col): (usize, usize)) -> &T {
        assert!(
            row < self.rows && col < self.cols,
            "index ({row},{col}) out of bounds"
        );
        &self.data[row * self.cols + col]
    }
}

impl<T> Index<usize> for Field<T> {
    type Output = T;

    fn index(&self, index: usize) -> &T {
        &self.data[index]
    }
}

impl Field<f64> {
    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Whether every value is a whole number exactly representable as `i64`.
    pub fn is_integral(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.fract() == 0.0 && v.abs() < 9.0e15)
    }

    /// Converts to integer counts, rejecting negative or fractional entries.
    pub fn to_counts(&self) -> Result<Field<i64>> {
        let mut out = Vec::with_capacity(self.data.len());
        for (i, &v) in self.data.iter().enumerate() {
            if !(v >= 0.0 && v.fract() == 0.0 && v < 9.0e15) {
                let (r, c) = self.coords(i);
                return Err(Error::invalid(format!(
                    "cell ({r},{c}) holds {v}, expected a nonnegative integer count"
                )));
            }
            out.push(v as i64);
        }
        Ok(Field {
            rows: self.rows,
            cols: self.cols,
            data: out,
        })
    }
}

impl Field<bool> {
    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Field::from_fn(rows, cols, |_, _| false)
    }
}

/// Per-cell Binomial trial counts `N_ij`; every entry is at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialsMap(Field<u64>);

impl TrialsMap {
    pub fn new(field: Field<u64>) -> Result<Self> {
        if let Some(i) = field.iter().position(|&n| n == 0) {
            let (r, c) = field.coords(i);
            return Err(Error::invalid(format!(
                "trials at ({r},{c}) must be at least 1"
            )));
        }
        Ok(TrialsMap(field))
    }

    pub fn uniform(rows: usize, cols: usize, trials: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("trials map dimensions must be positive"));
        }
        TrialsMap::new(Field::from_fn(rows, cols, |_, _| trials))
    }

    pub fn field(&self) -> &Field<u64> {
        &self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    /// The common trial count when every cell shares it.
    pub fn uniform_value(&self) -> Option<u64> {
        let first = self.0[0];
        self.0.iter().all(|&n| n == first).then_some(first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowShape {
    Square,
    Circle,
}

impl fmt::Display for WindowShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowShape::Square => "square",
            WindowShape::Circle => "circle",
        })
    }
}

impl std::str::FromStr for WindowShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(WindowShape::Square),
            "circle" => Ok(WindowShape::Circle),
            other => Err(Error::config(format!(
                "unknown window shape '{other}' (expected square or circle)"
            ))),
        }
    }
}

/// A centred window: all offsets with `max(|di|,|dj|) <= radius` (square)
/// or `di^2 + dj^2 <= radius^2` (circle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowSpec {
    pub shape: WindowShape,
    pub radius: usize,
}

impl WindowSpec {
    pub const fn square(radius: usize) -> Self {
        WindowSpec {
            shape: WindowShape::Square,
            radius,
        }
    }

    pub const fn circle(radius: usize) -> Self {
        WindowSpec {
            shape: WindowShape::Circle,
            radius,
        }
    }

    /// Half-width of the window's row at vertical offset `di`, or `None`
    /// when the row lies outside the window.
    pub fn half_width(&self, di: usize) -> Option<usize> {
        if di > self.radius {
            return None;
        }
        Some(match self.shape {
            WindowShape::Square => self.radius,
            WindowShape::Circle => {
                let r2 = (self.radius * self.radius) as u64;
                (r2 - (di * di) as u64).isqrt() as usize
            }
        })
    }

    pub fn contains(&self, di: isize, dj: isize) -> bool {
        match self.half_width(di.unsigned_abs()) {
            Some(w) => dj.unsigned_abs() <= w,
            None => false,
        }
    }

    /// All offsets covered by the window, row-major.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for di in -r..=r {
            let w = self.half_width(di.unsigned_abs()).unwrap_or(0) as isize;
            for dj in -w..=w {
                out.push((di, dj));
            }
        }
        out
    }

    /// Number of cells covered away from any edge.
    pub fn cell_count(&self) -> usize {
        (0..=self.radius)
            .map(|di| {
                let row = 2 * self.half_width(di).unwrap_or(0) + 1;
                if di == 0 {
                    row
                } else {
                    2 * row
                }
            })
            .sum()
    }

    /// Number of cells covered at `center` after clipping to a `rows x cols` grid.
    pub fn clipped_count(&self, rows: usize, cols: usize, center: (usize, usize)) -> usize {
        let mut count = 0;
        for_each_row_segment(self, rows, cols, center, |_, c0, c1| count += c1 - c0 + 1);
        count
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.shape, self.radius)
    }
}

/// Calls `f(row, col_start, col_end)` (inclusive) for every clipped row of the window.
fn for_each_row_segment(
    window: &WindowSpec,
    rows: usize,
    cols: usize,
    (row, col): (usize, usize),
    mut f: impl FnMut(usize, usize, usize),
) {
    let r = window.radius;
    let lo = row.saturating_sub(r);
    let hi = (row + r).min(rows - 1);
    for rr in lo..=hi {
        let w = window.half_width(rr.abs_diff(row)).unwrap_or(0);
        let c0 = col.saturating_sub(w);
        let c1 = (col + w).min(cols - 1);
        f(rr, c0, c1);
    }
}

/// Nested window sequence `D_1 ⊂ D_2 ⊂ ... ⊂ D_M` applied at every pixel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<WindowSpec>", into = "Vec<WindowSpec>")]
pub struct ScaleLadder {
    windows: Vec<WindowSpec>,
}

impl ScaleLadder {
    pub fn new(windows: Vec<WindowSpec>) -> Result<Self> {
        let Some(first) = windows.first() else {
            return Err(Error::config("scale ladder needs at least one window"));
        };
        if first.radius != 0 {
            return Err(Error::config("the first scale must have radius 0"));
        }
        for pair in windows.windows(2) {
            let (inner, outer) = (pair[0], pair[1]);
            if outer.radius <= inner.radius {
                return Err(Error::config(format!(
                    "scale radii must be strictly increasing ({inner} then {outer})"
                )));
            }
            if inner
                .offsets()
                .iter()
                .any(|&(di, dj)| !outer.contains(di, dj))
            {
                return Err(Error::config(format!(
                    "window {inner} is not nested in {outer}"
                )));
            }
        }
        Ok(ScaleLadder { windows })
    }

    /// Same-shape windows at the given radii.
    pub fn from_radii(shape: WindowShape, radii: &[usize]) -> Result<Self> {
        ScaleLadder::new(
            radii
                .iter()
                .map(|&radius| WindowSpec { shape, radius })
                .collect(),
        )
    }

    /// `scale_count` radii spread evenly over `0..=max_radius` (rounded).
    pub fn evenly_spaced(
        shape: WindowShape,
        max_radius: usize,
        scale_count: usize,
    ) -> Result<Self> {
        if scale_count < 2 {
            return Err(Error::config(
                "evenly spaced ladders need at least two scales",
            ));
        }
        let radii: Vec<usize> = (0..scale_count)
            .map(|k| (k as f64 * max_radius as f64 / (scale_count - 1) as f64).round() as usize)
            .collect();
        ScaleLadder::from_radii(shape, &radii)
    }

    /// The default ladder: the pixel itself and an 11x11 square.
    pub fn two_scale() -> Self {
        ScaleLadder {
            windows: vec![WindowSpec::square(0), WindowSpec::square(5)],
        }
    }

    /// Five square scales sharing the default maximum radius 5: radii 0, 1, 3, 4, 5.
    pub fn five_scale() -> Self {
        ScaleLadder::evenly_spaced(WindowShape::Square, 5, 5).expect("valid ladder")
    }

    pub fn single_scale() -> Self {
        ScaleLadder {
            windows: vec![WindowSpec::square(0)],
        }
    }

    pub fn windows(&self) -> &[WindowSpec] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn max_radius(&self) -> usize {
        self.windows.last().map_or(0, |w| w.radius)
    }

    /// Offsets of each annulus `D_r \ D_{r-1}` (`D_1` itself for the first scale).
    pub fn annulus_offsets(&self) -> Vec<Vec<(isize, isize)>> {
        let mut out = Vec::with_capacity(self.windows.len());
        for (k, w) in self.windows.iter().enumerate() {
            let ring = w
                .offsets()
                .into_iter()
                .filter(|&(di, dj)| k == 0 || !self.windows[k - 1].contains(di, dj))
                .collect();
            out.push(ring);
        }
        out
    }
}

impl TryFrom<Vec<WindowSpec>> for ScaleLadder {
    type Error = Error;

    fn try_from(windows: Vec<WindowSpec>) -> Result<Self> {
        ScaleLadder::new(windows)
    }
}

impl From<ScaleLadder> for Vec<WindowSpec> {
    fn from(ladder: ScaleLadder) -> Self {
        ladder.windows
    }
}

impl fmt::Display for ScaleLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.windows.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Element type a summed-area table can accumulate.
pub trait SatValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + PartialEq {
    /// Writes the running sums of `row` into `out`.
    fn running_sums(row: &[Self], out: &mut [Self]);

    fn to_f64(self) -> f64;
}

impl SatValue for i64 {
    fn running_sums(row: &[i64], out: &mut [i64]) {
        let mut acc = 0i64;
        for (o, &v) in out.iter_mut().zip(row) {
            acc += v;
            *o = acc;
        }
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl SatValue for f64 {
    // Kahan-compensated so long rows do not drift.
    fn running_sums(row: &[f64], out: &mut [f64]) {
        let mut acc = 0.0f64;
        let mut comp = 0.0f64;
        for (o, &v) in out.iter_mut().zip(row) {
            let y = v - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            *o = acc;
        }
    }

    fn to_f64(self) -> f64 {
        self
    }
}

/// `(rows+1) x (cols+1)` prefix sums; entry `(r, c)` holds the sum of all
/// cells strictly above and to the left.
#[derive(Debug, Clone, PartialEq)]
pub struct SummedAreaTable<T> {
    rows: usize,
    cols: usize,
    table: Vec<T>,
}

impl<T: SatValue> SummedAreaTable<T> {
    pub fn new(field: &Field<T>) -> Self {
        let (rows, cols) = field.shape();
        let stride = cols + 1;
        let mut table = vec![T::default(); (rows + 1) * stride];
        let mut running = vec![T::default(); cols];
        for r in 0..rows {
            T::running_sums(&field.as_slice()[r * cols..(r + 1) * cols], &mut running);
            let (above, below) = table.split_at_mut((r + 1) * stride);
            let above = &above[r * stride..];
            let current = &mut below[..stride];
            for c in 0..cols {
                current[c + 1] = above[c + 1] + running[c];
            }
        }
        SummedAreaTable { rows, cols, table }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Sum over the inclusive rectangle `[r0, r1] x [c0, c1]`.
    #[inline]
    pub fn rect_sum(&self, r0: usize, c0: usize, r1: usize, c1: usize) -> T {
        debug_assert!(r0 <= r1 && c0 <= c1 && r1 < self.rows && c1 < self.cols);
        let s = self.cols + 1;
        let t = &self.table;
        t[(r1 + 1) * s + c1 + 1] - t[r0 * s + c1 + 1] - t[(r1 + 1) * s + c0] + t[r0 * s + c0]
    }

    pub fn total(&self) -> T {
        self.rect_sum(0, 0, self.rows - 1, self.cols - 1)
    }

    /// Sum and clipped cell count of `window` centred at `center`.
    pub fn window_sum(&self, center: (usize, usize), window: &WindowSpec) -> Result<(T, usize)> {
        if center.0 >= self.rows || center.1 >= self.cols {
            return Err(Error::invalid(format!(
                "center ({},{}) outside {}x{} grid",
                center.0, center.1, self.rows, self.cols
            )));
        }
        Ok(self.window_sum_unchecked(center, window))
    }

    pub(crate) fn window_sum_unchecked(
        &self,
        center: (usize, usize),
        window: &WindowSpec,
    ) -> (T, usize) {
        if window.shape == WindowShape::Square || window.radius == 0 {
            let r = window.radius;
            let (r0, c0) = (center.0.saturating_sub(r), center.1.saturating_sub(r));
            let r1 = (center.0 + r).min(self.rows - 1);
            let c1 = (center.1 + r).min(self.cols - 1);
            return (self.rect_sum(r0, c0, r1, c1), (r1 - r0 + 1) * (c1 - c0 + 1));
        }
        let mut sum = T::default();
        let mut count = 0;
        for_each_row_segment(window, self.rows, self.cols, center, |row, c0, c1| {
            sum = sum + self.rect_sum(row, c0, row, c1);
            count += c1 - c0 + 1;
        });
        (sum, count)
    }
}

/// Per-pixel aggregation vectors `(x_1..x_M)`, clipped cardinalities
/// `(m_1..m_M)` and, for Binomial data, window trial totals `(N_1..N_M)`.
#[derive(Debug, Clone)]
pub struct Aggregation {
    rows: usize,
    cols: usize,
    scale_count: usize,
    sums: Vec<f64>,
    counts: Vec<u32>,
    trials: Option<Vec<f64>>,
}

impl Aggregation {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn scale_count(&self) -> usize {
        self.scale_count
    }

    /// `x_1..x_M` at the pixel with row-major index `pixel`.
    pub fn sums(&self, pixel: usize) -> &[f64] {
        &self.sums[pixel * self.scale_count..(pixel + 1) * self.scale_count]
    }

    pub fn counts(&self, pixel: usize) -> &[u32] {
        &self.counts[pixel * self.scale_count..(pixel + 1) * self.scale_count]
    }

    pub fn trials(&self, pixel: usize) -> Option<&[f64]> {
        self.trials
            .as_ref()
            .map(|t| &t[pixel * self.scale_count..(pixel + 1) * self.scale_count])
    }
}

fn window_sums_into<T: SatValue>(
    sat: &SummedAreaTable<T>,
    ladder: &ScaleLadder,
    sums: &mut [f64],
    counts: Option<&mut [u32]>,
) {
    let m = ladder.len();
    let mut counts = counts;
    for r in 0..sat.rows() {
        for c in 0..sat.cols() {
            let pixel = r * sat.cols() + c;
            for (k, w) in ladder.windows().iter().enumerate() {
                let (s, n) = sat.window_sum_unchecked((r, c), w);
                sums[pixel * m + k] = s.to_f64();
                if let Some(counts) = counts.as_deref_mut() {
                    counts[pixel * m + k] = n as u32;
                }
            }
        }
    }
}

/// Aggregates `grid` (and optionally its trials) over every ladder window at every pixel.
///
/// Integral grids accumulate in `i64`, so sums are exact; anything else
/// uses compensated `f64` accumulation.
pub fn aggregate_scales(
    grid: &Grid,
    ladder: &ScaleLadder,
    trials: Option<&TrialsMap>,
) -> Result<Aggregation> {
    if let Some(t) = trials {
        grid.check_shape(t.field(), "trials map")?;
    }
    let (rows, cols) = grid.shape();
    let m = ladder.len();
    let mut sums = vec![0.0; rows * cols * m];
    let mut counts = vec![0u32; rows * cols * m];
    if grid.is_integral() {
        let sat = SummedAreaTable::new(&grid.map(|&v| v as i64));
        window_sums_into(&sat, ladder, &mut sums, Some(&mut counts));
    } else {
        let sat = SummedAreaTable::new(grid);
        window_sums_into(&sat, ladder, &mut sums, Some(&mut counts));
    }
    let trials = trials.map(|t| {
        let sat = SummedAreaTable::new(&t.field().map(|&n| n as i64));
        let mut out = vec![0.0; rows * cols * m];
        window_sums_into(&sat, ladder, &mut out, None);
        out
    });
    Ok(Aggregation {
        rows,
        cols,
        scale_count: m,
        sums,
        counts,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(rows: usize, cols: usize) -> Field<i64> {
        Field::from_fn(rows, cols, |_, _| 1)
    }

    #[test]
    fn rejects_empty_and_mismatched_grids() {
        assert!(matches!(
            Grid::new(0, 0, vec![]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            Grid::new(2, 2, vec![1.0; 3]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn constant_grid_full_sum() {
        let sat = SummedAreaTable::new(&ones(3, 3));
        assert_eq!(sat.total(), 9);
        let single = SummedAreaTable::new(&Field::new(1, 1, vec![5i64]).unwrap());
        assert_eq!(single.total(), 5);
    }

    #[test]
    fn square_window_clips_at_corner() {
        let sat = SummedAreaTable::new(&ones(3, 3));
        assert_eq!(
            sat.window_sum((1, 1), &WindowSpec::square(1)).unwrap(),
            (9, 9)
        );
        assert_eq!(
            sat.window_sum((0, 0), &WindowSpec::square(1)).unwrap(),
            (4, 4)
        );
        assert!(sat.window_sum((3, 0), &WindowSpec::square(1)).is_err());
    }

    #[test]
    fn circle_cell_counts() {
        let sat = SummedAreaTable::new(&ones(30, 30));
        assert_eq!(
            sat.window_sum((15, 15), &WindowSpec::circle(5)).unwrap(),
            (81, 81)
        );
        assert_eq!(
            sat.window_sum((15, 15), &WindowSpec::circle(1)).unwrap(),
            (5, 5)
        );
        assert_eq!(WindowSpec::circle(5).cell_count(), 81);
        assert_eq!(WindowSpec::square(5).cell_count(), 121);
    }

    #[test]
    fn radius_zero_is_the_center_cell() {
        for w in [WindowSpec::square(0), WindowSpec::circle(0)] {
            assert_eq!(w.offsets(), vec![(0, 0)]);
        }
        let mut cross = WindowSpec::circle(1).offsets();
        cross.sort();
        assert_eq!(cross, vec![(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn ladder_validation() {
        assert!(ScaleLadder::new(vec![]).is_err());
        assert!(ScaleLadder::from_radii(WindowShape::Square, &[1, 2]).is_err());
        assert!(ScaleLadder::from_radii(WindowShape::Square, &[0, 2, 2]).is_err());
        // a radius-2 circle does not contain the radius-2 square's corners
        assert!(ScaleLadder::new(vec![
            WindowSpec::square(0),
            WindowSpec::square(2),
            WindowSpec::circle(2)
        ])
        .is_err());
        assert!(ScaleLadder::new(vec![
            WindowSpec::square(0),
            WindowSpec::circle(2),
            WindowSpec::square(4)
        ])
        .is_ok());
        let five = ScaleLadder::five_scale();
        let radii: Vec<usize> = five.windows().iter().map(|w| w.radius).collect();
        assert_eq!(radii, vec![0, 1, 3, 4, 5]);
    }

    #[test]
    fn annulus_offsets_partition_the_outer_window() {
        let ladder = ScaleLadder::new(vec![
            WindowSpec::square(0),
            WindowSpec::circle(2),
            WindowSpec::square(4),
        ])
        .unwrap();
        let rings = ladder.annulus_offsets();
        let total: usize = rings.iter().map(Vec::len).sum();
        assert_eq!(total, 81);
        assert_eq!(rings[0], vec![(0, 0)]);
        assert_eq!(rings[1].len(), 13 - 1);
    }

    #[test]
    fn constant_field_aggregation() {
        let c = 3.0;
        let grid = Grid::from_fn(20, 20, |_, _| c);
        let agg = aggregate_scales(&grid, &ScaleLadder::two_scale(), None).unwrap();
        let p = grid.index_of(10, 10);
        assert_eq!(agg.sums(p), &[c, 121.0 * c]);
        assert_eq!(agg.counts(p), &[1, 121]);
        assert_eq!(agg.counts(0), &[1, 36]);
    }

    #[test]
    fn aggregation_rejects_shape_mismatch() {
        let grid = Grid::from_fn(4, 4, |_, _| 1.0);
        let trials = TrialsMap::uniform(4, 5, 10).unwrap();
        assert!(aggregate_scales(&grid, &ScaleLadder::two_scale(), Some(&trials)).is_err());
    }

    #[test]
    fn clipping_consistency() {
        // sum of clipped counts over pixels equals the number of (window, cell) incidences
        let (rows, cols) = (9, 13);
        let w = WindowSpec::circle(3);
        let total: usize = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|p| w.clipped_count(rows, cols, p))
            .sum();
        let mut coverage = 0;
        for r in 0..rows as isize {
            for c in 0..cols as isize {
                for (di, dj) in w.offsets() {
                    let (rr, cc) = (r - di, c - dj);
                    if rr >= 0 && cc >= 0 && rr < rows as isize && cc < cols as isize {
                        coverage += 1;
                    }
                }
            }
        }
        assert_eq!(total, coverage);
    }
}
