//! File formats.
//!
//! Grids, masks and fields share one CSV layout: a header line
//! `rows,cols[,trials_uniform]` followed by `rows` lines of `cols`
//! comma-separated values. Integral values are written without a decimal
//! point and reals with 17 significant digits, so integer grids round-trip
//! exactly. Masks use `0`/`1`. Images are binary PGM (P5).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Mask, TrialsMap};

/// A grid plus the optional uniform trial count from its header.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub grid: Grid,
    pub trials_uniform: Option<u64>,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into `(1-based column, trimmed field)` pairs.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in line.split(',') {
        let lead = part.len() - part.trim_start().len();
        out.push((start + lead + 1, part.trim()));
        start += part.len() + 1;
    }
    out
}

struct Parsed {
    rows: usize,
    cols: usize,
    extra: Option<u64>,
    values: Vec<f64>,
}

fn parse_table(text: &str, allow_extra: bool) -> Result<Parsed> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(1, 1, "empty file; expected a `rows,cols` header"))?;
    let hf = fields(header);
    let max_fields = if allow_extra { 3 } else { 2 };
    if hf.len() < 2 || hf.len() > max_fields {
        return Err(parse_err(
            hline,
            1,
            if allow_extra {
                "header must be `rows,cols` or `rows,cols,trials_uniform`"
            } else {
                "header must be `rows,cols`"
            },
        ));
    }
    let dim = |(col, s): (usize, &str), what: &str| -> Result<usize> {
        s.parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(|| {
            parse_err(
                hline,
                col,
                format!("{what} must be a positive integer, got '{s}'"),
            )
        })
    };
    let rows = dim(hf[0], "rows")?;
    let cols = dim(hf[1], "cols")?;
    let extra = match hf.get(2) {
        Some(&(col, s)) => Some(s.parse::<u64>().ok().filter(|&v| v > 0).ok_or_else(|| {
            parse_err(
                hline,
                col,
                format!("trials_uniform must be a positive integer, got '{s}'"),
            )
        })?),
        None => None,
    };

    let mut values = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    let mut last_line = hline;
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        last_line = lineno;
        if seen == rows {
            return Err(parse_err(
                lineno,
                1,
                format!("expected {rows} data rows, found more"),
            ));
        }
        let f = fields(line);
        if f.len() != cols {
            return Err(parse_err(
                lineno,
                f.last().map_or(1, |x| x.0),
                format!("expected {cols} values, found {}", f.len()),
            ));
        }
        for (col, s) in f {
            let v: f64 = s
                .parse()
                .map_err(|_| parse_err(lineno, col, format!("'{s}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno, col, format!("'{s}' is not finite")));
            }
            values.push(v);
        }
        seen += 1;
    }
    if seen < rows {
        return Err(parse_err(
            last_line + 1,
            1,
            format!("expected {rows} data rows, found {seen}"),
        ));
    }
    Ok(Parsed {
        rows,
        cols,
        extra,
        values,
    })
}

pub fn parse_grid(text: &str) -> Result<GridFile> {
    let p = parse_table(text, true)?;
    Ok(GridFile {
        grid: Field::new(p.rows, p.cols, p.values)?,
        trials_uniform: p.extra,
    })
}

pub fn read_grid(path: &Path) -> Result<GridFile> {
    parse_grid(&read_text(path)?)
}

fn parse_integral<T>(
    text: &str,
    what: &str,
    convert: impl Fn(f64) -> Option<T>,
) -> Result<Field<T>> {
    let p = parse_table(text, false)?;
    let data = p
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            convert(v).ok_or_else(|| {
                parse_err(
                    i / p.cols + 2,
                    i % p.cols + 1,
                    format!("{what} entry {v} is not allowed"),
                )
            })
        })
        .collect::<Result<Vec<T>>>()?;
    Field::new(p.rows, p.cols, data)
}

pub fn parse_trials(text: &str) -> Result<TrialsMap> {
    let field = parse_integral(text, "trials", |v| {
        (v.fract() == 0.0 && v >= 1.0).then_some(v as u64)
    })?;
    TrialsMap::new(field)
}

pub fn read_trials(path: &Path) -> Result<TrialsMap> {
    parse_trials(&read_text(path)?)
}

pub fn parse_mask(text: &str) -> Result<Mask> {
    parse_integral(text, "mask", |v| match v {
        0.0 => Some(false),
        1.0 => Some(true),
        _ => None,
    })
}

pub fn read_mask(path: &Path) -> Result<Mask> {
    parse_mask(&read_text(path)?)
}

fn push_value(out: &mut String, v: f64) {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        let _ = write!(out, "{}", v as i64);
    } else {
        let _ = write!(out, "{v:.16e}");
    }
}

fn format_table<T>(
    field: &Field<T>,
    extra: Option<u64>,
    mut cell: impl FnMut(&mut String, &T),
) -> String {
    let mut out = String::with_capacity(field.len() * 4 + 32);
    let _ = write!(out, "{},{}", field.rows(), field.cols());
    if let Some(t) = extra {
        let _ = write!(out, ",{t}");
    }
    out.push('\n');
    for r in 0..field.rows() {
        for c in 0..field.cols() {
            if c > 0 {
                out.push(',');
            }
            cell(&mut out, &field[(r, c)]);
        }
        out.push('\n');
    }
    out
}

pub fn format_grid(grid: &Grid, trials_uniform: Option<u64>) -> String {
    format_table(grid, trials_uniform, |out, &v| push_value(out, v))
}

pub fn write_grid(path: &Path, grid: &Grid, trials_uniform: Option<u64>) -> Result<()> {
    write_bytes(path, format_grid(grid, trials_uniform).as_bytes())
}

pub fn format_trials(trials: &TrialsMap) -> String {
    format_table(trials.field(), None, |out, &n| {
        let _ = write!(out, "{n}");
    })
}

pub fn write_trials(path: &Path, trials: &TrialsMap) -> Result<()> {
    write_bytes(path, format_trials(trials).as_bytes())
}

pub fn format_mask(mask: &Mask) -> String {
    format_table(mask, None, |out, &b| out.push(if b { '1' } else { '0' }))
}

pub fn write_mask(path: &Path, mask: &Mask) -> Result<()> {
    write_bytes(path, format_mask(mask).as_bytes())
}

/// Real-valued field (statistic, variability, probability map).
pub fn write_field(path: &Path, field: &Field<f64>) -> Result<()> {
    write_grid(path, field, None)
}

fn pgm(rows: usize, cols: usize, pixels: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(pixels);
    out
}

/// Mask as P5: 255 for detected cells, 0 elsewhere.
pub fn mask_pgm(mask: &Mask) -> Vec<u8> {
    pgm(
        mask.rows(),
        mask.cols(),
        mask.iter().map(|&b| if b { 255 } else { 0 }),
    )
}

/// Map with values in `[0,1]` as P5, `round(255 v)` per cell.
pub fn map_pgm(map: &Field<f64>) -> Vec<u8> {
    pgm(
        map.rows(),
        map.cols(),
        map.iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    )
}

pub fn write_mask_pgm(path: &Path, mask: &Mask) -> Result<()> {
    write_bytes(path, &mask_pgm(mask))
}

pub fn write_map_pgm(path: &Path, map: &Field<f64>) -> Result<()> {
    write_bytes(path, &map_pgm(map))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::internal(format!("JSON encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, to_json(value)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_grid_round_trips() {
        let g = Grid::from_fn(3, 4, |r, c| (r * 10 + c) as f64);
        let text = format_grid(&g, Some(100));
        assert!(text.starts_with("3,4,100\n0,1,2,3\n"));
        let back = parse_grid(&text).unwrap();
        assert_eq!(back.grid, g);
        assert_eq!(back.trials_uniform, Some(100));
    }

    #[test]
    fn reals_round_trip_bitwise() {
        let g = Grid::new(1, 3, vec![0.1, -1.0 / 3.0, 6.02e23]).unwrap();
        let back = parse_grid(&format_grid(&g, None)).unwrap().grid;
        for (a, b) in g.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn short_row_names_the_line() {
        let err = parse_grid("2,3\n1,2,3\n4,5\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e:?}"),
        }
        assert!(err_line(parse_grid("2,2\n1,x\n3,4\n")) == (2, 3));
        assert!(matches!(parse_grid("2,2\n1,2\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_grid(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_grid("0,2\n"), Err(Error::Parse { .. })));
    }

    fn err_line(r: Result<GridFile>) -> (usize, usize) {
        match r {
            Err(Error::Parse { line, column, .. }) => (line, column),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn masks_and_trials() {
        let m = Field::from_fn(2, 3, |r, c| r == c);
        let text = format_mask(&m);
        assert_eq!(text, "2,3\n1,0,0\n0,1,0\n");
        assert_eq!(parse_mask(&text).unwrap(), m);
        assert!(parse_mask("1,2\n0,2\n").is_err());
        let t = parse_trials("1,2\n5,7\n").unwrap();
        assert_eq!(t.field().as_slice(), &[5, 7]);
        assert!(parse_trials("1,2\n0,7\n").is_err());
    }

    #[test]
    fn pgm_layout() {
        let m = Field::from_fn(2, 3, |_, c| c == 1);
        let bytes = mask_pgm(&m);
        assert_eq!(&bytes[..11], b"P5\n3 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 255, 0, 0, 255, 0]);
        let map = Field::new(1, 2, vec![0.5, 1.0]).unwrap();
        assert_eq!(&map_pgm(&map)[11..], &[128, 255]);
    }
}
