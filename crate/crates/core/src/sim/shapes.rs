//! Signal-region generators.
//!
//! Geometry is expressed relative to the grid centre and rasterised by
//! testing cell centres, so the default shapes sit in the middle of any
//! grid large enough to hold them. On a 100x100 grid the defaults cover
//! 400 (L), 1148 (oval), 864 (triangle) and 1340 (Y) cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Mask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    /// Vertical bar with a foot extending right from its lower end.
    LShape {
        bar_width: usize,
        bar_height: usize,
        foot_width: usize,
        foot_height: usize,
    },
    /// Filled axis-aligned ellipse.
    Oval {
        semi_rows: f64,
        semi_cols: f64,
    },
    /// Isosceles triangle, apex up, centred vertically.
    Triangle {
        base: f64,
        height: f64,
    },
    /// Stem pointing down from the centre plus two arms at 45 degrees up-left and up-right.
    YShape {
        width: f64,
        stem: f64,
        arm: f64,
    },
    Disc {
        radius: f64,
    },
    #[serde(skip)]
    Custom(Mask),
}

impl ShapeKind {
    pub fn l_shape() -> Self {
        ShapeKind::LShape {
            bar_width: 10,
            bar_height: 30,
            foot_width: 10,
            foot_height: 10,
        }
    }

    pub fn oval() -> Self {
        ShapeKind::Oval {
            semi_rows: 17.0,
            semi_cols: 21.5,
        }
    }

    pub fn triangle() -> Self {
        ShapeKind::Triangle {
            base: 48.0,
            height: 36.0,
        }
    }

    pub fn y_shape() -> Self {
        ShapeKind::YShape {
            width: 12.0,
            stem: 41.0,
            arm: 39.0,
        }
    }

    pub fn disc(radius: f64) -> Self {
        ShapeKind::Disc { radius }
    }

    /// Parses `l`, `oval`, `triangle`, `y` or `disc[:radius]`.
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h.to_string(), Some(a.to_string())),
            None => (lower.clone(), None),
        };
        match (head.as_str(), arg) {
            ("l" | "lshape" | "l_shape" | "l-shape", None) => Ok(ShapeKind::l_shape()),
            ("oval", None) => Ok(ShapeKind::oval()),
            ("triangle", None) => Ok(ShapeKind::triangle()),
            ("y" | "yshape" | "y_shape" | "y-shape", None) => Ok(ShapeKind::y_shape()),
            ("disc", None) => Ok(ShapeKind::disc(20.0)),
            ("disc", Some(r)) => r
                .parse::<f64>()
                .ok()
                .filter(|r| *r > 0.0)
                .map(ShapeKind::disc)
                .ok_or_else(|| Error::config(format!("bad disc radius '{r}'"))),
            _ => Err(Error::config(format!(
                "unknown shape '{name}' (expected l, oval, triangle, y or disc[:radius])"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ShapeKind::LShape { .. } => "l".into(),
            ShapeKind::Oval { .. } => "oval".into(),
            ShapeKind::Triangle { .. } => "triangle".into(),
            ShapeKind::YShape { .. } => "y".into(),
            ShapeKind::Disc { radius } => format!("disc:{radius}"),
            ShapeKind::Custom(_) => "custom".into(),
        }
    }

    /// Extent `(top, bottom, left, right)` relative to the grid centre.
    fn extent(&self) -> (f64, f64, f64, f64) {
        match *self {
            ShapeKind::LShape {
                bar_width,
                bar_height,
                foot_width,
                ..
            } => {
                let (h, w) = (bar_height as f64, (bar_width + foot_width) as f64);
                (-h / 2.0, h / 2.0, -w / 2.0, w / 2.0)
            }
            ShapeKind::Oval {
                semi_rows,
                semi_cols,
            } => (-semi_rows, semi_rows, -semi_cols, semi_cols),
            ShapeKind::Triangle { base, height } => {
                (-height / 2.0, height / 2.0, -base / 2.0, base / 2.0)
            }
            ShapeKind::YShape { width, stem, arm } => {
                let reach = arm * std::f64::consts::FRAC_1_SQRT_2 + width / 2.0;
                (-reach, stem + width / 2.0, -reach, reach)
            }
            ShapeKind::Disc { radius } => (-radius, radius, -radius, radius),
            ShapeKind::Custom(_) => (0.0, 0.0, 0.0, 0.0),
        }
    }

    /// Whether the point `(y, x)`, relative to the grid centre, lies in the shape.
    fn contains(&self, y: f64, x: f64) -> bool {
        match *self {
            ShapeKind::LShape {
                bar_width,
                bar_height,
                foot_width,
                foot_height,
            } => {
                let (top, _, left, _) = self.extent();
                let (bh, bw) = (bar_height as f64, bar_width as f64);
                let in_bar = y >= top && y < top + bh && x >= left && x < left + bw;
                let foot_top = top + bh - foot_height as f64;
                let in_foot = y >= foot_top
                    && y < top + bh
                    && x >= left + bw
                    && x < left + bw + foot_width as f64;
                in_bar || in_foot
            }
            ShapeKind::Oval {
                semi_rows,
                semi_cols,
            } => (y / semi_rows).powi(2) + (x / semi_cols).powi(2) <= 1.0,
            ShapeKind::Triangle { base, height } => {
                let apex = -height / 2.0;
                let depth = y - apex;
                depth >= 0.0 && depth <= height && x.abs() * height <= (base / 2.0) * depth
            }
            ShapeKind::YShape { width, stem, arm } => {
                let d = std::f64::consts::FRAC_1_SQRT_2;
                in_bar((y, x), (1.0, 0.0), stem, width)
                    || in_bar((y, x), (-d, -d), arm, width)
                    || in_bar((y, x), (-d, d), arm, width)
            }
            ShapeKind::Disc { radius } => y * y + x * x <= radius * radius,
            ShapeKind::Custom(_) => false,
        }
    }
}

/// Whether `p` lies in the bar of the given width running `length` from the
/// origin along unit direction `dir`.
fn in_bar(p: (f64, f64), dir: (f64, f64), length: f64, width: f64) -> bool {
    let along = p.0 * dir.0 + p.1 * dir.1;
    let across = (-p.0 * dir.1 + p.1 * dir.0).abs();
    (0.0..=length).contains(&along) && across <= width / 2.0
}

/// Rasterises `kind` on a `rows x cols` grid.
pub fn gen_shape(kind: &ShapeKind, rows: usize, cols: usize) -> Result<Mask> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid dimensions must be positive"));
    }
    if let ShapeKind::Custom(mask) = kind {
        if mask.shape() != (rows, cols) {
            return Err(Error::invalid(format!(
                "custom mask is {}x{} but the grid is {rows}x{cols}",
                mask.rows(),
                mask.cols()
            )));
        }
        return Ok(mask.clone());
    }
    let (top, bottom, left, right) = kind.extent();
    let (cy, cx) = (rows as f64 / 2.0, cols as f64 / 2.0);
    if top < -cy || bottom > cy || left < -cx || right > cx {
        return Err(Error::invalid(format!(
            "shape {} does not fit in a {rows}x{cols} grid",
            kind.name()
        )));
    }
    Ok(Field::from_fn(rows, cols, |r, c| {
        kind.contains(r as f64 + 0.5 - cy, c as f64 + 0.5 - cx)
    }))
}
