//! Flat key-value run configuration.
//!
//! Every key is optional and unknown keys are rejected. Command-line flags
//! are merged on top with [`RunConfig::merge`], so flags win.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ScaleLadder, WindowShape};
use crate::sim::ShapeKind;
use crate::stat::Family;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // model
    pub family: Option<Family>,
    pub trials: Option<u64>,
    pub sigma: Option<f64>,
    pub continuity_offset: Option<bool>,
    // statistic
    pub ladder: Option<String>,
    pub window_shape: Option<WindowShape>,
    pub threshold_count: Option<usize>,
    // baselines
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub null: Option<f64>,
    pub radii: Option<String>,
    pub mc_reps: Option<usize>,
    pub cluster_alpha: Option<f64>,
    // simulation
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub shape: Option<String>,
    pub alternatives: Option<Vec<f64>>,
    pub replicates: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub roc_points: Option<usize>,
    // theorems
    pub delta: Option<f64>,
    // run
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub trials_file: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )*
    };
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((1, 1));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&crate::io::read_text(path)?)
    }

    /// Overlays every key set in `other`.
    pub fn merge(mut self, other: RunConfig) -> Self {
        overlay!(
            self,
            other,
            family,
            trials,
            sigma,
            continuity_offset,
            ladder,
            window_shape,
            threshold_count,
            alpha,
            lambda,
            null,
            radii,
            mc_reps,
            cluster_alpha,
            rows,
            cols,
            shape,
            alternatives,
            replicates,
            methods,
            roc_points,
            delta,
            seed,
            input,
            trials_file,
            output,
        );
        self
    }

    pub fn scale_ladder(&self) -> Result<ScaleLadder> {
        parse_ladder(
            self.ladder.as_deref().unwrap_or("two"),
            self.window_shape.unwrap_or(WindowShape::Square),
        )
    }

    pub fn radius_list(&self) -> Result<Option<Vec<usize>>> {
        self.radii.as_deref().map(parse_radii).transpose()
    }

    pub fn shape_kind(&self) -> Result<ShapeKind> {
        ShapeKind::from_name(self.shape.as_deref().unwrap_or("l"))
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// `two`, `five`, `single`, or explicit radii such as `0,2,5`.
pub fn parse_ladder(spec: &str, shape: WindowShape) -> Result<ScaleLadder> {
    match spec.trim() {
        "two" => ScaleLadder::from_radii(shape, &[0, 5]),
        "five" => ScaleLadder::evenly_spaced(shape, 5, 5),
        "single" => ScaleLadder::from_radii(shape, &[0]),
        other => ScaleLadder::from_radii(shape, &parse_radii(other)?),
    }
}

/// Comma-separated radii and inclusive ranges, e.g. `1-20` or `0,2,5`.
pub fn parse_radii(spec: &str) -> Result<Vec<usize>> {
    let bad = |s: &str| Error::config(format!("bad radius list '{spec}' near '{s}'"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (
                    a.trim().parse().map_err(|_| bad(part))?,
                    b.trim().parse().map_err(|_| bad(part))?,
                );
                if a > b {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if out.is_empty() {
        return Err(Error::config("empty radius list"));
    }
    Ok(out)
}
