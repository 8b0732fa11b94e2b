//! Sparsification protocols: turn a dense ground-truth field into a sparse
//! sample set of a target density.
//!
//! Only pixels whose ground truth is finite in every channel are eligible.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::sparse::{extend_sparse, Sample, SparseField};

/// Fraction of pixels to keep, in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Density(f64);

impl Density {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_finite() && rho > 0.0 && rho <= 1.0 {
            Ok(Self(rho))
        } else {
            Err(Error::Parameter(format!(
                "density must lie in (0, 1], got {rho}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Sampling step `round(1 / sqrt(rho))`, at least 1.
    pub fn step(self) -> usize {
        ((1.0 / self.0.sqrt()).round() as usize).max(1)
    }

    /// `1 / sqrt(rho)`.
    pub fn inverse_root(self) -> f64 {
        1.0 / self.0.sqrt()
    }

    /// Number of sites `ceil(rho * n)`, robust to the rounding of `rho`.
    pub fn count_of(self, n: usize) -> usize {
        let exact = self.0 * n as f64;
        let rounded = exact.round();
        let k = if (exact - rounded).abs() <= 1e-9 * exact.max(1.0) {
            rounded
        } else {
            exact.ceil()
        };
        (k as usize).clamp(1, n)
    }
}

impl FromStr for Density {
    type Err = Error;

    /// Accepts a decimal (`0.04`) or a fraction (`1/9`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parameter(format!("cannot parse density {s:?}"));
        let rho = match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| bad())?;
                let den: f64 = den.trim().parse().map_err(|_| bad())?;
                num / den
            }
            None => s.parse().map_err(|_| bad())?,
        };
        Density::new(rho)
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Top-k pixels by guidance gradient magnitude.
    EdgeThreshold,
    /// Gradient argmax within each square patch.
    PatchMax,
    /// Fixed-stride lattice anchored at the origin.
    RegularGrid,
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edges" | "edge_threshold" | "edge-threshold" => Ok(Self::EdgeThreshold),
            "patchmax" | "patch_max" | "patch-max" => Ok(Self::PatchMax),
            "regular" | "regular_grid" | "regular-grid" => Ok(Self::RegularGrid),
            _ => Err(Error::Parameter(format!("unknown sampling mode {s:?}"))),
        }
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::EdgeThreshold => "edges",
            Self::PatchMax => "patchmax",
            Self::RegularGrid => "regular",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub mode: SamplingMode,
    pub density: Density,
}

impl SamplingSpec {
    pub fn new(mode: SamplingMode, density: Density) -> Self {
        Self { mode, density }
    }

    pub fn sample(&self, gt: &ImageGrid, guidance: &ImageGrid) -> Result<SparseField> {
        match self.mode {
            SamplingMode::EdgeThreshold => sample_edge_threshold(gt, guidance, self.density),
            SamplingMode::PatchMax => sample_patch_max(gt, guidance, self.density),
            SamplingMode::RegularGrid => sample_regular(gt, self.density),
        }
    }
}

/// Magnitude of the guidance gradient over all channels.
///
/// Central differences in the interior, one-sided at the borders, zero
/// along an axis of length one.
pub fn gradient_norm(guidance: &ImageGrid) -> ImageGrid {
    let (w, h, ch) = (guidance.width(), guidance.height(), guidance.channels());
    let diff = |n: usize, i: usize, at: &dyn Fn(usize) -> f64| -> f64 {
        if n == 1 {
            0.0
        } else if i == 0 {
            at(1) - at(0)
        } else if i == n - 1 {
            at(n - 1) - at(n - 2)
        } else {
            (at(i + 1) - at(i - 1)) / 2.0
        }
    };
    ImageGrid::from_fn(w, h, 1, |x, y, _| {
        let mut sq = 0.0;
        for c in 0..ch {
            let dx = diff(w, x, &|i| guidance.get(i, y, c));
            let dy = diff(h, y, &|j| guidance.get(x, j, c));
            sq += dx * dx + dy * dy;
        }
        sq.sqrt()
    })
}

fn finite_at(gt: &ImageGrid, x: usize, y: usize) -> bool {
    gt.pixel(x, y).iter().all(|v| v.is_finite())
}

fn collect(gt: &ImageGrid, sites: impl IntoIterator<Item = (usize, usize)>) -> Result<SparseField> {
    let samples: Vec<Sample> = sites
        .into_iter()
        .map(|(x, y)| Sample::new(x, y, gt.pixel(x, y)))
        .collect();
    extend_sparse(&samples, gt.width(), gt.height(), gt.channels())
}

pub fn sample_edge_threshold(
    gt: &ImageGrid,
    guidance: &ImageGrid,
    density: Density,
) -> Result<SparseField> {
    gt.ensure_same_shape(guidance, "ground truth vs guidance")?;
    let grad = gradient_norm(guidance);
    let w = gt.width();
    let mut order: Vec<usize> = (0..gt.pixel_count())
        .filter(|&i| finite_at(gt, i % w, i / w))
        .collect();
    order.sort_by(|&i, &j| grad.data()[j].total_cmp(&grad.data()[i]).then(i.cmp(&j)));
    order.truncate(density.count_of(gt.pixel_count()));
    order.sort_unstable();
    collect(gt, order.into_iter().map(|i| (i % w, i / w)))
}

pub fn sample_patch_max(
    gt: &ImageGrid,
    guidance: &ImageGrid,
    density: Density,
) -> Result<SparseField> {
    gt.ensure_same_shape(guidance, "ground truth vs guidance")?;
    let grad = gradient_norm(guidance);
    let (w, h) = (gt.width(), gt.height());
    let s = density.step();
    let mut sites = Vec::new();
    for py in (0..h).step_by(s) {
        for px in (0..w).step_by(s) {
            let mut best: Option<(f64, usize, usize)> = None;
            for y in py..(py + s).min(h) {
                for x in px..(px + s).min(w) {
                    if !finite_at(gt, x, y) {
                        continue;
                    }
                    let g = grad.get(x, y, 0);
                    if best.is_none_or(|(b, _, _)| g > b) {
                        best = Some((g, x, y));
                    }
                }
            }
            if let Some((_, x, y)) = best {
                sites.push((x, y));
            }
        }
    }
    collect(gt, sites)
}

pub fn sample_regular(gt: &ImageGrid, density: Density) -> Result<SparseField> {
    let s = density.step();
    let sites = (0..gt.height())
        .step_by(s)
        .flat_map(|y| (0..gt.width()).step_by(s).map(move |x| (x, y)))
        .filter(|&(x, y)| finite_at(gt, x, y));
    collect(gt, sites)
}
