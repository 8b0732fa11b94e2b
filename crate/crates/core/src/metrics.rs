//! Error metrics for dense estimates against ground truth.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rmse,
    Epe,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rmse" => Ok(Metric::Rmse),
            "epe" => Ok(Metric::Epe),
            _ => Err(Error::Parameter(format!("unknown metric {s:?}"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Rmse => "rmse",
            Metric::Epe => "epe",
        })
    }
}

/// Which pixels a reported value was averaged over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    /// Every pixel with finite ground truth.
    All,
    /// Pixels that carried a sample.
    Known,
    /// Pixels that did not carry a sample.
    Unknown,
    /// A mask read from a file.
    External,
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskKind::All => "all",
            MaskKind::Known => "known",
            MaskKind::Unknown => "unknown",
            MaskKind::External => "external-mask",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metric: Metric,
    pub value: f64,
    pub mask: MaskKind,
    /// Fraction of known pixels in the input, in `(0, 1]`.
    pub density: f64,
    /// Seconds spent producing the reported value.
    pub elapsed: f64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "metric,value,mask,elapsed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.metric, self.value, self.mask, self.elapsed
        )
    }
}

/// Pixels that count: mask set (if any) and ground truth finite.
fn selected<'a>(
    gt: &'a ImageGrid,
    mask: Option<&'a ImageGrid>,
) -> impl Iterator<Item = usize> + 'a {
    let ch = gt.channels();
    (0..gt.pixel_count()).filter(move |&i| {
        mask.is_none_or(|m| m.data()[i] != 0.0)
            && gt.data()[i * ch..(i + 1) * ch]
                .iter()
                .all(|v| v.is_finite())
    })
}

fn check_inputs(
    estimate: &ImageGrid,
    gt: &ImageGrid,
    mask: Option<&ImageGrid>,
    channels: usize,
) -> Result<()> {
    estimate.ensure_same_shape(gt, "estimate vs ground truth")?;
    for (what, g) in [("estimate", estimate), ("ground truth", gt)] {
        if g.channels() != channels {
            return Err(Error::Channels {
                what,
                got: g.channels(),
            });
        }
    }
    if let Some(m) = mask {
        m.ensure_same_shape(gt, "mask vs ground truth")?;
        if m.channels() != 1 {
            return Err(Error::Channels {
                what: "mask",
                got: m.channels(),
            });
        }
        if m.data().iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Parameter("mask entries must be 0 or 1".into()));
        }
    }
    Ok(())
}

/// Root-mean-squared error of a single-channel estimate.
pub fn rmse(estimate: &ImageGrid, gt: &ImageGrid, mask: Option<&ImageGrid>) -> Result<f64> {
    check_inputs(estimate, gt, mask, 1)?;
    let (mut sum, mut n) = (0.0, 0usize);
    for i in selected(gt, mask) {
        let d = estimate.data()[i] - gt.data()[i];
        sum += d * d;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok((sum / n as f64).sqrt())
}

/// Average endpoint error of a two-channel flow estimate.
pub fn epe(estimate: &ImageGrid, gt: &ImageGrid, mask: Option<&ImageGrid>) -> Result<f64> {
    check_inputs(estimate, gt, mask, 2)?;
    let (e, g) = (estimate.data(), gt.data());
    let (mut sum, mut n) = (0.0, 0usize);
    for i in selected(gt, mask) {
        sum += (e[2 * i] - g[2 * i]).hypot(e[2 * i + 1] - g[2 * i + 1]);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sum / n as f64)
}

pub fn evaluate(
    metric: Metric,
    estimate: &ImageGrid,
    gt: &ImageGrid,
    mask: Option<&ImageGrid>,
) -> Result<f64> {
    match metric {
        Metric::Rmse => rmse(estimate, gt, mask),
        Metric::Epe => epe(estimate, gt, mask),
    }
}
