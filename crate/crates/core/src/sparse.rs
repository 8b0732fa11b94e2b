//! Sparse samples embedded in a dense raster with a binary confidence map.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, Pixel};

/// One known value at a pixel site.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: usize,
    pub y: usize,
    pub value: Vec<f64>,
}

impl Sample {
    pub fn new(x: usize, y: usize, value: impl Into<Vec<f64>>) -> Self {
        Self {
            x,
            y,
            value: value.into(),
        }
    }

    pub fn pixel(&self) -> Pixel {
        Pixel::new(self.x, self.y)
    }
}

/// Known values extended to the full grid.
///
/// `values` holds the sample where `confidence` is 1 and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseField {
    values: ImageGrid,
    confidence: ImageGrid,
}

impl SparseField {
    /// Wraps a value raster and a confidence raster after checking that
    /// they agree in shape, confidence is binary and values vanish wherever
    /// confidence is zero.
    pub fn from_parts(values: ImageGrid, confidence: ImageGrid) -> Result<Self> {
        values.ensure_same_shape(&confidence, "values vs confidence")?;
        if confidence.channels() != 1 {
            return Err(Error::Channels {
                what: "confidence",
                got: confidence.channels(),
            });
        }
        let ch = values.channels();
        for (i, &c) in confidence.data().iter().enumerate() {
            let px = &values.data()[i * ch..(i + 1) * ch];
            if c == 1.0 {
                if px.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("sparse sample values"));
                }
            } else if c == 0.0 {
                if px.iter().any(|&v| v != 0.0) {
                    return Err(Error::Dimension(format!(
                        "pixel {} has zero confidence but a non-zero value",
                        i
                    )));
                }
            } else {
                return Err(Error::Parameter(format!(
                    "confidence must be 0 or 1, got {c} at pixel {i}"
                )));
            }
        }
        Ok(Self { values, confidence })
    }

    pub fn values(&self) -> &ImageGrid {
        &self.values
    }

    pub fn confidence(&self) -> &ImageGrid {
        &self.confidence
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn channels(&self) -> usize {
        self.values.channels()
    }

    #[inline]
    pub fn is_known(&self, x: usize, y: usize) -> bool {
        self.confidence.get(x, y, 0) == 1.0
    }

    pub fn known_count(&self) -> usize {
        self.confidence.data().iter().filter(|&&c| c == 1.0).count()
    }

    /// Fraction of pixels that carry a sample.
    pub fn density(&self) -> f64 {
        self.known_count() as f64 / self.values.pixel_count() as f64
    }

    /// Known samples in raster order.
    pub fn samples(&self) -> Vec<Sample> {
        let w = self.width();
        self.confidence
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1.0)
            .map(|(i, _)| {
                let (x, y) = (i % w, i / w);
                Sample::new(x, y, self.values.pixel(x, y))
            })
            .collect()
    }

    /// Per-channel `(min, max)` over the known samples, `None` if there are none.
    pub fn value_range(&self) -> Option<Vec<(f64, f64)>> {
        let ch = self.channels();
        let mut range: Option<Vec<(f64, f64)>> = None;
        for (i, &c) in self.confidence.data().iter().enumerate() {
            if c != 1.0 {
                continue;
            }
            let px = &self.values.data()[i * ch..(i + 1) * ch];
            let r = range.get_or_insert_with(|| px.iter().map(|&v| (v, v)).collect());
            for (bound, &v) in r.iter_mut().zip(px) {
                bound.0 = bound.0.min(v);
                bound.1 = bound.1.max(v);
            }
        }
        range
    }

    /// Mirrors samples left to right.
    pub fn flip_horizontal(&self) -> SparseField {
        SparseField {
            values: self.values.flip_horizontal(),
            confidence: self.confidence.flip_horizontal(),
        }
    }
}

/// Builds the extended field from a list of known sites.
///
/// Every listed site gets confidence 1 and its value; all other pixels get
/// confidence 0 and value 0. Out-of-bounds and duplicate sites are errors.
pub fn extend_sparse(
    samples: &[Sample],
    width: usize,
    height: usize,
    channels: usize,
) -> Result<SparseField> {
    let mut values = ImageGrid::zeros(width, height, channels);
    let mut confidence = ImageGrid::zeros(width, height, 1);
    let mut seen = HashSet::with_capacity(samples.len());
    for s in samples {
        if s.x >= width || s.y >= height {
            return Err(Error::OutOfBounds {
                x: s.x,
                y: s.y,
                width,
                height,
            });
        }
        if s.value.len() != channels {
            return Err(Error::Dimension(format!(
                "sample at ({}, {}) has {} channels, expected {channels}",
                s.x,
                s.y,
                s.value.len()
            )));
        }
        if s.value.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sparse sample values"));
        }
        if !seen.insert((s.x, s.y)) {
            return Err(Error::DuplicateSite { x: s.x, y: s.y });
        }
        values.pixel_mut(s.x, s.y).copy_from_slice(&s.value);
        confidence.set(s.x, s.y, 0, 1.0);
    }
    Ok(SparseField { values, confidence })
}
