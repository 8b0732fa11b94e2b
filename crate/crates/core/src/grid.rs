//! Multi-channel rasters shared by every stage of the pipeline.

use crate::error::{Error, Result};

/// A pixel coordinate, `x` along a row and `y` down the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Nominal range of the values stored in a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueScale {
    /// Color or intensity mapped to reals in `[0, 255]` per channel.
    Byte,
    /// Any real quantity (disparity, flow, accumulated sums).
    #[default]
    Raw,
}

/// Row-major, channel-interleaved raster of `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    channels: usize,
    scale: ValueScale,
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::Dimension(format!(
                "grid must be non-empty, got {width}x{height}x{channels}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::Dimension("grid size overflows".into()))?;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "{width}x{height}x{channels} grid needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            scale: ValueScale::Raw,
            data,
        })
    }

    /// A grid filled with `value`.
    ///
    /// # Panics
    /// If any dimension is zero.
    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0 && channels > 0, "empty grid");
        Self {
            width,
            height,
            channels,
            scale: ValueScale::Raw,
            data: vec![value; width * height * channels],
        }
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, 0.0)
    }

    /// Builds a grid by evaluating `f(x, y, channel)` for every entry.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut grid = Self::zeros(width, height, channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    grid.data[(y * width + x) * channels + c] = f(x, y, c);
                }
            }
        }
        grid
    }

    pub fn with_scale(mut self, scale: ValueScale) -> Self {
        self.scale = scale;
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn scale(&self) -> ValueScale {
        self.scale
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn contains(&self, p: Pixel) -> bool {
        p.x < self.width && p.y < self.height
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// All channel values of one pixel.
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [f64] {
        let start = (y * self.width + x) * self.channels;
        &mut self.data[start..start + self.channels]
    }

    /// One scan line, all channels interleaved.
    #[inline]
    pub fn row(&self, y: usize) -> &[f64] {
        let len = self.width * self.channels;
        &self.data[y * len..(y + 1) * len]
    }

    pub fn same_shape(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn ensure_same_shape(&self, other: &ImageGrid, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{what}: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies channel `c` into a single-channel grid.
    pub fn channel(&self, c: usize) -> ImageGrid {
        assert!(c < self.channels, "channel {c} out of range");
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px[c])
            .collect();
        ImageGrid {
            width: self.width,
            height: self.height,
            channels: 1,
            scale: self.scale,
            data,
        }
    }

    /// Mirrors the grid left to right.
    pub fn flip_horizontal(&self) -> ImageGrid {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.pixel_mut(self.width - 1 - x, y)
                    .copy_from_slice(self.pixel(x, y));
            }
        }
        out
    }

    /// Swaps rows and columns.
    pub fn transpose(&self) -> ImageGrid {
        let mut out =
            ImageGrid::zeros(self.height, self.width, self.channels).with_scale(self.scale);
        for y in 0..self.height {
            for x in 0..self.width {
                out.pixel_mut(y, x).copy_from_slice(self.pixel(x, y));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length() {
        assert!(ImageGrid::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(ImageGrid::new(0, 2, 1, vec![]).is_err());
        assert!(ImageGrid::new(2, 2, 3, vec![0.0; 12]).is_ok());
    }

    #[test]
    fn interleaved_layout() {
        let g = ImageGrid::from_fn(3, 2, 2, |x, y, c| (100 * y + 10 * x + c) as f64);
        assert_eq!(g.pixel(2, 1), &[120.0, 121.0]);
        assert_eq!(g.row(1).len(), 6);
        assert_eq!(g.channel(1).get(1, 1, 0), 111.0);
        assert_eq!(g.flip_horizontal().get(0, 0, 0), 20.0);
        assert_eq!(g.transpose().get(1, 2, 1), 121.0);
    }
}
