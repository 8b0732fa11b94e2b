//! Comparison interpolators: Nadaraya-Watson kernel regression and the
//! joint bilateral kernel.
//!
//! Both evaluate the same normalized ratio as the geodesic filter but with
//! closed-form Gaussian weights. Each output pixel gathers samples from a
//! square window of half-width `ceil(WINDOW_SIGMAS * sigma_s)`; the window
//! grows until the weight it leaves out is provably below
//! `TRUNCATION_TOLERANCE` of the weight it holds. Pixels whose window holds
//! no usable weight fall back to the ratio over all samples.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geodesic::DENOMINATOR_FLOOR;
use crate::grid::{ImageGrid, Pixel};
use crate::params::FilterParams;
use crate::sparse::{Sample, SparseField};

/// Initial window half-width in units of `sigma_s`.
pub const WINDOW_SIGMAS: f64 = 3.0;

/// Bound on the relative weight a window may leave out.
pub const TRUNCATION_TOLERANCE: f64 = 1e-13;

pub fn window_radius(params: &FilterParams) -> usize {
    (WINDOW_SIGMAS * params.sigma_s()).ceil() as usize
}

/// Smallest half-width `r` such that `count` samples beyond it, each with
/// weight at most `exp(-(r + 1)^2 * inv_two_s2)`, add less than
/// `TRUNCATION_TOLERANCE * den`.
fn sufficient_radius(count: usize, den: f64, inv_two_s2: f64) -> usize {
    let budget = (count as f64 / (TRUNCATION_TOLERANCE * den)).ln();
    if budget <= 0.0 {
        return 0;
    }
    ((budget / inv_two_s2).sqrt() - 1.0).max(0.0).ceil() as usize
}

/// Samples bucketed by row and sorted by column.
struct RowIndex<'a> {
    samples: &'a [Sample],
    rows: Vec<Vec<(usize, usize)>>,
}

impl<'a> RowIndex<'a> {
    fn new(samples: &'a [Sample], height: usize) -> Self {
        let mut rows = vec![Vec::new(); height];
        for (i, s) in samples.iter().enumerate() {
            rows[s.y].push((s.x, i));
        }
        for row in &mut rows {
            row.sort_unstable();
        }
        Self { samples, rows }
    }

    /// Visits every sample in the square window of half-width `r` around `p`.
    fn for_each_in_window(&self, p: Pixel, r: usize, mut f: impl FnMut(usize, usize, &Sample)) {
        let y0 = p.y.saturating_sub(r);
        let y1 = (p.y + r).min(self.rows.len() - 1);
        let x0 = p.x.saturating_sub(r);
        let x1 = p.x + r;
        for (dy, row) in self.rows[y0..=y1].iter().enumerate() {
            let dy = (y0 + dy).abs_diff(p.y);
            let start = row.partition_point(|&(x, _)| x < x0);
            for &(x, i) in row[start..].iter().take_while(|&&(x, _)| x <= x1) {
                f(x.abs_diff(p.x), dy, &self.samples[i]);
            }
        }
    }
}

/// Untruncated ratio over every sample, for pixels whose window holds no
/// usable weight. Exponents are shifted by their minimum so the largest
/// weight is exactly 1 and the denominator cannot underflow; as `sigma_s`
/// shrinks this tends to the nearest sample.
fn global_ratio(samples: &[Sample], p: Pixel, exponent: impl Fn(&Sample) -> f64, num: &mut [f64]) {
    let e: Vec<f64> = samples.iter().map(&exponent).collect();
    let e_min = e.iter().copied().fold(f64::INFINITY, f64::min);
    num.fill(0.0);
    let mut den = 0.0;
    for (s, e) in samples.iter().zip(&e) {
        let wgt = (e_min - e).exp();
        for (n, v) in num.iter_mut().zip(&s.value) {
            *n += wgt * v;
        }
        den += wgt;
    }
    debug_assert!(den >= 1.0, "shifted weights at {p:?}");
    for n in num.iter_mut() {
        *n /= den;
    }
}

fn kernel_interpolate(
    sparse: &SparseField,
    params: &FilterParams,
    exec: Exec,
    range_weight: Option<(&ImageGrid, f64)>,
) -> Result<ImageGrid> {
    let range = sparse.value_range().ok_or(Error::NoSamples)?;
    let samples = sparse.samples();
    let (w, h, ch) = (sparse.width(), sparse.height(), sparse.channels());
    let r0 = window_radius(params);
    let r_max = w.max(h);
    let inv_two_s2 = 1.0 / (2.0 * params.sigma_s() * params.sigma_s());
    let spatial: Vec<f64> = (0..=r_max)
        .map(|d| (-((d * d) as f64) * inv_two_s2).exp())
        .collect();
    let index = RowIndex::new(&samples, h);

    let mut out = ImageGrid::zeros(w, h, ch);
    exec.for_each_row(out.data_mut(), w * ch, |y, row| {
        let mut num = vec![0.0; ch];
        for (x, dst) in row.chunks_exact_mut(ch).enumerate() {
            let p = Pixel::new(x, y);
            let mut r = r0.min(r_max);
            let mut den;
            loop {
                num.fill(0.0);
                den = 0.0;
                index.for_each_in_window(p, r, |dx, dy, s| {
                    let mut wgt = spatial[dx] * spatial[dy];
                    if let Some((guidance, inv_two_r2)) = range_weight {
                        let (a, b) = (guidance.pixel(x, y), guidance.pixel(s.x, s.y));
                        let d2: f64 = a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum();
                        wgt *= (-d2 * inv_two_r2).exp();
                    }
                    for (n, v) in num.iter_mut().zip(&s.value) {
                        *n += wgt * v;
                    }
                    den += wgt;
                });
                if r >= r_max || den < DENOMINATOR_FLOOR {
                    break;
                }
                let needed = sufficient_radius(samples.len(), den, inv_two_s2);
                if needed <= r {
                    break;
                }
                r = needed.min(r_max);
            }
            if den >= DENOMINATOR_FLOOR {
                for n in num.iter_mut() {
                    *n /= den;
                }
            } else {
                let exponent = |s: &Sample| {
                    let (dx, dy) = (s.x.abs_diff(x) as f64, s.y.abs_diff(y) as f64);
                    let mut e = (dx * dx + dy * dy) * inv_two_s2;
                    if let Some((guidance, inv_two_r2)) = range_weight {
                        let (a, b) = (guidance.pixel(x, y), guidance.pixel(s.x, s.y));
                        e += a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                            * inv_two_r2;
                    }
                    e
                };
                global_ratio(&samples, p, exponent, &mut num);
            }
            for ((d, n), &(lo, hi)) in dst.iter_mut().zip(&num).zip(&range) {
                *d = n.clamp(lo, hi);
            }
        }
    });
    Ok(out)
}

/// Spatial Gaussian kernel regression; ignores any guidance image.
pub fn nadaraya_watson(sparse: &SparseField, params: &FilterParams) -> Result<ImageGrid> {
    nadaraya_watson_with(sparse, params, Exec::default())
}

pub fn nadaraya_watson_with(
    sparse: &SparseField,
    params: &FilterParams,
    exec: Exec,
) -> Result<ImageGrid> {
    kernel_interpolate(sparse, params, exec, None)
}

/// Kernel regression with a joint spatial and guidance-range Gaussian.
pub fn bilateral_interpolate(
    sparse: &SparseField,
    guidance: &ImageGrid,
    params: &FilterParams,
) -> Result<ImageGrid> {
    bilateral_interpolate_with(sparse, guidance, params, Exec::default())
}

pub fn bilateral_interpolate_with(
    sparse: &SparseField,
    guidance: &ImageGrid,
    params: &FilterParams,
    exec: Exec,
) -> Result<ImageGrid> {
    guidance.ensure_same_shape(sparse.values(), "guidance vs sparse field")?;
    crate::geodesic::check_guidance(guidance)?;
    let inv_two_r2 = 1.0 / (2.0 * params.sigma_r() * params.sigma_r());
    kernel_interpolate(sparse, params, exec, Some((guidance, inv_two_r2)))
}
