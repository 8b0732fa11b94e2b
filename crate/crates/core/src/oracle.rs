//! Exact geodesic filtering by explicit shortest paths.
//!
//! Quadratic in the pixel count; meant for verification on small images.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geodesic::{nearest_sample_l1, DENOMINATOR_FLOOR};
use crate::grid::{ImageGrid, Pixel};
use crate::params::FilterParams;
use crate::sparse::SparseField;

/// Largest image, in pixels, the exact filter accepts.
pub const ORACLE_PIXEL_LIMIT: usize = 1 << 16;

/// Single-source geodesic distances over the 4-connected grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicDistanceMap {
    pub source: Pixel,
    pub distances: ImageGrid,
}

impl GeodesicDistanceMap {
    pub fn at(&self, p: Pixel) -> f64 {
        self.distances.get(p.x, p.y, 0)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    index: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cost of stepping between two adjacent guidance pixels.
fn step_cost(guidance: &ImageGrid, k: usize, l: usize, delta: f64) -> f64 {
    let ch = guidance.channels();
    let data = guidance.data();
    let mut sq = 0.0;
    for c in 0..ch {
        let d = data[k * ch + c] - data[l * ch + c];
        sq += d * d;
    }
    sq.sqrt() + delta
}

fn dijkstra(guidance: &ImageGrid, source: usize, delta: f64) -> Vec<f64> {
    let (w, h) = (guidance.width(), guidance.height());
    let mut dist = vec![f64::INFINITY; w * h];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier {
        dist: 0.0,
        index: source,
    });
    while let Some(Frontier { dist: d, index: i }) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let (x, y) = (i % w, i / w);
        let neighbours = [
            (x > 0).then(|| i - 1),
            (x + 1 < w).then(|| i + 1),
            (y > 0).then(|| i - w),
            (y + 1 < h).then(|| i + w),
        ];
        for j in neighbours.into_iter().flatten() {
            let nd = d + step_cost(guidance, i, j, delta);
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Frontier { dist: nd, index: j });
            }
        }
    }
    dist
}

pub fn geodesic_distance_map(
    guidance: &ImageGrid,
    source: Pixel,
    params: &FilterParams,
) -> Result<GeodesicDistanceMap> {
    if !guidance.contains(source) {
        return Err(Error::OutOfBounds {
            x: source.x,
            y: source.y,
            width: guidance.width(),
            height: guidance.height(),
        });
    }
    if !guidance.is_finite() {
        return Err(Error::NonFinite("guidance image"));
    }
    let dist = dijkstra(guidance, guidance.index(source.x, source.y), params.delta());
    Ok(GeodesicDistanceMap {
        source,
        distances: ImageGrid::new(guidance.width(), guidance.height(), 1, dist)?,
    })
}

/// `exp(-a * d(p, q))` with the exact geodesic distance.
pub fn exact_weight(
    guidance: &ImageGrid,
    p: Pixel,
    q: Pixel,
    params: &FilterParams,
) -> Result<f64> {
    if !guidance.contains(q) {
        return Err(Error::OutOfBounds {
            x: q.x,
            y: q.y,
            width: guidance.width(),
            height: guidance.height(),
        });
    }
    let map = geodesic_distance_map(guidance, p, params)?;
    Ok((-params.a() * map.at(q)).exp())
}

pub fn exact_filter(
    sparse: &SparseField,
    guidance: &ImageGrid,
    params: &FilterParams,
) -> Result<ImageGrid> {
    exact_filter_with(sparse, guidance, params, Exec::default())
}

pub fn exact_filter_with(
    sparse: &SparseField,
    guidance: &ImageGrid,
    params: &FilterParams,
    exec: Exec,
) -> Result<ImageGrid> {
    guidance.ensure_same_shape(sparse.values(), "guidance vs sparse field")?;
    let pixels = guidance.pixel_count();
    if pixels > ORACLE_PIXEL_LIMIT {
        return Err(Error::OracleScale {
            pixels,
            limit: ORACLE_PIXEL_LIMIT,
        });
    }
    if !guidance.is_finite() {
        return Err(Error::NonFinite("guidance image"));
    }
    let range = sparse.value_range().ok_or(Error::NoSamples)?;
    let samples = sparse.samples();
    let ch = sparse.channels();
    let a = params.a();
    let delta = params.delta();

    // Distances are symmetric, so one Dijkstra per sample covers every
    // output pixel. Samples are split into chunks that accumulate privately.
    let chunk = samples.len().div_ceil(64).max(1);
    let partials = exec.map_range(samples.len().div_ceil(chunk), |k| {
        let mut acc = vec![0.0; pixels * (ch + 1)];
        for s in &samples[k * chunk..((k + 1) * chunk).min(samples.len())] {
            let dist = dijkstra(guidance, guidance.index(s.x, s.y), delta);
            for (sum, d) in acc.chunks_exact_mut(ch + 1).zip(dist) {
                let wgt = (-a * d).exp();
                for (acc_c, v) in sum.iter_mut().zip(&s.value) {
                    *acc_c += wgt * v;
                }
                sum[ch] += wgt;
            }
        }
        acc
    });
    let mut totals = vec![0.0; pixels * (ch + 1)];
    for part in partials {
        for (t, p) in totals.iter_mut().zip(part) {
            *t += p;
        }
    }

    let mut out = ImageGrid::zeros(guidance.width(), guidance.height(), ch);
    let mut underflow = false;
    for (dst, sum) in out
        .data_mut()
        .chunks_exact_mut(ch)
        .zip(totals.chunks_exact(ch + 1))
    {
        let den = sum[ch];
        if den >= DENOMINATOR_FLOOR {
            for ((d, &num), &(lo, hi)) in dst.iter_mut().zip(&sum[..ch]).zip(&range) {
                *d = (num / den).clamp(lo, hi);
            }
        } else {
            dst.fill(f64::NAN);
            underflow = true;
        }
    }
    if underflow {
        let nearest = nearest_sample_l1(sparse).ok_or(Error::NoSamples)?;
        for (px, src) in out.data_mut().chunks_exact_mut(ch).zip(nearest) {
            if px[0].is_nan() {
                px.copy_from_slice(sparse.values().pixel(src.x, src.y));
            }
        }
    }
    Ok(out)
}
