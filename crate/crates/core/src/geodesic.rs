//! Recursive approximation of the geodesic-kernel filter.
//!
//! Both sums of the normalized filter (weighted values and weighted
//! confidences) are gathered with a fixed number of raster scans. Each output
//! pixel receives the contribution of every source pixel exactly once,
//! weighted by the product of per-edge factors along an L-shaped path: first
//! along the source's row to the output column, then along that column. On a
//! single row or column, or under constant guidance, that product equals the
//! exact geodesic weight; elsewhere it never exceeds it.
//!
//! The four quadrant sums overlap on the output pixel's own row and column,
//! so the one-dimensional line sums are subtracted back out:
//!
//! ```text
//! total = A_tl + A_tr + A_bl + A_br - B_lr - B_rl - B_tb - B_bt + z
//! ```

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grid::{ImageGrid, Pixel};
use crate::params::FilterParams;
use crate::sparse::SparseField;

/// Denominators below this are treated as underflowed.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;

/// Per-edge affinity factors `exp(-a * (||I_k - I_l|| + delta))` of the
/// 4-connected pixel lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    width: usize,
    height: usize,
    /// Edge `(x, y)-(x+1, y)` at `y * (width - 1) + x`.
    horizontal: Vec<f64>,
    /// Edge `(x, y)-(x, y+1)` at `y * width + x`.
    vertical: Vec<f64>,
}

impl EdgeWeights {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn horizontal(&self) -> &[f64] {
        &self.horizontal
    }

    pub fn vertical(&self) -> &[f64] {
        &self.vertical
    }

    /// Factor of the edge between `(x, y)` and `(x + 1, y)`.
    #[inline]
    pub fn right_of(&self, x: usize, y: usize) -> f64 {
        self.horizontal[y * (self.width - 1) + x]
    }

    /// Factor of the edge between `(x, y)` and `(x, y + 1)`.
    #[inline]
    pub fn below(&self, x: usize, y: usize) -> f64 {
        self.vertical[y * self.width + x]
    }

    fn horizontal_row(&self, y: usize) -> &[f64] {
        let n = self.width - 1;
        &self.horizontal[y * n..(y + 1) * n]
    }

    fn vertical_row(&self, y: usize) -> &[f64] {
        &self.vertical[y * self.width..(y + 1) * self.width]
    }

    fn check_field(&self, z: &ImageGrid) -> Result<()> {
        if z.width() == self.width && z.height() == self.height {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "field is {}x{} but edge weights are {}x{}",
                z.width(),
                z.height(),
                self.width,
                self.height
            )))
        }
    }
}

/// Euclidean distance between two guidance pixels.
#[inline]
pub(crate) fn color_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn check_guidance(guidance: &ImageGrid) -> Result<()> {
    if !matches!(guidance.channels(), 1 | 3) {
        return Err(Error::Channels {
            what: "guidance",
            got: guidance.channels(),
        });
    }
    if !guidance.is_finite() {
        return Err(Error::NonFinite("guidance image"));
    }
    Ok(())
}

pub fn compute_edge_weights(guidance: &ImageGrid, params: &FilterParams) -> Result<EdgeWeights> {
    compute_edge_weights_with(guidance, params, Exec::default())
}

pub fn compute_edge_weights_with(
    guidance: &ImageGrid,
    params: &FilterParams,
    exec: Exec,
) -> Result<EdgeWeights> {
    check_guidance(guidance)?;
    let (w, h) = (guidance.width(), guidance.height());
    let (a, delta) = (params.a(), params.delta());
    let factor = |k: &[f64], l: &[f64]| (-a * (color_distance(k, l) + delta)).exp();

    let mut horizontal = vec![0.0; (w - 1) * h];
    if w > 1 {
        exec.for_each_row(&mut horizontal, w - 1, |y, row| {
            for (x, g) in row.iter_mut().enumerate() {
                *g = factor(guidance.pixel(x, y), guidance.pixel(x + 1, y));
            }
        });
    }
    let mut vertical = vec![0.0; w * (h - 1)];
    if h > 1 {
        exec.for_each_row(&mut vertical, w, |y, row| {
            for (x, g) in row.iter_mut().enumerate() {
                *g = factor(guidance.pixel(x, y), guidance.pixel(x, y + 1));
            }
        });
    }
    Ok(EdgeWeights {
        width: w,
        height: h,
        horizontal,
        vertical,
    })
}

/// Scan direction of a one-dimensional causal recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
    TopToBottom,
    BottomToTop,
}

/// Region of source pixels, relative to the output pixel, gathered by one
/// quadrant recursion. Each quadrant includes the output pixel's own row
/// and column segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::TopLeft,
        Quadrant::TopRight,
        Quadrant::BottomLeft,
        Quadrant::BottomRight,
    ];

    fn passes(self) -> (Direction, Direction) {
        use Direction::*;
        match self {
            Quadrant::TopLeft => (LeftToRight, TopToBottom),
            Quadrant::TopRight => (RightToLeft, TopToBottom),
            Quadrant::BottomLeft => (LeftToRight, BottomToTop),
            Quadrant::BottomRight => (RightToLeft, BottomToTop),
        }
    }
}

/// Causal recursion `B_p = z_p + g * B_prev` along every scan line.
///
/// The first pixel of each line has no predecessor.
pub fn directional_pass(
    z: &ImageGrid,
    weights: &EdgeWeights,
    direction: Direction,
) -> Result<ImageGrid> {
    directional_pass_with(z, weights, direction, Exec::default())
}

pub fn directional_pass_with(
    z: &ImageGrid,
    weights: &EdgeWeights,
    direction: Direction,
    exec: Exec,
) -> Result<ImageGrid> {
    weights.check_field(z)?;
    let mut out = z.clone();
    run_pass(&mut out, weights, direction, exec);
    Ok(out)
}

fn run_pass(field: &mut ImageGrid, weights: &EdgeWeights, direction: Direction, exec: Exec) {
    let (w, h, ch) = (field.width(), field.height(), field.channels());
    let row_len = w * ch;
    match direction {
        Direction::LeftToRight => exec.for_each_row(field.data_mut(), row_len, |y, row| {
            let g = weights.horizontal_row(y);
            for x in 1..w {
                let (prev, cur) = row.split_at_mut(x * ch);
                let prev = &prev[(x - 1) * ch..];
                for c in 0..ch {
                    cur[c] += g[x - 1] * prev[c];
                }
            }
        }),
        Direction::RightToLeft => exec.for_each_row(field.data_mut(), row_len, |y, row| {
            let g = weights.horizontal_row(y);
            for x in (0..w.saturating_sub(1)).rev() {
                let (cur, next) = row.split_at_mut((x + 1) * ch);
                let cur = &mut cur[x * ch..];
                for c in 0..ch {
                    cur[c] += g[x] * next[c];
                }
            }
        }),
        // Vertical recursions walk rows in order; each step is elementwise
        // over a whole scan line.
        Direction::TopToBottom => {
            let data = field.data_mut();
            for y in 1..h {
                let (above, rest) = data.split_at_mut(y * row_len);
                let prev = &above[(y - 1) * row_len..];
                let cur = &mut rest[..row_len];
                accumulate_line(cur, prev, weights.vertical_row(y - 1), ch);
            }
        }
        Direction::BottomToTop => {
            let data = field.data_mut();
            for y in (0..h.saturating_sub(1)).rev() {
                let (upper, below) = data.split_at_mut((y + 1) * row_len);
                let cur = &mut upper[y * row_len..];
                let prev = &below[..row_len];
                accumulate_line(cur, prev, weights.vertical_row(y), ch);
            }
        }
    }
}

#[inline]
fn accumulate_line(cur: &mut [f64], prev: &[f64], g: &[f64], ch: usize) {
    for ((cur, prev), &g) in cur.chunks_exact_mut(ch).zip(prev.chunks_exact(ch)).zip(g) {
        for (c, p) in cur.iter_mut().zip(prev) {
            *c += g * p;
        }
    }
}

/// Sum over one quadrant of sources, each weighted along its L-shaped path:
/// horizontally within the source's row to the output column, then
/// vertically along that column.
pub fn quadrant_accumulate(
    z: &ImageGrid,
    weights: &EdgeWeights,
    quadrant: Quadrant,
) -> Result<ImageGrid> {
    quadrant_accumulate_with(z, weights, quadrant, Exec::default())
}

pub fn quadrant_accumulate_with(
    z: &ImageGrid,
    weights: &EdgeWeights,
    quadrant: Quadrant,
    exec: Exec,
) -> Result<ImageGrid> {
    let (horizontal, vertical) = quadrant.passes();
    let mut out = directional_pass_with(z, weights, horizontal, exec)?;
    run_pass(&mut out, weights, vertical, exec);
    Ok(out)
}

/// The four quadrant sums of one field.
#[derive(Debug, Clone)]
pub struct QuadrantSums {
    pub top_left: ImageGrid,
    pub top_right: ImageGrid,
    pub bottom_left: ImageGrid,
    pub bottom_right: ImageGrid,
}

/// The four one-dimensional directional sums of one field.
#[derive(Debug, Clone)]
pub struct LineSums {
    pub left_to_right: ImageGrid,
    pub right_to_left: ImageGrid,
    pub top_to_bottom: ImageGrid,
    pub bottom_to_top: ImageGrid,
}

/// Inclusion-exclusion of quadrant and line sums so that every source
/// contributes exactly once.
pub fn combine_quadrants(
    quadrants: &QuadrantSums,
    lines: &LineSums,
    z: &ImageGrid,
) -> Result<ImageGrid> {
    combine_quadrants_with(quadrants, lines, z, Exec::default())
}

pub fn combine_quadrants_with(
    quadrants: &QuadrantSums,
    lines: &LineSums,
    z: &ImageGrid,
    exec: Exec,
) -> Result<ImageGrid> {
    let parts = [
        &quadrants.top_left,
        &quadrants.top_right,
        &quadrants.bottom_left,
        &quadrants.bottom_right,
        &lines.left_to_right,
        &lines.right_to_left,
        &lines.top_to_bottom,
        &lines.bottom_to_top,
    ];
    for p in parts {
        if !p.same_shape(z) || p.channels() != z.channels() {
            return Err(Error::Dimension(
                "combine_quadrants inputs differ in shape".into(),
            ));
        }
    }
    let row_len = z.width() * z.channels();
    let mut out = z.clone();
    exec.for_each_row(out.data_mut(), row_len, |y, row| {
        let span = y * row_len..(y + 1) * row_len;
        let [tl, tr, bl, br, lr, rl, tb, bt] = parts.map(|p| &p.data()[span.clone()]);
        for (i, v) in row.iter_mut().enumerate() {
            *v += (tl[i] + tr[i] + bl[i] + br[i]) - (lr[i] + rl[i] + tb[i] + bt[i]);
        }
    });
    Ok(out)
}

/// Unnormalized filter response: every pixel of `z` spread over the grid with
/// L-path weights.
pub fn filter_sum(z: &ImageGrid, weights: &EdgeWeights) -> Result<ImageGrid> {
    filter_sum_with(z, weights, Exec::default())
}

pub fn filter_sum_with(z: &ImageGrid, weights: &EdgeWeights, exec: Exec) -> Result<ImageGrid> {
    weights.check_field(z)?;
    let lr = directional_pass_with(z, weights, Direction::LeftToRight, exec)?;
    let rl = directional_pass_with(z, weights, Direction::RightToLeft, exec)?;
    let vertical = |mut b: ImageGrid, d| {
        run_pass(&mut b, weights, d, exec);
        b
    };
    let quadrants = QuadrantSums {
        top_left: vertical(lr.clone(), Direction::TopToBottom),
        top_right: vertical(rl.clone(), Direction::TopToBottom),
        bottom_left: vertical(lr.clone(), Direction::BottomToTop),
        bottom_right: vertical(rl.clone(), Direction::BottomToTop),
    };
    let lines = LineSums {
        left_to_right: lr,
        right_to_left: rl,
        top_to_bottom: vertical(z.clone(), Direction::TopToBottom),
        bottom_to_top: vertical(z.clone(), Direction::BottomToTop),
    };
    combine_quadrants_with(&quadrants, &lines, z, exec)
}

/// Response of the recursive filter to a unit impulse at `source`; the value
/// at `p` is the effective weight between `p` and `source`.
pub fn impulse_response(weights: &EdgeWeights, source: Pixel) -> Result<ImageGrid> {
    let mut z = ImageGrid::zeros(weights.width, weights.height, 1);
    if !z.contains(source) {
        return Err(Error::OutOfBounds {
            x: source.x,
            y: source.y,
            width: weights.width,
            height: weights.height,
        });
    }
    z.set(source.x, source.y, 0, 1.0);
    filter_sum(&z, weights)
}

/// Densifies `sparse` as the ratio of the filtered values to the filtered
/// confidences, using guidance-derived geodesic weights.
pub fn interpolate(
    sparse: &SparseField,
    guidance: &ImageGrid,
    params: &FilterParams,
) -> Result<ImageGrid> {
    interpolate_with(sparse, guidance, params, Exec::default())
}

pub fn interpolate_with(
    sparse: &SparseField,
    guidance: &ImageGrid,
    params: &FilterParams,
    exec: Exec,
) -> Result<ImageGrid> {
    guidance.ensure_same_shape(sparse.values(), "guidance vs sparse field")?;
    let range = sparse.value_range().ok_or(Error::NoSamples)?;
    let weights = compute_edge_weights_with(guidance, params, exec)?;

    // Numerator channels and the confidence share one set of passes.
    let ch = sparse.channels();
    let (w, h) = (sparse.width(), sparse.height());
    let mut stacked = ImageGrid::zeros(w, h, ch + 1);
    for ((dst, val), &conf) in stacked
        .data_mut()
        .chunks_exact_mut(ch + 1)
        .zip(sparse.values().data().chunks_exact(ch))
        .zip(sparse.confidence().data())
    {
        dst[..ch].copy_from_slice(val);
        dst[ch] = conf;
    }
    let totals = filter_sum_with(&stacked, &weights, exec)?;

    let mut out = ImageGrid::zeros(w, h, ch);
    exec.for_each_row(out.data_mut(), w * ch, |y, row| {
        let sums = totals.row(y);
        for (dst, sum) in row.chunks_exact_mut(ch).zip(sums.chunks_exact(ch + 1)) {
            let den = sum[ch];
            if den >= DENOMINATOR_FLOOR {
                for ((d, &num), &(lo, hi)) in dst.iter_mut().zip(&sum[..ch]).zip(&range) {
                    *d = (num / den).clamp(lo, hi);
                }
            } else {
                dst.fill(f64::NAN);
            }
        }
    });
    // Underflowed pixels were marked NaN above.
    if out.data().iter().any(|v| v.is_nan()) {
        fill_from_nearest_l1(&mut out, sparse);
    }
    Ok(out)
}

/// For every pixel, the confident site closest in L1 grid distance; ties go
/// to the smallest row, then the smallest column.
pub fn nearest_sample_l1(sparse: &SparseField) -> Option<Vec<Pixel>> {
    let (w, h) = (sparse.width(), sparse.height());
    let n = w * h;
    let mut dist = vec![usize::MAX; n];
    let mut owner = vec![usize::MAX; n];
    let mut frontier = VecDeque::new();
    for (i, &c) in sparse.confidence().data().iter().enumerate() {
        if c == 1.0 {
            dist[i] = 0;
            owner[i] = i;
            frontier.push_back(i);
        }
    }
    if frontier.is_empty() {
        return None;
    }
    // Level-synchronous BFS: the nearest sources of a pixel at distance d
    // are the union of those of its neighbours at distance d - 1, and raster
    // index order is exactly (row, column) order.
    let mut level = 0;
    while !frontier.is_empty() {
        let mut next = VecDeque::new();
        for &i in &frontier {
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if dist[j] == usize::MAX {
                    dist[j] = level + 1;
                    owner[j] = owner[i];
                    next.push_back(j);
                } else if dist[j] == level + 1 && owner[i] < owner[j] {
                    owner[j] = owner[i];
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        frontier = next;
        level += 1;
    }
    Some(
        owner
            .into_iter()
            .map(|o| Pixel::new(o % w, o / w))
            .collect(),
    )
}

fn fill_from_nearest_l1(out: &mut ImageGrid, sparse: &SparseField) {
    let Some(nearest) = nearest_sample_l1(sparse) else {
        return;
    };
    let ch = out.channels();
    for (px, src) in out.data_mut().chunks_exact_mut(ch).zip(nearest) {
        if px[0].is_nan() {
            px.copy_from_slice(sparse.values().pixel(src.x, src.y));
        }
    }
}
