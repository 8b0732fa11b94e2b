//! Sparse-to-dense interpolation of scalar and vector fields guided by an
//! image, using a recursive filter with geodesic-distance affinities.
//!
//! The estimate at each pixel is the normalized sum
//!
//! ```text
//! x_p = sum_q w(p, q) * y_q / sum_q w(p, q) * c_q
//! ```
//!
//! where `c_q` is 1 at known samples and 0 elsewhere and `w(p, q)` decays
//! exponentially with the geodesic distance between `p` and `q` over the
//! guidance image. [`geodesic::interpolate`] evaluates both sums with a
//! constant number of raster scans; [`oracle::exact_filter`] computes them by
//! explicit shortest paths for verification. Two kernel-regression baselines,
//! the sampling protocols used to build sparse inputs, error metrics and file
//! formats round out the crate.

pub mod baselines;
pub mod error;
pub mod exec;
pub mod geodesic;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod params;
pub mod sampling;
pub mod sparse;
pub mod synthetic;

pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::{ImageGrid, Pixel, ValueScale};
pub use params::{derive_params, FilterParams};
pub use sparse::{extend_sparse, Sample, SparseField};

use std::fmt;
use std::str::FromStr;

/// The interpolators available behind one dispatch point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Geodesic,
    Bilateral,
    NadarayaWatson,
    Exact,
}

impl Method {
    pub fn run(
        self,
        sparse: &SparseField,
        guidance: &ImageGrid,
        params: &FilterParams,
    ) -> Result<ImageGrid> {
        self.run_with(sparse, guidance, params, Exec::default())
    }

    pub fn run_with(
        self,
        sparse: &SparseField,
        guidance: &ImageGrid,
        params: &FilterParams,
        exec: Exec,
    ) -> Result<ImageGrid> {
        match self {
            Method::Geodesic => geodesic::interpolate_with(sparse, guidance, params, exec),
            Method::Bilateral => {
                baselines::bilateral_interpolate_with(sparse, guidance, params, exec)
            }
            Method::NadarayaWatson => {
                guidance.ensure_same_shape(sparse.values(), "guidance vs sparse field")?;
                baselines::nadaraya_watson_with(sparse, params, exec)
            }
            Method::Exact => oracle::exact_filter_with(sparse, guidance, params, exec),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic" => Ok(Method::Geodesic),
            "bilateral" => Ok(Method::Bilateral),
            "nw" => Ok(Method::NadarayaWatson),
            "exact" => Ok(Method::Exact),
            _ => Err(Error::Parameter(format!("unknown method {s:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Geodesic => "geodesic",
            Method::Bilateral => "bilateral",
            Method::NadarayaWatson => "nw",
            Method::Exact => "exact",
        })
    }
}
