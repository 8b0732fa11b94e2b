use crate::error::{Error, Result};

/// Default range bandwidth, in guidance units on a `[0, 255]` scale.
pub const DEFAULT_SIGMA_R: f64 = 50.0;
/// Default spatial bandwidth, in pixels.
pub const DEFAULT_SIGMA_S: f64 = 100.0;

/// Bilateral-style bandwidths together with the geodesic kernel constants
/// derived from them.
///
/// The decay rate is `a = 2 / sigma_r^2` and the per-step spatial cost is
/// `delta = sigma_r^2 / sigma_s^2`. Both are computed on construction and
/// the fields are private, so the pair can never drift out of sync.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    sigma_r: f64,
    sigma_s: f64,
    a: f64,
    delta: f64,
}

impl FilterParams {
    pub fn new(sigma_r: f64, sigma_s: f64) -> Result<Self> {
        derive_params(sigma_r, sigma_s)
    }

    #[inline]
    pub fn sigma_r(&self) -> f64 {
        self.sigma_r
    }

    #[inline]
    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    /// Decay rate of the exponential geodesic weight.
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Cost of one lattice step on top of the color difference.
    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Default for FilterParams {
    fn default() -> Self {
        derive_params(DEFAULT_SIGMA_R, DEFAULT_SIGMA_S).expect("defaults are positive")
    }
}

pub fn derive_params(sigma_r: f64, sigma_s: f64) -> Result<FilterParams> {
    for (name, v) in [("sigma_r", sigma_r), ("sigma_s", sigma_s)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Parameter(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let r2 = sigma_r * sigma_r;
    Ok(FilterParams {
        sigma_r,
        sigma_s,
        a: 2.0 / r2,
        delta: r2 / (sigma_s * sigma_s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults() {
        let p = derive_params(50.0, 100.0).unwrap();
        assert!((p.a() - 0.0008).abs() < 1e-18);
        assert!((p.delta() - 0.25).abs() < 1e-15);
        assert_eq!(FilterParams::default(), p);
    }

    #[test]
    fn unit_scale() {
        let p = derive_params(1.0, 1.0).unwrap();
        assert_eq!((p.a(), p.delta()), (2.0, 1.0));
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(
            derive_params(0.0, 100.0),
            Err(Error::Parameter(_))
        ));
        assert!(derive_params(50.0, -1.0).is_err());
        assert!(derive_params(f64::NAN, 1.0).is_err());
        assert!(derive_params(f64::INFINITY, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn derived_constants_are_consistent(r in 1e-3f64..1e3, s in 1e-3f64..1e3) {
            let p = derive_params(r, s).unwrap();
            prop_assert!((p.a() * r * r - 2.0).abs() <= 1e-12);
            prop_assert!((p.delta() * s * s - r * r).abs() <= 1e-12 * r * r);

            let doubled = derive_params(2.0 * r, s).unwrap();
            prop_assert!((doubled.a() * 4.0 - p.a()).abs() <= 1e-12 * p.a());
            prop_assert!((doubled.delta() - 4.0 * p.delta()).abs() <= 1e-12 * doubled.delta());
        }
    }
}
