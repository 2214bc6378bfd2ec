use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by the analysis routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute threshold for causal classification at unit scale.
    pub zero: f64,
    /// Hessian rank test, relative to the Hessian norm.
    pub rank_rel: f64,
    /// Cubic discriminator, relative to `max(1, ‖D³g‖)`.
    pub d3_rel: f64,
    /// Quartic discriminator, relative to `max(1, ‖D⁴g‖)`.
    pub d4_rel: f64,
    /// Componentwise match of Gauss-map directions (and supports).
    pub matching: f64,
    /// Half-width of the band `|K_l| < band` treated as parabolic.
    pub band: f64,
    /// Constancy threshold, multiplied by the grid diameter.
    pub const_rel: f64,
    /// Tangent Gram determinants below this in magnitude abort.
    pub degenerate_gram: f64,
    /// Bisection tolerance for curve tracing.
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero: 1e-10,
            rank_rel: 1e-7,
            d3_rel: 1e-7,
            d4_rel: 1e-7,
            matching: 1e-6,
            band: 1e-8,
            const_rel: 1e-8,
            degenerate_gram: 1e-8,
            trace: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("zero", self.zero),
            ("rank_rel", self.rank_rel),
            ("d3_rel", self.d3_rel),
            ("d4_rel", self.d4_rel),
            ("matching", self.matching),
            ("band", self.band),
            ("const_rel", self.const_rel),
            ("degenerate_gram", self.degenerate_gram),
            ("trace", self.trace),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
