//! Gradient truncation maps
//!
//! ```text
//!     G_δ(ξ) = (|ξ|_E − (1+δ))_+ / |ξ|_E · ξ,      G = G_0.
//! ```

use alloc::format;

use crate::error::{Error, Result};
use crate::gauge::ConvexBody;
use crate::math::{pos, Vec2};

#[derive(Clone, Debug, PartialEq)]
pub struct GDeltaMap {
    body: ConvexBody,
    delta: f64,
}

impl GDeltaMap {
    pub fn new(body: ConvexBody, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::param("delta", format!("must be finite and ≥ 0, got {delta}")));
        }
        Ok(Self { body, delta })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `G_δ(ξ)`, continuously extended by `G_δ(0) = 0`.
    pub fn apply(&self, xi: Vec2) -> Vec2 {
        let g = self.body.gauge(xi);
        let excess = pos(g - (1.0 + self.delta));
        if excess == 0.0 {
            return Vec2::ZERO;
        }
        xi * (excess / g)
    }

    /// `3 (R_E/r_E)²`: `|G_δ(ξ) − G_δ(η)| ≤ C |ξ − η|`.
    pub fn lipschitz_forward_bound(&self) -> f64 {
        let (r, big_r) = self.body.radii();
        3.0 * (big_r / r) * (big_r / r)
    }

    /// `3 (R_E/r_E)² (1 + 1/δ)`: `|ξ − η| ≤ C |G(ξ) − G(η)|` whenever
    /// `|ξ|_E ≥ 1 + δ`. Requires `δ > 0`.
    pub fn lipschitz_inverse_bound(&self) -> Result<f64> {
        if self.delta <= 0.0 {
            return Err(Error::param("delta", "inverse bound requires δ > 0"));
        }
        Ok(self.lipschitz_forward_bound() * (1.0 + 1.0 / self.delta))
    }

    /// Sharp uniform bound on `|G_δ(ξ) − G(ξ)|`, namely `R_E δ`
    /// (`|ξ|/|ξ|_E ≤ R_E` and the positive parts differ by at most `δ`).
    pub fn collapse_bound(&self) -> f64 {
        self.body.outer_radius() * self.delta
    }
}
