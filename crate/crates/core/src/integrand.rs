//! The prototype degenerate integrand
//!
//! ```text
//!     F(x, t, ξ) = a(x, t)/p · (|ξ|_E − 1)_+^p
//! ```
//!
//! which vanishes on `E`, is convex, `C¹` everywhere and `C²` off `∂E`. For the
//! Euclidean unit ball this is the model `a/p · (|ξ| − 1)_+^p`.

use alloc::format;

use crate::error::{Error, Result};
use crate::field::Coefficient;
use crate::gauge::ConvexBody;
use crate::math::{pos, powf, Sym2, Vec2};

/// Distance to `|ξ|_E = 1` below which the Hessian is reported as singular.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct IntegrandSpec {
    body: ConvexBody,
    p: f64,
    coeff: Coefficient,
}

impl IntegrandSpec {
    pub fn new(body: ConvexBody, p: f64, coeff: Coefficient) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::param("p", format!("growth exponent must exceed 1, got {p}")));
        }
        let (c1, c2) = (coeff.lower(), coeff.upper());
        if !(c1 > 0.0 && c1 <= c2 && c2.is_finite()) {
            return Err(Error::param(
                "coeff",
                format!("coefficient bounds must satisfy 0 < C1 ≤ C2 < ∞, got [{c1}, {c2}]"),
            ));
        }
        Ok(Self { body, p, coeff })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn coeff(&self) -> &Coefficient {
        &self.coeff
    }

    #[inline]
    pub fn coefficient(&self, x: Vec2, t: f64) -> f64 {
        self.coeff.eval(x.x, x.y, t)
    }

    /// `F(x, t, ξ)`.
    pub fn value(&self, x: Vec2, t: f64, xi: Vec2) -> f64 {
        self.value_with(self.coefficient(x, t), xi)
    }

    /// `F` for a given coefficient value `a`.
    pub fn value_with(&self, a: f64, xi: Vec2) -> f64 {
        let excess = pos(self.body.gauge(xi) - 1.0);
        if excess == 0.0 {
            return 0.0;
        }
        a / self.p * powf(excess, self.p)
    }

    /// `∇F(x, t, ξ)`; zero on `E`.
    pub fn gradient(&self, x: Vec2, t: f64, xi: Vec2) -> Vec2 {
        self.gradient_with(self.coefficient(x, t), xi)
    }

    pub fn gradient_with(&self, a: f64, xi: Vec2) -> Vec2 {
        let excess = pos(self.body.gauge(xi) - 1.0);
        if excess == 0.0 {
            return Vec2::ZERO;
        }
        self.body.gauge_gradient(xi) * (a * powf(excess, self.p - 1.0))
    }

    /// `∇²F(x, t, ξ)`; fails within [`BOUNDARY_TOL`] of `∂E`.
    pub fn hessian(&self, x: Vec2, t: f64, xi: Vec2) -> Result<Sym2> {
        self.hessian_with(self.coefficient(x, t), xi)
    }

    pub fn hessian_with(&self, a: f64, xi: Vec2) -> Result<Sym2> {
        let g = self.body.gauge(xi);
        if (g - 1.0).abs() <= BOUNDARY_TOL {
            return Err(Error::BoundarySingularity { gauge: g });
        }
        if g < 1.0 {
            return Ok(Sym2::ZERO);
        }
        let excess = g - 1.0;
        let dg = self.body.gauge_gradient(xi);
        let radial = dg.outer() * ((self.p - 1.0) * powf(excess, self.p - 2.0));
        let curvature = self.body.gauge_hessian(xi) * powf(excess, self.p - 1.0);
        Ok((radial + curvature) * a)
    }

    /// The eigenvalue sandwich of the Euclidean prototype for `p ≥ 2`:
    /// `C1 (|ξ|−1)_+^{p−1}/|ξ| ≤ ⟨∇²F η, η⟩/|η|² ≤ C2 (p−1)(|ξ|−1)_+^{p−2}`.
    pub fn prototype_hessian_bounds(&self, xi: Vec2) -> (f64, f64) {
        let r = xi.norm();
        let excess = pos(r - 1.0);
        let p = self.p;
        let lower = self.coeff.lower() * powf(excess, p - 1.0) / r;
        let upper = self.coeff.upper() * (p - 1.0) * powf(excess, p - 2.0);
        (lower, upper)
    }

    /// `λ(δ) = C1 δ^p`, the prototype ellipticity constant on
    /// `1 + δ ≤ |ξ| ≤ 1/δ` for `p ≥ 2`.
    pub fn prototype_lambda(&self, delta: f64) -> f64 {
        self.coeff.lower() * powf(delta, self.p)
    }

    /// `Λ(δ) = C2 (p−1) ((1−δ)/δ)^{p−2}` on the same annulus.
    pub fn prototype_big_lambda(&self, delta: f64) -> f64 {
        self.coeff.upper() * (self.p - 1.0) * powf((1.0 - delta) / delta, self.p - 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball_spec(p: f64, a: f64) -> IntegrandSpec {
        IntegrandSpec::new(ConvexBody::ball(1.0).unwrap(), p, Coefficient::constant(a)).unwrap()
    }

    const X: Vec2 = Vec2::new(0.3, 0.4);

    #[test]
    fn value_examples() {
        assert_eq!(ball_spec(2.0, 1.0).value(X, 0.0, Vec2::new(2.0, 0.0)), 0.5);
        for p in [1.5, 2.0, 3.0, 7.0] {
            let s = ball_spec(p, 1.0);
            assert_eq!(s.value(X, 0.0, Vec2::new(0.6, -0.8)), 0.0);
            assert_eq!(s.value(X, 0.0, Vec2::new(0.1, 0.2)), 0.0);
        }
        let v = ball_spec(3.0, 3.0).value(X, 0.0, Vec2::new(0.0, 2.5));
        assert!((v - 3.375).abs() < 1e-14);
    }

    #[test]
    fn value_matches_ray_quadrature_of_gradient() {
        // F(ξ) = ∫_0^1 ⟨∇F(sξ), ξ⟩ ds, composite Simpson
        let s = ball_spec(3.0, 3.0);
        let xi = Vec2::new(0.0, 2.5);
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * s.gradient(X, 0.0, xi * (i as f64 * h)).dot(xi);
        }
        assert!((acc * h / 3.0 - 3.375).abs() < 1e-8);
    }

    #[test]
    fn gradient_and_hessian_examples() {
        let s = ball_spec(2.0, 1.0);
        // (|ξ|−1) ξ/|ξ| at (2, 0)
        let xi = Vec2::new(2.0, 0.0);
        let g = s.gradient(X, 0.0, xi);
        assert!((g - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        let h = 1e-6;
        let fd = (s.value(X, 0.0, xi + Vec2::new(h, 0.0)) - s.value(X, 0.0, xi - Vec2::new(h, 0.0))) / (2.0 * h);
        assert!((fd - g.x).abs() < 1e-8);
        assert_eq!(s.gradient(X, 0.0, Vec2::new(0.5, 0.5)), Vec2::ZERO);
        let (lo, hi) = s.hessian(X, 0.0, Vec2::new(2.0, 0.0)).unwrap().eigenvalues();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hessian_on_boundary_is_an_error() {
        let s = ball_spec(2.0, 1.0);
        let err = s.hessian(X, 0.0, Vec2::new(0.6, 0.8)).unwrap_err();
        assert!(matches!(err, Error::BoundarySingularity { .. }));
        assert_eq!(s.hessian(X, 0.0, Vec2::new(0.1, 0.0)).unwrap(), Sym2::ZERO);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let s = ball_spec(3.0, 1.7);
        let h = 1e-6;
        for k in 0..50 {
            let xi = Vec2::from_angle(0.4 * k as f64) * (1.2 + 0.1 * k as f64);
            let g = s.gradient(X, 0.0, xi);
            let fd = Vec2::new(
                (s.value(X, 0.0, xi + Vec2::new(h, 0.0)) - s.value(X, 0.0, xi - Vec2::new(h, 0.0)))
                    / (2.0 * h),
                (s.value(X, 0.0, xi + Vec2::new(0.0, h)) - s.value(X, 0.0, xi - Vec2::new(0.0, h)))
                    / (2.0 * h),
            );
            assert!((g - fd).norm() <= 1e-6 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let ball = ConvexBody::ball(1.0).unwrap();
        assert!(IntegrandSpec::new(ball.clone(), 1.0, Coefficient::constant(1.0)).is_err());
        assert!(IntegrandSpec::new(ball, 2.0, Coefficient::constant(0.0)).is_err());
    }
}
