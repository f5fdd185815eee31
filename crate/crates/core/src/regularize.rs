//! Regularization chain `F → F̃ → F̂ → F̂_ε`.
//!
//! ```text
//!     F̃   = Ψ ∘ F                 truncation: Ψ(s) = s on [0, K̃], Ψ ≡ L on [L, ∞)
//!     F̂   = F̃ + Φ                 radial convexifier, Φ ≡ 0 on B_{K+R_E}
//!     F̂_ε = F̂ + ε|ξ|²/2           ε-lift, ε ∈ (0, 1]
//! ```
//!
//! with `K̃ = sup F` over `B_{K+2R_E}` and `L = K̃ + 1`. The vector field is
//! `Ĥ_ε = ∇F̂_ε` and the bilinear form `B̂_ε(ξ)(η, ζ) = ⟨∇²F̂(ξ)η, ζ⟩ + ε⟨η, ζ⟩`.
//!
//! `Ψ` is the quintic smoothstep that is `C²` at both ends. `Φ(ξ) = h(|ξ|)` with
//! `h''` piecewise linear, so that the Hessian eigenvalues `{h'', h'/r}` are
//! explicit. `h` meets `Φ = 0` on `B_{K+R_E}`, `|∇Φ(ξ)| ≤ (2C_F+1)|ξ|` and
//! `∇²Φ ≥ (C_F+1) I` for `|ξ| ≥ K+2R_E`. The Hessian of such a `Φ` cannot stay
//! below `2C_F+1`: `h'(K+2R_E) ≥ (C_F+1)(K+2R_E)` must be built up over a
//! radial gap of width `R_E`. The realized bound is
//! [`RegularizationConstants::phi_hessian_bound`].

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrand::{IntegrandSpec, BOUNDARY_TOL};
use crate::math::{powf, Sym2, Vec2};

/// Quintic cutoff `Ψ` with `Ψ(s) = s` on `[0, start]` and `Ψ ≡ start + width`
/// on `[start + width, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    start: f64,
    width: f64,
}

impl Cutoff {
    pub fn new(start: f64, width: f64) -> Self {
        Self { start, width }
    }

    /// `q(τ) = τ + 4τ³ − 7τ⁴ + 3τ⁵`: `q(0)=0, q'(0)=1, q(1)=1, q'(1)=q''(0)=q''(1)=0`.
    #[inline]
    fn q(tau: f64) -> (f64, f64, f64) {
        let t2 = tau * tau;
        let t3 = t2 * tau;
        let value = tau + 4.0 * t3 - 7.0 * t3 * tau + 3.0 * t3 * t2;
        let d1 = 1.0 + 12.0 * t2 - 28.0 * t3 + 15.0 * t2 * t2;
        let d2 = 24.0 * tau - 84.0 * t2 + 60.0 * t3;
        (value, d1, d2)
    }

    /// `(Ψ(s), Ψ'(s), Ψ''(s))`.
    #[inline]
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        if s <= self.start {
            (s, 1.0, 0.0)
        } else if s >= self.start + self.width {
            (self.start + self.width, 0.0, 0.0)
        } else {
            let (v, d1, d2) = Self::q((s - self.start) / self.width);
            (self.start + self.width * v, d1, d2 / self.width)
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    /// `(sup Ψ', sup |Ψ'| + |Ψ''|)` sampled on the transition.
    pub fn derivative_bounds(&self) -> (f64, f64) {
        let mut max_d1: f64 = 1.0;
        let mut max_sum: f64 = 1.0;
        for i in 0..=4000 {
            let tau = i as f64 / 4000.0;
            let (_, d1, d2) = Self::q(tau);
            max_d1 = max_d1.max(d1.abs());
            max_sum = max_sum.max(d1.abs() + d2.abs() / self.width);
        }
        // sampled maxima of smooth polynomials; pad by the grid error
        (max_d1 * (1.0 + 1e-6), max_sum * (1.0 + 1e-6))
    }
}

/// Radial profile `h` with continuous, piecewise-linear `h''` and `h ≡ 0`
/// before the first knot; `h''` is constant after the last knot.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    /// `(r_i, h''(r_i), h'(r_i), h(r_i))`.
    knots: Vec<[f64; 4]>,
}

impl RadialProfile {
    fn from_curvature(points: &[(f64, f64)]) -> Self {
        let mut knots: Vec<[f64; 4]> = Vec::with_capacity(points.len());
        let (r0, c0) = points[0];
        knots.push([r0, c0, 0.0, 0.0]);
        for &(r, c) in &points[1..] {
            let [rp, cp, d1p, d0p] = *knots.last().unwrap();
            let s = r - rp;
            let slope = (c - cp) / s;
            let d1 = d1p + cp * s + 0.5 * slope * s * s;
            let d0 = d0p + d1p * s + 0.5 * cp * s * s + slope * s * s * s / 6.0;
            knots.push([r, c, d1, d0]);
        }
        Self { knots }
    }

    /// `(h(r), h'(r), h''(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let first = self.knots[0];
        if r <= first[0] {
            return (0.0, 0.0, 0.0);
        }
        let idx = self.knots.partition_point(|k| k[0] <= r) - 1;
        let [rk, ck, d1k, d0k] = self.knots[idx];
        let s = r - rk;
        let slope = if idx + 1 < self.knots.len() {
            let next = self.knots[idx + 1];
            (next[1] - ck) / (next[0] - rk)
        } else {
            0.0
        };
        let d2 = ck + slope * s;
        let d1 = d1k + ck * s + 0.5 * slope * s * s;
        let d0 = d0k + d1k * s + 0.5 * ck * s * s + slope * s * s * s / 6.0;
        (d0, d1, d2)
    }

    /// Largest `h''`, which is the spectral bound of `∇²Φ` (`h'/r ≤ sup h''`
    /// because `h'` starts at zero).
    pub fn max_curvature(&self) -> f64 {
        self.knots.iter().map(|k| k[1]).fold(0.0, f64::max)
    }
}

/// `Φ(ξ) = h(|ξ|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Convexifier {
    profile: RadialProfile,
}

impl Convexifier {
    /// Builds the profile: flat up to `inner`, `h''` ramps linearly to its peak
    /// over the first tenth of `[inner, outer]`, holds it so that
    /// `h'(outer) = floor·outer`, then relaxes linearly to `floor`.
    pub fn build(inner: f64, outer: f64, floor: f64, cap: f64) -> Self {
        let width = outer - inner;
        let theta = 0.1;
        let peak = floor * outer / (width * (1.0 - 0.5 * theta));
        // the relaxation zone is short enough that h'(r) ≤ cap·r stays true
        let relax = 2.0 * (cap - floor) * outer / (peak - floor);
        let profile = RadialProfile::from_curvature(&[
            (inner, 0.0),
            (inner + theta * width, peak),
            (outer, peak),
            (outer + relax, floor),
        ]);
        Self { profile }
    }

    /// `(Φ, ∇Φ, ∇²Φ)`.
    pub fn eval(&self, xi: Vec2) -> (f64, Vec2, Sym2) {
        let r = xi.norm();
        let (h, d1, d2) = self.profile.eval(r);
        if d1 == 0.0 && d2 == 0.0 {
            return (h, Vec2::ZERO, Sym2::ZERO);
        }
        let u = xi / r;
        let radial = u.outer();
        let hess = radial * d2 + (Sym2::IDENTITY - radial) * (d1 / r);
        (h, u * d1, hess)
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn hessian_bound(&self) -> f64 {
        self.profile.max_curvature()
    }
}

/// Constants recorded while assembling the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizationConstants {
    pub r_e: f64,
    pub big_r_e: f64,
    /// Gradient bound `K` of the reference solution.
    pub k: f64,
    /// `K̃ = sup F` over `B_{K+2R_E}`.
    pub k_tilde: f64,
    /// `L = K̃ + 1`.
    pub l: f64,
    /// Radius beyond which `F̃` is constant.
    pub n: f64,
    /// `sup |Ψ'| + |Ψ''|`.
    pub c_psi: f64,
    /// Hessian bound of `F̃` on the outer annulus (sampled, inflated by 1.5, at least 1).
    pub c_f: f64,
    /// Realized spectral bound of `∇²Φ`.
    pub phi_hessian_bound: f64,
    /// `C` in `|Ĥ_ε(ξ)| ≤ C (1 + |ξ|)`.
    pub growth: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct RegularizedIntegrand {
    base: IntegrandSpec,
    cutoff: Cutoff,
    convexifier: Convexifier,
    constants: RegularizationConstants,
}

/// Samples in the `C_F` sweep: radii × angles × coefficient values.
const CF_RADII: usize = 100;
const CF_ANGLES: usize = 100;
const CF_COEFFS: usize = 9;

impl RegularizedIntegrand {
    /// Assembles the chain for a reference gradient bound `k` and lift `epsilon`.
    pub fn build(base: IntegrandSpec, k: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1], got {epsilon}")));
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::param("K", format!("must be finite and non-negative, got {k}")));
        }
        let (r_e, big_r_e) = base.body().radii();
        let p = base.p();
        let (c1, c2) = (base.coeff().lower(), base.coeff().upper());

        // sup of the gauge on B_ρ is ρ/r_E
        let working = k + 2.0 * big_r_e;
        let k_tilde = c2 / p * powf((working / r_e - 1.0).max(0.0), p);
        let l = k_tilde + 1.0;
        let cutoff = Cutoff::new(k_tilde, 1.0);
        let (psi_d1_max, c_psi) = cutoff.derivative_bounds();

        // F ≥ L as soon as |ξ|_E ≥ 1 + (pL/C1)^{1/p}, and |ξ|_E ≥ |ξ|/R_E
        let n = working.max(big_r_e * (1.0 + powf(p * l / c1, 1.0 / p)));

        let mut partial = Self {
            base,
            cutoff,
            convexifier: Convexifier::build(k + big_r_e, working, 2.0, 3.0),
            constants: RegularizationConstants {
                r_e,
                big_r_e,
                k,
                k_tilde,
                l,
                n,
                c_psi,
                c_f: 1.0,
                phi_hessian_bound: 0.0,
                growth: 0.0,
                epsilon,
            },
        };

        let c_f = (1.5 * partial.sample_truncated_hessian_sup(k + big_r_e, n)).max(1.0);
        let convexifier = Convexifier::build(k + big_r_e, working, c_f + 1.0, 2.0 * c_f + 1.0);
        let grad_sup = psi_d1_max * c2 * powf((n / r_e - 1.0).max(0.0), p - 1.0) / r_e;
        partial.constants.c_f = c_f;
        partial.constants.phi_hessian_bound = convexifier.hessian_bound();
        partial.constants.growth = epsilon + grad_sup + 2.0 * c_f + 1.0;
        partial.convexifier = convexifier;
        Ok(partial)
    }

    /// `sup ‖∇²F̃‖` over the annulus `inner ≤ |ξ| ≤ outer` and `a ∈ [C1, C2]`.
    fn sample_truncated_hessian_sup(&self, inner: f64, outer: f64) -> f64 {
        let (c1, c2) = (self.base.coeff().lower(), self.base.coeff().upper());
        let mut sup: f64 = 0.0;
        for ia in 0..CF_COEFFS {
            let a = c1 + (c2 - c1) * ia as f64 / (CF_COEFFS - 1) as f64;
            for ir in 0..CF_RADII {
                let r = inner + (outer - inner) * ir as f64 / (CF_RADII - 1) as f64;
                for it in 0..CF_ANGLES {
                    let xi = Vec2::from_angle(2.0 * PI * it as f64 / CF_ANGLES as f64) * r;
                    if let Ok(h) = self.truncated_hessian_with(a, xi) {
                        sup = sup.max(h.norm());
                    }
                }
            }
        }
        sup
    }

    pub fn base(&self) -> &IntegrandSpec {
        &self.base
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    pub fn convexifier(&self) -> &Convexifier {
        &self.convexifier
    }

    pub fn constants(&self) -> &RegularizationConstants {
        &self.constants
    }

    pub fn epsilon(&self) -> f64 {
        self.constants.epsilon
    }

    /// Same chain, different lift.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1], got {epsilon}")));
        }
        let mut out = self.clone();
        out.constants.growth += epsilon - self.constants.epsilon;
        out.constants.epsilon = epsilon;
        Ok(out)
    }

    #[inline]
    pub fn coefficient(&self, x: Vec2, t: f64) -> f64 {
        self.base.coefficient(x, t)
    }

    /// `F̃ = Ψ(F)`.
    pub fn truncated_value_with(&self, a: f64, xi: Vec2) -> f64 {
        self.cutoff.eval(self.base.value_with(a, xi)).0
    }

    pub fn truncated_gradient_with(&self, a: f64, xi: Vec2) -> Vec2 {
        let f = self.base.value_with(a, xi);
        let (_, d1, _) = self.cutoff.eval(f);
        if d1 == 0.0 {
            return Vec2::ZERO;
        }
        self.base.gradient_with(a, xi) * d1
    }

    /// `∇²F̃ = Ψ''(F) ∇F⊗∇F + Ψ'(F) ∇²F`.
    pub fn truncated_hessian_with(&self, a: f64, xi: Vec2) -> Result<Sym2> {
        let f = self.base.value_with(a, xi);
        let (_, d1, d2) = self.cutoff.eval(f);
        let hess = self.base.hessian_with(a, xi)?;
        if d1 == 0.0 && d2 == 0.0 {
            return Ok(Sym2::ZERO);
        }
        let g = self.base.gradient_with(a, xi);
        Ok(g.outer() * d2 + hess * d1)
    }

    /// `F̂_ε(x, t, ξ)`.
    pub fn value(&self, x: Vec2, t: f64, xi: Vec2) -> f64 {
        self.value_with(self.coefficient(x, t), xi)
    }

    pub fn value_with(&self, a: f64, xi: Vec2) -> f64 {
        self.hat_value_with(a, xi) + 0.5 * self.constants.epsilon * xi.norm_sq()
    }

    /// `F̂ = F̃ + Φ` (no lift).
    pub fn hat_value_with(&self, a: f64, xi: Vec2) -> f64 {
        self.truncated_value_with(a, xi) + self.convexifier.eval(xi).0
    }

    /// `Ĥ = ∇F̂` (no lift).
    pub fn hat_gradient_with(&self, a: f64, xi: Vec2) -> Vec2 {
        self.truncated_gradient_with(a, xi) + self.convexifier.eval(xi).1
    }

    /// `Ĥ_ε(x, t, ξ) = ∇F̂(x, t, ξ) + εξ`.
    pub fn h_epsilon(&self, x: Vec2, t: f64, xi: Vec2) -> Vec2 {
        self.h_epsilon_with(self.coefficient(x, t), xi)
    }

    pub fn h_epsilon_with(&self, a: f64, xi: Vec2) -> Vec2 {
        self.hat_gradient_with(a, xi) + xi * self.constants.epsilon
    }

    /// `∇²F̂` (no lift); fails on `∂E`.
    pub fn hat_hessian_with(&self, a: f64, xi: Vec2) -> Result<Sym2> {
        Ok(self.truncated_hessian_with(a, xi)? + self.convexifier.eval(xi).2)
    }

    /// `∇²F̂_ε = ∇²F̂ + εI`; fails on `∂E`.
    pub fn hessian(&self, x: Vec2, t: f64, xi: Vec2) -> Result<Sym2> {
        self.hessian_with(self.coefficient(x, t), xi)
    }

    pub fn hessian_with(&self, a: f64, xi: Vec2) -> Result<Sym2> {
        Ok(self.hat_hessian_with(a, xi)? + Sym2::IDENTITY * self.constants.epsilon)
    }

    /// Hessian used by the Newton solver: the full `∇²F̂_ε` off `∂E`, and only
    /// the `Φ + ε` part on it. The flag reports whether the fallback was used.
    pub fn solver_hessian_with(&self, a: f64, xi: Vec2) -> (Sym2, bool) {
        let g = self.base.body().gauge(xi);
        if (g - 1.0).abs() > BOUNDARY_TOL {
            if let Ok(h) = self.hessian_with(a, xi) {
                return (h, false);
            }
        }
        (
            self.convexifier.eval(xi).2 + Sym2::IDENTITY * self.constants.epsilon,
            true,
        )
    }

    /// `B̂_ε(x, t, ξ)(η, ζ)`.
    pub fn bilinear_form(&self, x: Vec2, t: f64, xi: Vec2, eta: Vec2, zeta: Vec2) -> Result<f64> {
        Ok(self.hessian(x, t, xi)?.bilinear(eta, zeta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Coefficient;
    use crate::gauge::ConvexBody;

    fn reg(p: f64, k: f64, eps: f64) -> RegularizedIntegrand {
        let spec =
            IntegrandSpec::new(ConvexBody::ball(1.0).unwrap(), p, Coefficient::constant(1.0))
                .unwrap();
        RegularizedIntegrand::build(spec, k, eps).unwrap()
    }

    #[test]
    fn cutoff_is_c2_at_both_ends() {
        let c = Cutoff::new(3.0, 1.0);
        let (v, d1, d2) = c.eval(3.0 + 1e-12);
        assert!((v - 3.0).abs() < 1e-11 && (d1 - 1.0).abs() < 1e-9 && d2.abs() < 1e-9);
        let (v, d1, d2) = c.eval(4.0 - 1e-12);
        assert!((v - 4.0).abs() < 1e-11 && d1.abs() < 1e-9 && d2.abs() < 1e-9);
        // monotone on the transition
        for i in 0..=100 {
            assert!(c.eval(3.0 + i as f64 / 100.0).1 >= 0.0);
        }
    }

    #[test]
    fn profile_derivatives_are_consistent() {
        let phi = Convexifier::build(2.0, 3.0, 2.0, 3.0);
        let h = 1e-5;
        for i in 0..200 {
            let r = 1.5 + i as f64 * 0.05;
            let (v, d1, d2) = phi.profile.eval(r);
            let (vp, d1p, _) = phi.profile.eval(r + h);
            let (vm, d1m, _) = phi.profile.eval(r - h);
            assert!(((vp - vm) / (2.0 * h) - d1).abs() < 1e-6 * (1.0 + d1.abs()), "r={r}");
            assert!(((d1p - d1m) / (2.0 * h) - d2).abs() < 1e-3 * (1.0 + d2.abs()), "r={r}");
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn rejects_epsilon_out_of_range() {
        let spec =
            IntegrandSpec::new(ConvexBody::ball(1.0).unwrap(), 2.0, Coefficient::constant(1.0))
                .unwrap();
        for eps in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(RegularizedIntegrand::build(spec.clone(), 1.0, eps).is_err());
        }
        assert!(RegularizedIntegrand::build(spec, 1.0, 1.0).is_ok());
    }

    #[test]
    fn chain_agrees_with_lifted_f_on_working_range() {
        let r = reg(2.0, 2.0, 0.3);
        let a = 1.0;
        for i in 0..200 {
            let xi = Vec2::from_angle(i as f64 * 0.13) * (3.0 * i as f64 / 200.0);
            let lifted = r.base().value_with(a, xi) + 0.15 * xi.norm_sq();
            assert_eq!(r.value_with(a, xi), lifted);
        }
    }

    #[test]
    fn flat_inside_and_constant_far_out() {
        let r = reg(2.0, 1.0, 0.5);
        assert_eq!(r.h_epsilon_with(1.0, Vec2::ZERO), Vec2::ZERO);
        let xi = Vec2::new(0.3, -0.4);
        assert_eq!(r.h_epsilon_with(1.0, xi), xi * 0.5);
        let n = r.constants().n;
        for k in 0..16 {
            let xi = Vec2::from_angle(k as f64) * (n * (1.01 + 0.3 * k as f64));
            assert_eq!(r.truncated_gradient_with(1.0, xi), Vec2::ZERO);
            let expect = r.convexifier().eval(xi).1 + xi * 0.5;
            assert_eq!(r.h_epsilon_with(1.0, xi), expect);
        }
    }

    #[test]
    fn bilinear_form_examples() {
        let r = reg(2.0, 1.0, 0.25);
        let x = Vec2::new(0.0, 0.0);
        assert_eq!(r.bilinear_form(x, 0.0, Vec2::new(2.0, 0.0), Vec2::ZERO, Vec2::new(1.0, 1.0)).unwrap(), 0.0);
        let v = r
            .bilinear_form(x, 0.0, Vec2::new(0.1, 0.2), Vec2::new(1.0, 2.0), Vec2::new(-3.0, 0.5))
            .unwrap();
        assert!((v - 0.25 * (-3.0 + 1.0)).abs() < 1e-15);
        assert!(matches!(
            r.bilinear_form(x, 0.0, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)),
            Err(Error::BoundarySingularity { .. })
        ));
    }
}
