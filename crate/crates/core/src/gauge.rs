//! Minkowski functional of a planar convex body and its polar.
//!
//! For a bounded convex `E ⊂ ℝ²` with `0 ∈ Int E`,
//!
//! ```text
//!     |ξ|_E  = inf { t > 0 : ξ ∈ tE }          (gauge)
//!     |ξ|_E' = sup { ⟨ξ, e⟩ : e ∈ E }          (dual gauge, support function)
//!     E*     = { ξ : |ξ|_E' ≤ 1 }               (polar body)
//! ```
//!
//! and `|ξ|_E = sup { ⟨ξ, e*⟩ : e* ∈ ∂E* }`. The gauge is positively
//! homogeneous and subadditive but not symmetric in general.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{sqrt, Sym2, Vec2};

/// Relative tolerance below which `0` is considered to lie on a facet.
const INTERIOR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum BodyKind {
    /// `{ |ξ| ≤ radius }`.
    EuclideanBall { radius: f64 },
    /// `{ ξᵀ A ξ ≤ 1 }` for a symmetric positive-definite `A`.
    Ellipsoid { form: Sym2 },
    /// Convex hull of the listed vertices.
    Polytope { vertices: Vec<Vec2> },
}

/// Facet `⟨normal, ξ⟩ ≤ 1` of a polytope (normal scaled so the offset is one).
#[derive(Clone, Copy, Debug, PartialEq)]
struct Facet {
    normal: Vec2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexBody {
    kind: BodyKind,
    /// Hull vertices in counterclockwise order (polytopes only).
    hull: Vec<Vec2>,
    facets: Vec<Facet>,
    /// Inverse of the form (ellipsoids only), used by the support function.
    inverse_form: Sym2,
    inner_radius: f64,
    outer_radius: f64,
}

impl ConvexBody {
    pub fn ball(radius: f64) -> Result<Self> {
        Self::new(BodyKind::EuclideanBall { radius })
    }

    pub fn ellipsoid(form: Sym2) -> Result<Self> {
        Self::new(BodyKind::Ellipsoid { form })
    }

    pub fn polytope(vertices: Vec<Vec2>) -> Result<Self> {
        Self::new(BodyKind::Polytope { vertices })
    }

    /// The axis-aligned square with vertices `(±h, ±h)`.
    pub fn square(h: f64) -> Result<Self> {
        Self::polytope(alloc::vec![
            Vec2::new(h, h),
            Vec2::new(-h, h),
            Vec2::new(-h, -h),
            Vec2::new(h, -h),
        ])
    }

    pub fn new(kind: BodyKind) -> Result<Self> {
        let body = match &kind {
            BodyKind::EuclideanBall { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::DegenerateBody(format!(
                        "ball radius must be positive and finite, got {radius}"
                    )));
                }
                ConvexBody {
                    hull: Vec::new(),
                    facets: Vec::new(),
                    inverse_form: Sym2::ZERO,
                    inner_radius: *radius,
                    outer_radius: *radius,
                    kind,
                }
            }
            BodyKind::Ellipsoid { form } => {
                let det = form.det();
                if !(form.is_finite() && form.xx > 0.0 && det > 0.0) {
                    return Err(Error::DegenerateBody(format!(
                        "ellipsoid form must be positive definite, got {form:?}"
                    )));
                }
                let inverse_form = Sym2::new(form.yy / det, -form.xy / det, form.xx / det);
                let (lo, hi) = form.eigenvalues();
                ConvexBody {
                    hull: Vec::new(),
                    facets: Vec::new(),
                    inverse_form,
                    inner_radius: 1.0 / sqrt(hi),
                    outer_radius: 1.0 / sqrt(lo),
                    kind,
                }
            }
            BodyKind::Polytope { vertices } => {
                if vertices.iter().any(|v| !v.is_finite()) {
                    return Err(Error::DegenerateBody("non-finite vertex".into()));
                }
                let hull = convex_hull(vertices);
                if hull.len() < 3 {
                    return Err(Error::DegenerateBody(format!(
                        "polytope hull has {} vertices; need at least 3",
                        hull.len()
                    )));
                }
                let scale = hull.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let mut facets = Vec::with_capacity(hull.len());
                for i in 0..hull.len() {
                    let a = hull[i];
                    let b = hull[(i + 1) % hull.len()];
                    let edge = b - a;
                    // outward normal of a counterclockwise edge
                    let n = Vec2::new(edge.y, -edge.x);
                    let offset = n.dot(a);
                    if offset <= INTERIOR_TOL * n.norm() * scale {
                        return Err(Error::DegenerateBody(
                            "origin is not in the interior of the polytope".into(),
                        ));
                    }
                    facets.push(Facet {
                        normal: n / offset,
                    });
                }
                let inner = facets
                    .iter()
                    .map(|f| 1.0 / f.normal.norm())
                    .fold(f64::INFINITY, f64::min);
                ConvexBody {
                    hull,
                    facets,
                    inverse_form: Sym2::ZERO,
                    inner_radius: inner,
                    outer_radius: scale,
                    kind,
                }
            }
        };
        body.check_sandwich()?;
        Ok(body)
    }

    /// Sampled check of `B_r ⊂ E ⊂ B_R` along boundary rays.
    fn check_sandwich(&self) -> Result<()> {
        const RAYS: usize = 64;
        for k in 0..RAYS {
            let d = Vec2::from_angle(2.0 * PI * k as f64 / RAYS as f64);
            let boundary_norm = 1.0 / self.gauge(d);
            if boundary_norm < self.inner_radius * (1.0 - 1e-9)
                || boundary_norm > self.outer_radius * (1.0 + 1e-9)
            {
                return Err(Error::DegenerateBody(format!(
                    "radii sandwich violated along angle {k}/{RAYS}: boundary at {boundary_norm}"
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    /// Hull vertices (counterclockwise) for polytopes, empty otherwise.
    pub fn hull(&self) -> &[Vec2] {
        &self.hull
    }

    /// `(r_E, R_E)`: largest inscribed radius and the smallest practical outer
    /// radius (max vertex norm / max semi-axis).
    pub fn radii(&self) -> (f64, f64) {
        (self.inner_radius, self.outer_radius)
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    /// `ξ ∈ tE` for a polytope, via the half-plane representation.
    fn polytope_contains_scaled(&self, xi: Vec2, t: f64) -> bool {
        self.facets.iter().all(|f| f.normal.dot(xi) <= t)
    }

    /// The Minkowski functional `|ξ|_E`.
    pub fn gauge(&self, xi: Vec2) -> f64 {
        match &self.kind {
            BodyKind::EuclideanBall { radius } => xi.norm() / radius,
            BodyKind::Ellipsoid { form } => sqrt(form.bilinear(xi, xi).max(0.0)),
            BodyKind::Polytope { .. } => {
                let len = xi.norm();
                if len == 0.0 {
                    return 0.0;
                }
                // B_r ⊂ E ⊂ B_R brackets the gauge in [|ξ|/R, |ξ|/r]
                let mut lo = len / self.outer_radius * (1.0 - 1e-12);
                let mut hi = len / self.inner_radius * (1.0 + 1e-12);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.polytope_contains_scaled(xi, mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }

    /// Facet index realizing the gauge of `ξ` (polytopes only).
    fn active_facet(&self, xi: Vec2) -> Option<usize> {
        let mut best = None;
        let mut best_val = f64::NEG_INFINITY;
        for (i, f) in self.facets.iter().enumerate() {
            let v = f.normal.dot(xi);
            if v > best_val {
                best_val = v;
                best = Some(i);
            }
        }
        best
    }

    /// Gradient of the gauge (zero at the origin). For polytopes this is the
    /// normal of the facet hit by the ray through `ξ`, which is the gradient
    /// almost everywhere.
    pub fn gauge_gradient(&self, xi: Vec2) -> Vec2 {
        let len = xi.norm();
        if len == 0.0 {
            return Vec2::ZERO;
        }
        match &self.kind {
            BodyKind::EuclideanBall { radius } => xi / (radius * len),
            BodyKind::Ellipsoid { form } => {
                let g = self.gauge(xi);
                form.apply(xi) / g
            }
            BodyKind::Polytope { .. } => self
                .active_facet(xi)
                .map(|i| self.facets[i].normal)
                .unwrap_or(Vec2::ZERO),
        }
    }

    /// Hessian of the gauge (zero at the origin; zero a.e. for polytopes).
    pub fn gauge_hessian(&self, xi: Vec2) -> Sym2 {
        let len = xi.norm();
        if len == 0.0 {
            return Sym2::ZERO;
        }
        match &self.kind {
            BodyKind::EuclideanBall { radius } => {
                let u = xi / len;
                (Sym2::IDENTITY - u.outer()) * (1.0 / (radius * len))
            }
            BodyKind::Ellipsoid { form } => {
                let g = self.gauge(xi);
                let ax = form.apply(xi);
                (*form - ax.outer() * (1.0 / (g * g))) * (1.0 / g)
            }
            BodyKind::Polytope { .. } => Sym2::ZERO,
        }
    }

    /// The dual map `|ξ|_E' = sup_{e ∈ E} ⟨ξ, e⟩`.
    pub fn dual_gauge(&self, xi: Vec2) -> f64 {
        match &self.kind {
            BodyKind::EuclideanBall { radius } => radius * xi.norm(),
            BodyKind::Ellipsoid { .. } => sqrt(self.inverse_form.bilinear(xi, xi).max(0.0)),
            BodyKind::Polytope { .. } => self
                .hull
                .iter()
                .map(|v| v.dot(xi))
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0),
        }
    }

    /// `ξ ∈ E_δ`, the outer parallel set `{ |ξ|_E ≤ 1 + δ }`.
    pub fn parallel_set_contains(&self, delta: f64, xi: Vec2) -> bool {
        self.gauge(xi) <= 1.0 + delta
    }

    /// Boundary points of the polar body `E*` at `count` equally spaced angles.
    pub fn sample_dual_boundary(&self, count: usize) -> Result<DualSample> {
        if count < 4 {
            return Err(Error::param("count", format!("need at least 4 samples, got {count}")));
        }
        let angles: Vec<f64> = (0..count)
            .map(|k| 2.0 * PI * k as f64 / count as f64)
            .collect();
        Ok(self.sample_dual_boundary_at(&angles))
    }

    /// Boundary points of `E*` along the given angles: `e* = d / |d|_E'`.
    pub fn sample_dual_boundary_at(&self, angles: &[f64]) -> DualSample {
        let points = angles
            .iter()
            .map(|&a| {
                let d = Vec2::from_angle(a);
                d / self.dual_gauge(d)
            })
            .collect();
        DualSample {
            directions: angles.to_vec(),
            points,
        }
    }
}

/// Sampled boundary of the polar body.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSample {
    pub directions: Vec<f64>,
    pub points: Vec<Vec2>,
}

impl DualSample {
    /// `max_k ⟨ξ, e*_k⟩`, a lower approximation of the gauge.
    pub fn gauge_lower(&self, xi: Vec2) -> f64 {
        self.points
            .iter()
            .map(|p| p.dot(xi))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Andrew's monotone chain; returns the strict hull counterclockwise.
fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 {
            let n = lower.len();
            if (lower[n - 1] - lower[n - 2]).cross(p - lower[n - 2]) <= 0.0 {
                lower.pop();
            } else {
                break;
            }
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 {
            let n = upper.len();
            if (upper[n - 1] - upper[n - 2]).cross(p - upper[n - 2]) <= 0.0 {
                upper.pop();
            } else {
                break;
            }
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
