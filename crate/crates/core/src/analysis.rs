//! Diagnostics on solved fields.
//!
//! Space-time samples are cell gradients `D_h u` at stored levels; a cell
//! belongs to a cylinder `Q_ρ(z₀) = B_ρ(x₀) × (t₀ − ρ², t₀]` when its center
//! lies in the ball and its level time in the interval. Continuity moduli use
//! node gradients (averages of adjacent cells) and the parabolic distance
//! `d_p(z₁, z₂) = |x₁ − x₂| + √|t₁ − t₂|`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gauge::DualSample;
use crate::gmaps::GDeltaMap;
use crate::grid::GridField;
use crate::math::{exp, ln, sqrt, CompensatedSum, Vec2};

/// Backward parabolic cylinder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder {
    pub center: Vec2,
    pub t0: f64,
    pub radius: f64,
}

impl Cylinder {
    pub fn new(center: Vec2, t0: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param("radius", format!("must be positive, got {radius}")));
        }
        Ok(Self { center, t0, radius })
    }

    pub fn contains(&self, x: Vec2, t: f64) -> bool {
        (x - self.center).norm() < self.radius
            && t <= self.t0
            && t > self.t0 - self.radius * self.radius
    }

    /// `B_ρ(x₀)` inside the rectangle and `(t₀−ρ², t₀]` inside the time axis.
    pub fn check_inside(&self, field: &GridField) -> Result<()> {
        let (x0, x1) = field.spec().x_range();
        let (y0, y1) = field.spec().y_range();
        let c = self.center;
        let r = self.radius;
        let tol = 1e-12;
        let spatial = c.x - r >= x0 - tol && c.x + r <= x1 + tol && c.y - r >= y0 - tol && c.y + r <= y1 + tol;
        let temporal = self.t0 - r * r >= field.t0() - tol && self.t0 <= field.final_time() + tol;
        if spatial && temporal {
            Ok(())
        } else {
            Err(Error::param("cylinder", format!("{self:?} leaves the solved domain")))
        }
    }
}

/// Cell gradients of `field` inside `cyl`.
pub fn cylinder_gradients(field: &GridField, cyl: &Cylinder) -> Result<Vec<Vec2>> {
    cyl.check_inside(field)?;
    let spec = field.spec();
    let mut out = Vec::new();
    for k in 0..field.level_count() {
        let t = field.time(k);
        if !(t <= cyl.t0 && t > cyl.t0 - cyl.radius * cyl.radius) {
            continue;
        }
        for j in 0..spec.cells_y() {
            for i in 0..spec.cells_x() {
                if cyl.contains(spec.cell_center(i, j), t) {
                    out.push(field.cell_gradient(k, i, j));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::param("cylinder", "contains no grid cells"));
    }
    Ok(out)
}

fn mean(samples: &[Vec2]) -> Vec2 {
    let mut sx = CompensatedSum::new();
    let mut sy = CompensatedSum::new();
    for g in samples {
        sx.add(g.x);
        sy.add(g.y);
    }
    Vec2::new(sx.value(), sy.value()) / samples.len() as f64
}

/// Cylinder average of `|D_h u − (D_h u)_{Q}|²`.
pub fn excess(field: &GridField, cyl: &Cylinder) -> Result<f64> {
    let samples = cylinder_gradients(field, cyl)?;
    let m = mean(&samples);
    let mut acc = CompensatedSum::new();
    for g in &samples {
        acc.add((*g - m).norm_sq());
    }
    Ok(acc.value() / samples.len() as f64)
}

fn fraction_above(samples: &[Vec2], e_star: Vec2, level: f64, threshold: f64) -> f64 {
    let hits = samples
        .iter()
        .filter(|g| g.dot(e_star) - level > threshold)
        .count();
    hits as f64 / samples.len() as f64
}

/// `|{⟨D_h u, e*⟩ − (1+δ) > threshold} ∩ Q| / |Q|` by cell counting.
pub fn superlevel_measure(
    field: &GridField,
    cyl: &Cylinder,
    e_star: Vec2,
    delta: f64,
    threshold: f64,
) -> Result<f64> {
    let samples = cylinder_gradients(field, cyl)?;
    Ok(fraction_above(&samples, e_star, 1.0 + delta, threshold))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    /// Some sampled `e*` has super-level complement below `ν |Q|`.
    NonDegenerate {
        /// Index into the dual sample.
        index: usize,
        e_star: Vec2,
        /// Polar angle of the sample direction.
        angle: f64,
        /// `|Q ∖ E^ν_{e*}| / |Q|`.
        complement: f64,
    },
    /// Every sampled `e*` has complement at least `ν |Q|`.
    Degenerate {
        min_complement: f64,
    },
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::NonDegenerate { .. } => "nondegenerate",
            Regime::Degenerate { .. } => "degenerate",
        }
    }
}

/// Splits on the measure of `E^ν_{e*} = {⟨D_h u, e*⟩ − (1+δ) > (1−ν)μ}`.
pub fn classify_regime(
    field: &GridField,
    cyl: &Cylinder,
    delta: f64,
    mu: f64,
    nu: f64,
    dual: &DualSample,
) -> Result<Regime> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be positive, got {mu}")));
    }
    if !(nu > 0.0 && nu <= 0.25) {
        return Err(Error::param("nu", format!("must lie in (0, 1/4], got {nu}")));
    }
    if dual.is_empty() {
        return Err(Error::param("dual", "empty dual sample"));
    }
    let samples = cylinder_gradients(field, cyl)?;
    let threshold = (1.0 - nu) * mu;
    let mut best: Option<(usize, f64)> = None;
    for (idx, e) in dual.points.iter().enumerate() {
        let complement = 1.0 - fraction_above(&samples, *e, 1.0 + delta, threshold);
        if best.is_none_or(|(_, c)| complement < c) {
            best = Some((idx, complement));
        }
    }
    let (index, complement) = best.unwrap();
    if complement < nu {
        Ok(Regime::NonDegenerate {
            index,
            e_star: dual.points[index],
            angle: dual.directions[index],
            complement,
        })
    } else {
        Ok(Regime::Degenerate {
            min_complement: complement,
        })
    }
}

/// Space-time window for modulus measurements; `stride` thins the nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub t_range: (f64, f64),
    pub stride: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModulusExponent {
    /// `osc ≡ 0` at every lag.
    Exact,
    /// Least-squares fit `log osc ≈ exponent · log r + log constant`.
    Fitted { exponent: f64, constant: f64, r2: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusFit {
    pub lags: Vec<f64>,
    /// Nondecreasing in the lag.
    pub osc: Vec<f64>,
    pub fit: ModulusExponent,
}

/// Lags `r_min · √2^m` up to `r_max`.
pub fn geometric_lags(r_min: f64, r_max: f64) -> Vec<f64> {
    let mut lags = Vec::new();
    let mut r = r_min;
    while r <= r_max * (1.0 + 1e-12) && lags.len() < 128 {
        lags.push(r);
        r *= core::f64::consts::SQRT_2;
    }
    lags
}

/// `osc(r) = max |G_δ(D_h u)(z₁) − G_δ(D_h u)(z₂)|` over sampled node pairs
/// with `d_p ≤ r`, and its log-log fit.
pub fn continuity_modulus(
    field: &GridField,
    map: &GDeltaMap,
    region: &Region,
    lags: &[f64],
) -> Result<ModulusFit> {
    if lags.len() < 3 {
        return Err(Error::param("lags", format!("need at least 3 lag bins, got {}", lags.len())));
    }
    if lags.windows(2).any(|w| !(w[1] > w[0])) || !(lags[0] > 0.0) {
        return Err(Error::param("lags", "must be positive and increasing"));
    }
    let spec = field.spec();
    let stride = region.stride.max(1);
    let mut points: Vec<(Vec2, f64, Vec2)> = Vec::new();
    for k in 0..field.level_count() {
        let t = field.time(k);
        if t < region.t_range.0 || t > region.t_range.1 {
            continue;
        }
        for j in (0..spec.ny()).step_by(stride) {
            for i in (0..spec.nx()).step_by(stride) {
                let x = spec.node(i, j);
                if x.x < region.x_range.0 || x.x > region.x_range.1 || x.y < region.y_range.0 || x.y > region.y_range.1 {
                    continue;
                }
                points.push((x, t, map.apply(field.node_gradient(k, i, j))));
            }
        }
    }
    if points.len() < 2 {
        return Err(Error::param("region", "contains fewer than two sample points"));
    }

    let r_max = *lags.last().unwrap();
    let mut osc = alloc::vec![0.0_f64; lags.len()];
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let (xa, ta, ga) = points[a];
            let (xb, tb, gb) = points[b];
            let d = (xa - xb).norm() + sqrt((ta - tb).abs());
            if d > r_max {
                continue;
            }
            let diff = (ga - gb).norm();
            let bin = lags.partition_point(|&r| r < d);
            if diff > osc[bin] {
                osc[bin] = diff;
            }
        }
    }
    for m in 1..osc.len() {
        osc[m] = osc[m].max(osc[m - 1]);
    }

    if osc.iter().all(|&o| o == 0.0) {
        return Ok(ModulusFit {
            lags: lags.to_vec(),
            osc,
            fit: ModulusExponent::Exact,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = lags
        .iter()
        .zip(&osc)
        .filter(|(_, &o)| o > 0.0)
        .map(|(&r, &o)| (ln(r), ln(o)))
        .unzip();
    let (exponent, intercept, r2) = crate::math::linear_fit(&xs, &ys)
        .ok_or_else(|| Error::param("lags", "fewer than two lag bins with positive oscillation"))?;
    Ok(ModulusFit {
        lags: lags.to_vec(),
        osc,
        fit: ModulusExponent::Fitted {
            exponent,
            constant: exp(intercept),
            r2,
        },
    })
}

/// `∬ |D_h u|²` over all solved levels `1..=nt` (rectangle rule in time).
pub fn gradient_energy(field: &GridField) -> f64 {
    let spec = field.spec();
    let mut acc = CompensatedSum::new();
    for k in 1..field.level_count() {
        for j in 0..spec.cells_y() {
            for i in 0..spec.cells_x() {
                acc.add(field.cell_gradient(k, i, j).norm_sq());
            }
        }
    }
    acc.value() * spec.cell_area() * field.dt()
}

/// `‖G_δ(D_h u) − G_δ(D_h w)‖_{L²_h}` over levels `1..=nt`.
pub fn truncated_gradient_distance(u: &GridField, w: &GridField, map: &GDeltaMap) -> Result<f64> {
    if !u.same_layout(w) {
        return Err(Error::GridMismatch("fields differ in grid or time axis".into()));
    }
    let spec = u.spec();
    let mut acc = CompensatedSum::new();
    for k in 1..u.level_count() {
        for j in 0..spec.cells_y() {
            for i in 0..spec.cells_x() {
                let a = map.apply(u.cell_gradient(k, i, j));
                let b = map.apply(w.cell_gradient(k, i, j));
                acc.add((a - b).norm_sq());
            }
        }
    }
    Ok(sqrt(acc.value() * spec.cell_area() * u.dt()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsConvergenceTable {
    pub reference_eps: f64,
    /// `(ε, distance to the reference)`, ε decreasing, reference excluded.
    pub rows: Vec<(f64, f64)>,
    pub monotone: bool,
    /// First consecutive pair `(ε_i, ε_{i+1})` whose distance grew by more
    /// than the tolerance.
    pub violation: Option<(f64, f64)>,
}

/// Relative slack allowed before a distance increase counts as non-monotone.
pub const EPS_MONOTONE_TOL: f64 = 0.05;

pub fn eps_convergence_table(solutions: &[(f64, &GridField)], map: &GDeltaMap) -> Result<EpsConvergenceTable> {
    if solutions.len() < 3 {
        return Err(Error::param("solutions", format!("need at least 3 ε levels, got {}", solutions.len())));
    }
    let mut sorted: Vec<(f64, &GridField)> = solutions.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (reference_eps, reference) = *sorted.last().unwrap();
    let mut rows = Vec::with_capacity(sorted.len() - 1);
    for &(eps, field) in &sorted[..sorted.len() - 1] {
        rows.push((eps, truncated_gradient_distance(field, reference, map)?));
    }
    let violation = rows
        .windows(2)
        .find(|w| w[1].1 > w[0].1 * (1.0 + EPS_MONOTONE_TOL))
        .map(|w| (w[0].0, w[1].0));
    Ok(EpsConvergenceTable {
        reference_eps,
        rows,
        monotone: violation.is_none(),
        violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::ConvexBody;
    use crate::grid::GridSpec;

    fn field_from(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync, n: usize, steps: usize) -> GridField {
        let spec = GridSpec::new(n, n, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let dt = 0.01;
        let levels = (0..=steps).map(|k| spec.sample(&|x: f64, y: f64, _t: f64| f(x, y, k as f64 * dt), 0.0)).collect();
        GridField::from_levels(spec, 0.0, dt, levels).unwrap()
    }

    #[test]
    fn excess_of_affine_field_is_zero() {
        let field = field_from(|x, y, _| 2.0 * x - 3.0 * y + 0.5, 17, 4);
        let cyl = Cylinder::new(Vec2::new(0.5, 0.5), 0.04, 0.2).unwrap();
        assert!(excess(&field, &cyl).unwrap() < 1e-24);
    }

    #[test]
    fn excess_of_two_slopes_is_one() {
        // gradient (±1, 0) on halves of equal measure: nodes on the odd
        // lattice put the kink on a cell edge
        let field = field_from(|x, _, _| (x - 0.5).abs(), 17, 2);
        let cyl = Cylinder::new(Vec2::new(0.5, 0.5), 0.02, 0.1).unwrap();
        let e = excess(&field, &cyl).unwrap();
        assert!((e - 1.0).abs() < 1e-12, "{e}");
    }

    #[test]
    fn empty_or_outside_cylinders_are_rejected() {
        let field = field_from(|x, _, _| x, 9, 2);
        assert!(Cylinder::new(Vec2::new(0.5, 0.5), 0.02, 0.0).is_err());
        let outside = Cylinder::new(Vec2::new(0.95, 0.5), 0.02, 0.1).unwrap();
        assert!(excess(&field, &outside).is_err());
        let tiny = Cylinder::new(Vec2::new(0.5, 0.5), 0.02, 1e-3).unwrap();
        assert!(excess(&field, &tiny).is_err());
    }

    #[test]
    fn regime_labels() {
        let body = ConvexBody::ball(1.0).unwrap();
        let dual = body.sample_dual_boundary(64).unwrap();
        let (delta, mu, nu) = (0.2, 0.5, 0.2);
        let steep = field_from(move |x, _, _| (1.0 + delta + mu) * x, 17, 2);
        let cyl = Cylinder::new(Vec2::new(0.5, 0.5), 0.02, 0.1).unwrap();
        match classify_regime(&steep, &cyl, delta, mu, nu, &dual).unwrap() {
            Regime::NonDegenerate { complement, e_star, .. } => {
                assert_eq!(complement, 0.0);
                assert!((e_star - Vec2::new(1.0, 0.0)).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let flat = field_from(|x, y, _| 0.5 * x + 0.3 * y, 17, 2);
        assert!(matches!(
            classify_regime(&flat, &cyl, delta, mu, nu, &dual).unwrap(),
            Regime::Degenerate { min_complement } if min_complement == 1.0
        ));
        assert!(classify_regime(&flat, &cyl, delta, mu, 0.3, &dual).is_err());
    }

    #[test]
    fn modulus_of_linear_truncation_has_unit_exponent() {
        let delta = 0.25;
        let field = field_from(move |x, _, _| 0.5 * x * x + (1.0 + delta) * x, 65, 0);
        let map = GDeltaMap::new(ConvexBody::ball(1.0).unwrap(), delta).unwrap();
        // interior nodes only: one-sided boundary gradients are O(h) off
        let region = Region { x_range: (0.05, 0.95), y_range: (0.05, 0.95), t_range: (0.0, 0.0), stride: 1 };
        // lags of several grid spacings keep the floor(r/h) staircase small
        let fit = continuity_modulus(&field, &map, &region, &geometric_lags(0.125, 0.9)).unwrap();
        assert!(fit.osc.windows(2).all(|w| w[1] >= w[0]));
        let ModulusExponent::Fitted { exponent, .. } = fit.fit else { panic!() };
        assert!((exponent - 1.0).abs() < 0.05, "{exponent}");

        let affine = field_from(|x, y, _| 0.1 * x + 0.2 * y, 9, 1);
        let region = Region { x_range: (0.0, 1.0), y_range: (0.0, 1.0), t_range: (0.0, 1.0), stride: 1 };
        let fit = continuity_modulus(&affine, &map, &region, &geometric_lags(0.1, 1.0)).unwrap();
        assert_eq!(fit.fit, ModulusExponent::Exact);
        assert!(continuity_modulus(&affine, &map, &region, &[0.1, 0.2]).is_err());
    }
}
