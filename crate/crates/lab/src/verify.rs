//! Property suites.
//!
//! Every suite draws from its own ChaCha stream derived from the config seed,
//! so a suite's verdict depends only on the config. The suite functions are
//! public and parameterized by sample count and tolerance so that stricter
//! harnesses can reuse them.

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use degenlab_core::analysis::{self, Cylinder, Regime};
use degenlab_core::iteration::{self, AbsorptionOutcome, AbsorptionParams, GeometricOutcome};
use degenlab_core::solver::{self, Flux};
use degenlab_core::{
    ConstantField, ConvexBody, GDeltaMap, GridField, GridSpec, IntegrandSpec, RegularizedIntegrand, ScalarField,
    Sym2, Vec2,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{BodyConfig, ExperimentConfig};
use crate::{LabError, Result};

/// Outcome of one property over many samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub samples: usize,
    pub failures: usize,
    /// Largest `lhs − rhs` seen (negative when every sample had slack).
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            samples: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
            first_failure: None,
        }
    }

    /// Records `lhs ≤ rhs + tol`.
    pub fn le(&mut self, lhs: f64, rhs: f64, tol: f64, ctx: impl FnOnce() -> String) {
        self.samples += 1;
        let gap = lhs - rhs;
        if gap > self.worst || self.worst.is_nan() {
            self.worst = gap;
        }
        if !(lhs <= rhs + tol) {
            self.fail(|| format!("{} (lhs {lhs:e}, rhs {rhs:e})", ctx()));
        }
    }

    pub fn holds(&mut self, ok: bool, ctx: impl FnOnce() -> String) {
        self.samples += 1;
        if !ok {
            self.fail(ctx);
        }
    }

    fn fail(&mut self, ctx: impl FnOnce() -> String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(ctx());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.samples > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn new(name: &str, checks: Vec<Check>) -> Self {
        Self {
            name: name.into(),
            passed: checks.iter().all(Check::passed),
            checks,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config_hash: String,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn vec_in(rng: &mut ChaCha8Rng, range: f64) -> Vec2 {
    Vec2::new(rng.random_range(-range..range), rng.random_range(-range..range))
}

fn polar(rng: &mut ChaCha8Rng, r_max: f64) -> Vec2 {
    Vec2::from_angle(rng.random_range(0.0..TAU)) * rng.random_range(0.0..r_max)
}

/// Ball, ellipsoid `x²/4 + y² ≤ 1`, square `(±1, ±1)` and an irregular pentagon.
pub fn reference_bodies() -> Vec<(String, ConvexBody)> {
    let pentagon = ConvexBody::polytope(vec![
        Vec2::new(1.2, 0.1),
        Vec2::new(0.4, 1.0),
        Vec2::new(-0.9, 0.6),
        Vec2::new(-0.7, -0.8),
        Vec2::new(0.6, -1.1),
    ])
    .expect("pentagon contains the origin");
    vec![
        ("ball".into(), ConvexBody::ball(1.0).unwrap()),
        ("ellipsoid".into(), ConvexBody::ellipsoid(Sym2::new(0.25, 0.0, 1.0)).unwrap()),
        ("square".into(), ConvexBody::square(1.0).unwrap()),
        ("pentagon".into(), pentagon),
    ]
}

fn body_label(cfg: &BodyConfig) -> String {
    match cfg {
        BodyConfig::Ball { .. } => "config ball".into(),
        BodyConfig::Ellipsoid { .. } => "config ellipsoid".into(),
        BodyConfig::Polytope { .. } => "config polytope".into(),
    }
}

/// Homogeneity, triangle, reverse triangle, Lipschitz, sandwich and the
/// normalized-difference inequality, with relative tolerance `tol`.
pub fn gauge_suite(bodies: &[(String, ConvexBody)], rng: &mut ChaCha8Rng, n: usize, tol: f64) -> SuiteReport {
    let mut homog = Check::new("homogeneity");
    let mut tri = Check::new("triangle");
    let mut rev = Check::new("reverse triangle");
    let mut lip = Check::new("lipschitz 1/r_E");
    let mut sandwich = Check::new("sandwich");
    let mut normalized = Check::new("normalized difference");
    let mut dual = Check::new("dual sample lower bound");
    for (name, b) in bodies {
        let (r, big_r) = b.radii();
        let sample = b.sample_dual_boundary(360).expect("positive count");
        for _ in 0..n {
            let xi = vec_in(rng, 10.0);
            let eta = vec_in(rng, 10.0);
            let lambda = 10f64.powf(rng.random_range(-2.0..2.0));
            let (gx, ge) = (b.gauge(xi), b.gauge(eta));
            let scale = 1.0 + gx + ge;
            let ctx = || format!("{name} xi={xi:?} eta={eta:?}");
            let lhs = b.gauge(xi * lambda);
            homog.le((lhs - lambda * gx).abs(), 0.0, tol * (1.0 + lambda * gx), || format!("{} λ={lambda}", ctx()));
            tri.le(b.gauge(xi + eta), gx + ge, tol * scale, ctx);
            rev.le((gx - ge).abs(), b.gauge(xi - eta).max(b.gauge(eta - xi)), tol * scale, ctx);
            lip.le((gx - ge).abs(), (xi - eta).norm() / r, tol * scale, ctx);
            sandwich.le(xi.norm() / big_r, gx, tol * scale, ctx);
            sandwich.le(gx, xi.norm() / r, tol * scale, ctx);
            if xi.norm() > 1e-3 && eta.norm() > 1e-3 {
                let lhs = b.gauge(xi / gx - eta / ge);
                let rhs = big_r / r * (2.0 / gx) * b.gauge(xi - eta);
                normalized.le(lhs, rhs, tol * (1.0 + rhs), ctx);
            }
            dual.le(sample.gauge_lower(xi), gx, tol * scale, ctx);
        }
    }
    SuiteReport::new("gauge", vec![homog, tri, rev, lip, sandwich, normalized, dual])
}

/// Which `δ`-collapse constant to test against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollapseBound {
    /// `R_E δ`, the bound implied by the sandwich.
    Sharp,
    /// `δ / r_E` as commonly stated.
    Literal,
}

/// Forward and inverse Lipschitz bounds of `G_δ` and the uniform collapse.
pub fn g_delta_suite(
    bodies: &[(String, ConvexBody)],
    deltas: &[f64],
    rng: &mut ChaCha8Rng,
    n: usize,
    tol: f64,
    collapse: CollapseBound,
) -> SuiteReport {
    let mut forward = Check::new("forward lipschitz");
    let mut inverse = Check::new("inverse lipschitz");
    let mut coll = Check::new(match collapse {
        CollapseBound::Sharp => "collapse R_E*delta",
        CollapseBound::Literal => "collapse delta/r_E",
    });
    for (name, b) in bodies {
        let g0 = GDeltaMap::new(b.clone(), 0.0).expect("δ = 0 is valid");
        for &delta in deltas {
            let map = GDeltaMap::new(b.clone(), delta).expect("δ validated");
            let fwd = map.lipschitz_forward_bound();
            let inv = map.lipschitz_inverse_bound().expect("δ > 0");
            let bound = match collapse {
                CollapseBound::Sharp => map.collapse_bound(),
                CollapseBound::Literal => delta / b.inner_radius(),
            };
            for _ in 0..n {
                let xi = vec_in(rng, 8.0);
                let eta = vec_in(rng, 8.0);
                let ctx = || format!("{name} δ={delta} xi={xi:?} eta={eta:?}");
                let dist = (xi - eta).norm();
                forward.le((map.apply(xi) - map.apply(eta)).norm(), fwd * dist, tol * (1.0 + dist), ctx);

                // ξ outside the (1+δ)-parallel set
                let d = Vec2::from_angle(rng.random_range(0.0..TAU));
                let outside = d * ((1.0 + delta + rng.random_range(0.0..6.0)) / b.gauge(d));
                let rhs = inv * (g0.apply(outside) - g0.apply(eta)).norm();
                inverse.le((outside - eta).norm(), rhs, tol * (1.0 + rhs), || {
                    format!("{name} δ={delta} xi={outside:?} eta={eta:?}")
                });

                coll.le((map.apply(xi) - g0.apply(xi)).norm(), bound, tol, ctx);
            }
        }
    }
    SuiteReport::new("g_delta", vec![forward, inverse, coll])
}

fn central_gradient(f: impl Fn(Vec2) -> f64, xi: Vec2, h: f64) -> Vec2 {
    Vec2::new(
        (f(xi + Vec2::new(h, 0.0)) - f(xi - Vec2::new(h, 0.0))) / (2.0 * h),
        (f(xi + Vec2::new(0.0, h)) - f(xi - Vec2::new(0.0, h))) / (2.0 * h),
    )
}

fn is_unit_ball(b: &ConvexBody) -> bool {
    matches!(b.kind(), degenlab_core::BodyKind::EuclideanBall { radius } if *radius == 1.0)
}

/// Vanishing on `E`, convexity, gradient against differences and, for the
/// unit-ball prototype with `p ≥ 2`, the Hessian sandwich.
pub fn integrand_suite(spec: &IntegrandSpec, domain: ([f64; 2], [f64; 2]), rng: &mut ChaCha8Rng, n: usize) -> SuiteReport {
    let b = spec.body();
    let mut vanish = Check::new("vanishes on E");
    let mut convex = Check::new("midpoint convexity");
    let mut grad = Check::new("gradient vs differences");
    let mut sandwich = Check::new("prototype hessian sandwich");
    let point = |rng: &mut ChaCha8Rng| {
        Vec2::new(
            rng.random_range(domain.0[0]..=domain.0[1]),
            rng.random_range(domain.1[0]..=domain.1[1]),
        )
    };
    for _ in 0..n {
        let x = point(rng);
        let t = rng.random_range(0.0..1.0);
        let d = Vec2::from_angle(rng.random_range(0.0..TAU));
        let inside = d * (rng.random_range(0.0..1.0) / b.gauge(d));
        vanish.holds(
            spec.value(x, t, inside) == 0.0 && spec.gradient(x, t, inside) == Vec2::ZERO,
            || format!("xi={inside:?}"),
        );

        let xi = vec_in(rng, 4.0);
        let eta = vec_in(rng, 4.0);
        let mid = spec.value(x, t, (xi + eta) * 0.5);
        let avg = 0.5 * (spec.value(x, t, xi) + spec.value(x, t, eta));
        convex.le(mid, avg, 1e-12 * (1.0 + avg), || format!("xi={xi:?} eta={eta:?}"));

        if (b.gauge(xi) - 1.0).abs() > 0.05 {
            let g = spec.gradient(x, t, xi);
            let fd = central_gradient(|z| spec.value(x, t, z), xi, 1e-6);
            grad.le((g - fd).norm(), 0.0, 1e-6 * (1.0 + g.norm()), || format!("xi={xi:?}: {g:?} vs {fd:?}"));
        }

        if is_unit_ball(b) && spec.p() >= 2.0 {
            let r = rng.random_range(1.001..10.0);
            let xi = Vec2::from_angle(rng.random_range(0.0..TAU)) * r;
            let eta = vec_in(rng, 1.0);
            if eta.norm() > 1e-3 {
                if let Ok(h) = spec.hessian(x, t, xi) {
                    let q = h.bilinear(eta, eta) / eta.norm_sq();
                    let (lo, hi) = spec.prototype_hessian_bounds(xi);
                    sandwich.le(lo, q, 1e-8, || format!("lower at xi={xi:?}"));
                    sandwich.le(q, hi, 1e-8, || format!("upper at xi={xi:?}"));
                }
            }
        }
    }
    let mut checks = vec![vanish, convex, grad];
    if sandwich.samples > 0 {
        checks.push(sandwich);
    }
    SuiteReport::new("integrand", checks)
}

/// Monotonicity with the `ε` gap, quadratic growth, ellipticity, and the
/// first three convexifier properties plus its recorded Hessian bound.
pub fn regularization_suite(reg: &RegularizedIntegrand, rng: &mut ChaCha8Rng, n: usize, gap_tol: f64) -> SuiteReport {
    let c = *reg.constants();
    let eps = reg.epsilon();
    let mut mono = Check::new("monotonicity gap");
    let mut growth = Check::new("quadratic growth");
    let mut ellip = Check::new("ellipticity >= eps");
    let mut phi_zero = Check::new("phi vanishes on ball K+R_E");
    let mut phi_grad = Check::new("phi gradient bound");
    let mut phi_ellip = Check::new("phi ellipticity beyond K+2R_E");
    let mut phi_hess = Check::new("phi hessian within recorded bound");
    let x = Vec2::new(0.2, -0.1);
    let t = 0.3;
    for i in 0..n {
        let a = polar(rng, 1.2 * c.n);
        let b = polar(rng, 1.2 * c.n);
        let gap = (reg.h_epsilon(x, t, a) - reg.h_epsilon(x, t, b)).dot(a - b);
        mono.le(eps * (a - b).norm_sq(), gap, gap_tol * (1.0 + (a - b).norm_sq()), || {
            format!("a={a:?} b={b:?}")
        });

        let z = polar(rng, 10.0 * c.n);
        growth.le(reg.h_epsilon(x, t, z).norm(), c.growth * (1.0 + z.norm()), 0.0, || format!("xi={z:?}"));

        let w = polar(rng, 1.2 * c.n);
        if let Ok(h) = reg.hessian(x, t, w) {
            ellip.le(eps, h.eigenvalues().0, 1e-9 * (1.0 + h.norm()), || format!("xi={w:?}"));
        }

        let r = 3.0 * c.n * (i as f64 + 0.5) / n as f64;
        let xi = Vec2::from_angle(rng.random_range(0.0..TAU)) * r;
        let (v, g, h) = reg.convexifier().eval(xi);
        if r <= c.k + c.big_r_e {
            phi_zero.holds(v == 0.0 && g == Vec2::ZERO && h == Sym2::ZERO, || format!("r={r}"));
        }
        phi_grad.le(g.norm(), (2.0 * c.c_f + 1.0) * r, 1e-12 * (1.0 + r), || format!("r={r}"));
        if r >= c.k + 2.0 * c.big_r_e {
            phi_ellip.le(c.c_f + 1.0, h.eigenvalues().0, 1e-12 * (c.c_f + 1.0), || format!("r={r}"));
        }
        phi_hess.le(h.norm(), c.phi_hessian_bound, 1e-12 * c.phi_hessian_bound, || format!("r={r}"));
    }
    let checks = vec![mono, growth, ellip, phi_zero, phi_grad, phi_ellip, phi_hess];
    SuiteReport::new("regularization", checks)
}

/// Empirical ellipticity of `∇²F̂` on the annulus `1+δ ≤ gauge ≤ 1/δ` and
/// the check that `B̂_ε` Rayleigh quotients lie in `[ε+λ_emp, ε+Λ_emp]`.
pub struct AnnulusEllipticity {
    pub lambda: f64,
    pub big_lambda: f64,
    pub check: Check,
}

pub fn annulus_ellipticity(reg: &RegularizedIntegrand, delta: f64, rng: &mut ChaCha8Rng, n: usize) -> AnnulusEllipticity {
    let b = reg.base().body().clone();
    let eps = reg.epsilon();
    let mut samples = Vec::with_capacity(n);
    let mut lambda = f64::INFINITY;
    let mut big_lambda: f64 = 0.0;
    for _ in 0..n {
        let x = vec_in(rng, 1.0);
        let t = rng.random_range(0.0..1.0);
        let d = Vec2::from_angle(rng.random_range(0.0..TAU));
        let xi = d * (rng.random_range(1.0 + delta..=1.0 / delta) / b.gauge(d));
        let a = reg.coefficient(x, t);
        if let Ok(h) = reg.hat_hessian_with(a, xi) {
            let (lo, hi) = h.eigenvalues();
            lambda = lambda.min(lo);
            big_lambda = big_lambda.max(hi);
            samples.push((x, t, xi));
        }
    }
    let mut check = Check::new("B_eps rayleigh within annulus bounds");
    for (x, t, xi) in samples {
        let eta = Vec2::from_angle(rng.random_range(0.0..TAU));
        if let Ok(q) = reg.bilinear_form(x, t, xi, eta, eta) {
            let scale = 1e-10 * (1.0 + big_lambda);
            check.le(eps + lambda, q, scale, || format!("lower at xi={xi:?}"));
            check.le(q, eps + big_lambda, scale, || format!("upper at xi={xi:?}"));
        }
    }
    AnnulusEllipticity {
        lambda,
        big_lambda,
        check,
    }
}

fn frozen(g: Arc<dyn ScalarField>) -> Arc<dyn ScalarField> {
    Arc::new(move |x: f64, y: f64, _t: f64| g.eval(x, y, 0.0))
}

/// Max principle and energy dissipation on a coarse copy of the config
/// problem with `f ≡ 0` and data frozen at `t = 0`; stationarity of a
/// sub-unit plane; Steklov averages of constants.
pub fn solver_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    let spec = GridSpec::new(
        17,
        17,
        (cfg.grid.x_range[0], cfg.grid.x_range[1]),
        (cfg.grid.y_range[0], cfg.grid.y_range[1]),
    )?;
    let integrand = cfg.integrand()?;
    let body = integrand.body().clone();
    let data = frozen(cfg.data_field()?);
    let dt = cfg.time.dt;
    let solver_cfg = cfg.solver.to_core();
    let zero = ConstantField(0.0);
    let data_levels = GridField::new(spec, 0.0, dt, data.clone())?;
    let data_sup = data_levels.sup_norm(0);
    let k = 2.0 * crate::run::gradient_sup(&data_levels).max(1.0);

    let mut maxp = Check::new("max principle");
    let mut diss = Check::new("energy dissipation");
    for &eps in &cfg.epsilons {
        let reg = RegularizedIntegrand::build(integrand.clone(), k, eps)?;
        let mut field = GridField::new(spec, 0.0, dt, data.clone())?;
        let mut e_prev = solver::discrete_energy(&spec, &reg, field.last(), 0.0);
        for step in 1..=5 {
            let st = solver::advance(&mut field, &reg, &zero, &solver_cfg)
                .map_err(|source| LabError::Solve { epsilon: eps, step, source })?;
            maxp.le(st.sup_norm, data_sup, 1e-8, || format!("eps={eps} step {step}"));
            diss.le(st.energy + st.increment_sq / dt, e_prev, 1e-9, || format!("eps={eps} step {step}"));
            e_prev = st.energy;
        }
    }

    let mut stationary = Check::new("sub-unit plane is stationary");
    let mut residual = Check::new("degenerate residual of plane");
    let d = Vec2::new(0.6, 0.8);
    let slope = d * (0.9 / body.gauge(d));
    let plane: Arc<dyn ScalarField> = Arc::new(move |x: f64, y: f64, _t: f64| slope.x * x + slope.y * y);
    let reg = RegularizedIntegrand::build(integrand.clone(), k, 1e-6)?;
    let (field, _) = solver::solve(spec, 0.0, dt, 5, plane, &reg, &zero, &solver_cfg)
        .map_err(|source| LabError::Solve { epsilon: 1e-6, step: 0, source })?;
    for k in 1..=field.steps() {
        let drift = field.level(k).iter().zip(field.level(k - 1)).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        stationary.le(drift, 0.0, 1e-8, || format!("step {k}"));
    }
    let (x0, x1) = spec.x_range();
    let (y0, y1) = spec.y_range();
    let radius = 0.25 * (x1 - x0).min(y1 - y0);
    let r = solver::weak_residual(&field, &reg, &zero, radius, Flux::Degenerate)?;
    residual.le(r.value, 0.0, 1e-8, || "plane".into());

    let mut steklov = Check::new("steklov of constant");
    let consts = GridField::from_levels(spec, 0.0, 0.1, vec![vec![2.5; spec.len()]; 11])?;
    let avg = solver::steklov_average(&consts, 0.25)?;
    for k in 0..avg.level_count() {
        let expect = if consts.time(k) < 1.0 - 0.25 { 2.5 } else { 0.0 };
        steklov.holds(avg.level(k).iter().all(|&v| (v - expect).abs() < 1e-12), || format!("level {k}"));
    }
    Ok(SuiteReport::new("solver", vec![maxp, diss, stationary, residual, steklov]))
}

fn random_field(rng: &mut ChaCha8Rng, spec: GridSpec, levels: usize, dt: f64) -> GridField {
    let data = (0..levels)
        .map(|_| (0..spec.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    GridField::from_levels(spec, 0.0, dt, data).expect("consistent layout")
}

/// Cell gradients in the cylinder, recomputed from node values.
pub fn brute_force_gradients(field: &GridField, cyl: &Cylinder) -> Vec<Vec2> {
    let spec = field.spec();
    let (hx, hy) = (spec.hx(), spec.hy());
    let mut out = Vec::new();
    for k in 0..field.level_count() {
        let t = field.time(k);
        for j in 0..spec.ny() - 1 {
            for i in 0..spec.nx() - 1 {
                let c = spec.cell_center(i, j);
                let inside = (c - cyl.center).norm() < cyl.radius && t <= cyl.t0 && t > cyl.t0 - cyl.radius * cyl.radius;
                if inside {
                    let v = field.level(k);
                    let u00 = v[j * spec.nx() + i];
                    out.push(Vec2::new(
                        (v[j * spec.nx() + i + 1] - u00) / hx,
                        (v[(j + 1) * spec.nx() + i] - u00) / hy,
                    ));
                }
            }
        }
    }
    out
}

/// Excess affine invariance, superlevel monotonicity, regime labels against
/// an independent recount, and monotone oscillation.
pub fn analysis_suite(body: &ConvexBody, dual_count: usize, rng: &mut ChaCha8Rng, fields: usize) -> Result<SuiteReport> {
    let n = 17;
    let spec = GridSpec::new(n, n, (0.0, 1.0), (0.0, 1.0))?;
    let cyl = Cylinder::new(Vec2::new(0.5, 0.5), 0.03, 0.17)?;
    let dual = body.sample_dual_boundary(dual_count)?;
    let mut affine = Check::new("excess affine invariance");
    let mut mono = Check::new("superlevel monotone");
    let mut regime = Check::new("regime matches recount");
    let mut osc = Check::new("oscillation nondecreasing");
    let map = GDeltaMap::new(body.clone(), 0.25)?;
    let region = analysis::Region {
        x_range: (0.0, 1.0),
        y_range: (0.0, 1.0),
        t_range: (0.0, 0.03),
        stride: 2,
    };
    let lags = analysis::geometric_lags(0.05, 0.8);
    for f in 0..fields {
        let u = random_field(rng, spec, 4, 0.01);
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let shifted: Vec<Vec<f64>> = u
            .levels()
            .iter()
            .map(|l| {
                l.iter()
                    .enumerate()
                    .map(|(idx, v)| {
                        let p = spec.node(idx % n, idx / n);
                        v + a * p.x + b * p.y
                    })
                    .collect()
            })
            .collect();
        let w = GridField::from_levels(spec, 0.0, 0.01, shifted)?;
        let (e1, e2) = (analysis::excess(&u, &cyl)?, analysis::excess(&w, &cyl)?);
        affine.le((e1 - e2).abs(), 0.0, 1e-9 * (1.0 + e1), || format!("field {f}"));

        let e = dual.points[rng.random_range(0..dual.len())];
        let t1 = rng.random_range(-5.0..5.0);
        let lo = analysis::superlevel_measure(&u, &cyl, e, 0.1, t1)?;
        let hi = analysis::superlevel_measure(&u, &cyl, e, 0.1, t1 + rng.random_range(0.0..5.0))?;
        mono.le(hi, lo, 0.0, || format!("field {f}"));

        let (delta, mu, nu) = (0.1, rng.random_range(0.1..4.0), rng.random_range(0.01..0.25));
        let label = analysis::classify_regime(&u, &cyl, delta, mu, nu, &dual)?;
        let grads = brute_force_gradients(&u, &cyl);
        let threshold = (1.0 - nu) * mu;
        let complements: Vec<f64> = dual
            .points
            .iter()
            .map(|e| {
                let above = grads.iter().filter(|g| g.dot(*e) - (1.0 + delta) > threshold).count();
                1.0 - above as f64 / grads.len() as f64
            })
            .collect();
        let expect_nondegenerate = complements.iter().any(|&c| c < nu);
        let agrees = match label {
            Regime::NonDegenerate { complement, index, .. } => {
                expect_nondegenerate && complements[index] == complement && complements.iter().all(|&c| c >= complement)
            }
            Regime::Degenerate { .. } => !expect_nondegenerate,
        };
        regime.holds(agrees, || format!("field {f}: {label:?}"));

        let fit = analysis::continuity_modulus(&u, &map, &region, &lags)?;
        osc.holds(fit.osc.windows(2).all(|w| w[1] >= w[0]), || format!("field {f}"));
    }
    Ok(SuiteReport::new("analysis", vec![affine, mono, regime, osc]))
}

/// The worked examples of the two iteration lemmas.
pub fn iteration_suite() -> Result<SuiteReport> {
    let mut geo = Check::new("geometric trajectory");
    match iteration::geometric_convergence(1.0, 2.0, 1.0, 0.5, 60)? {
        GeometricOutcome::Converged {
            iterates,
            threshold,
            below_tolerance_at,
            monotone,
        } => {
            let exact = iterates.iter().enumerate().all(|(i, &y)| y == 0.5f64.powi(i as i32 + 1));
            geo.holds(threshold == 0.5 && exact && monotone && below_tolerance_at.is_some(), || {
                format!("{:?}", &iterates[..4])
            });
        }
        other => geo.holds(false, || format!("{other:?}")),
    }
    let mut reject = Check::new("geometric threshold rejection");
    reject.holds(
        matches!(
            iteration::geometric_convergence(1.0, 2.0, 1.0, 0.6, 60)?,
            GeometricOutcome::ThresholdViolated { .. }
        ),
        || "Y0 = 0.6 accepted".into(),
    );
    let mut absorb = Check::new("absorption certificate");
    let radii: Vec<f64> = (0..=90).map(|i| i as f64 * 0.01).collect();
    let phi: Vec<f64> = radii.iter().map(|r| 1.0 / (1.0 - r)).collect();
    let params = AbsorptionParams {
        eta: 0.5,
        a: 1.0,
        b: 0.0,
        c: 0.0,
        alpha: 1.0,
        beta: 0.0,
    };
    match iteration::absorption_iteration(&radii, &phi, params)? {
        AbsorptionOutcome::Certified { worst_ratio, bound, .. } => {
            absorb.holds(worst_ratio <= 1.0 && bound >= phi[0], || format!("ratio {worst_ratio}"));
        }
        other => absorb.holds(false, || format!("{other:?}")),
    }
    let mut flag = Check::new("absorption violation flagged");
    let bad = iteration::absorption_iteration(&[0.0, 0.5, 1.0], &[10.0, 0.0, 0.0], params)?;
    flag.holds(
        matches!(bad, AbsorptionOutcome::HypothesisViolated { rho, r, .. } if rho == 0.0 && r == 0.5),
        || format!("{bad:?}"),
    );
    Ok(SuiteReport::new("iteration", vec![geo, reject, absorb, flag]))
}

/// Round trip of the config itself and the two rejection examples.
pub fn config_suite(cfg: &ExperimentConfig) -> SuiteReport {
    let mut round = Check::new("parse-serialize-parse identity");
    let text = cfg.to_json_string();
    let ok = ExperimentConfig::from_json_str(&text)
        .map(|back| back == *cfg && back.to_json_string() == text)
        .unwrap_or(false);
    round.holds(ok, || "round trip changed the config".into());

    let mut reject = Check::new("invalid configs rejected");
    let mut bad_eps = cfg.clone();
    bad_eps.epsilons = vec![1.5];
    reject.holds(bad_eps.validate().is_err(), || "eps = 1.5 accepted".into());
    let mut bad_body = cfg.clone();
    bad_body.body = BodyConfig::Polytope {
        vertices: vec![[1.0, 0.0], [-1.0, 0.0]],
    };
    reject.holds(bad_body.validate().is_err(), || "2-vertex polytope accepted".into());
    SuiteReport::new("config", vec![round, reject])
}

/// Runs every suite for `cfg`.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let n = cfg.verify_samples;
    let seed = cfg.seed;
    let body = cfg.body()?;
    let integrand = cfg.integrand()?;
    let mut bodies = reference_bodies();
    bodies.insert(0, (body_label(&cfg.body), body.clone()));

    let mut suites = Vec::new();
    suites.push(gauge_suite(&bodies, &mut rng_for(seed, 1), n, 1e-9));
    suites.push(g_delta_suite(
        &bodies,
        &cfg.deltas,
        &mut rng_for(seed, 2),
        n,
        1e-9,
        CollapseBound::Sharp,
    ));
    suites.push(integrand_suite(
        &integrand,
        (cfg.grid.x_range, cfg.grid.y_range),
        &mut rng_for(seed, 3),
        n,
    ));

    let mut reg_checks = Vec::new();
    let mut rng = rng_for(seed, 4);
    for &eps in &cfg.epsilons {
        let reg = RegularizedIntegrand::build(integrand.clone(), 2.0, eps)?;
        let mut s = regularization_suite(&reg, &mut rng, n, 1e-10);
        for c in &mut s.checks {
            c.name = format!("{} (eps={eps})", c.name);
        }
        reg_checks.extend(s.checks);
        for &delta in &cfg.deltas {
            if 1.0 + delta < 1.0 / delta {
                let k = 2.0 / delta;
                let reg = RegularizedIntegrand::build(integrand.clone(), k, eps)?;
                let mut a = annulus_ellipticity(&reg, delta, &mut rng, n);
                a.check.name = format!("{} (eps={eps}, delta={delta})", a.check.name);
                reg_checks.push(a.check);
            }
        }
    }
    suites.push(SuiteReport::new("regularization", reg_checks));
    suites.push(solver_suite(cfg)?);
    suites.push(analysis_suite(&body, cfg.analysis.dual_samples, &mut rng_for(seed, 6), 20)?);
    suites.push(iteration_suite()?);
    suites.push(config_suite(cfg));

    Ok(VerifyReport {
        config_hash: cfg.hash(),
        seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

/// Writes `verify.json` under `root`.
pub fn write_ledger(root: &Path, report: &VerifyReport) -> Result<()> {
    std::fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
    let path = root.join("verify.json");
    let text = serde_json::to_string_pretty(report)? + "\n";
    std::fs::write(&path, text).map_err(|e| LabError::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_track_worst_gap() {
        let mut c = Check::new("x");
        c.le(1.0, 2.0, 0.0, String::new);
        c.le(3.0, 2.5, 1.0, String::new);
        assert!(c.passed());
        assert_eq!(c.worst, 0.5);
        c.le(3.0, 1.0, 0.5, || "bad".into());
        assert!(!c.passed());
        assert_eq!(c.first_failure.as_deref(), Some("bad (lhs 3e0, rhs 1e0)"));
    }

    #[test]
    fn literal_collapse_fails_only_where_r_times_big_r_exceeds_one() {
        let bodies = reference_bodies();
        for (name, b) in &bodies {
            let one = vec![(name.clone(), b.clone())];
            let s = g_delta_suite(&one, &[0.5], &mut rng_for(1, 0), 2000, 1e-9, CollapseBound::Literal);
            let (r, big_r) = b.radii();
            assert_eq!(s.check("collapse delta/r_E").unwrap().passed(), r * big_r <= 1.0, "{name}");
            let s = g_delta_suite(&one, &[0.5], &mut rng_for(1, 0), 2000, 1e-9, CollapseBound::Sharp);
            assert!(s.passed, "{name}");
        }
    }

    #[test]
    fn iteration_examples_pass() {
        assert!(iteration_suite().unwrap().passed);
    }
}
