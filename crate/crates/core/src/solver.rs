//! Variational implicit Euler for `∂_t u − div Ĥ_ε(x, t, Du) = f` with
//! Dirichlet data on a rectangle.
//!
//! Each step minimizes, over the interior nodal values `v`,
//!
//! ```text
//!     J(v) = Σ_nodes [ (v − u^k)²/(2 dt) − f v ] hx hy + Σ_cells F̂_ε(x_c, t^{k+1}, D_h v) hx hy
//! ```
//!
//! by damped Newton with Armijo backtracking. The Newton systems are solved
//! matrix-free by Jacobi-preconditioned conjugate gradients. `J` is strictly
//! convex, so the minimizer is unique and `∇J(u^{k+1}) = 0` is exactly the
//! discrete weak form tested against nodal hat functions.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{GridField, GridSpec};
use crate::math::{floor, CompensatedSum, Sym2, Vec2};
use crate::regularize::RegularizedIntegrand;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop when `‖∇J‖_∞ ≤ newton_tol`.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Step shrink factor in backtracking.
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub max_cg: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton: 100,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            max_cg: 5000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0 && self.newton_tol.is_finite()) {
            return Err(Error::param("newton_tol", format!("must be positive, got {}", self.newton_tol)));
        }
        if self.max_newton == 0 {
            return Err(Error::param("max_newton", "must be at least 1"));
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            return Err(Error::param("armijo", format!("must lie in (0, 0.5), got {}", self.armijo)));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::param("backtrack", format!("must lie in (0, 1), got {}", self.backtrack)));
        }
        Ok(())
    }
}

/// Per-step record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    /// Index of the new level.
    pub step: usize,
    pub t: f64,
    /// `E^{k+1} = Σ_cells F̂_ε(D_h u^{k+1}) hx hy`.
    pub energy: f64,
    /// `‖u^{k+1} − u^k‖²_{L²_h}`.
    pub increment_sq: f64,
    pub sup_norm: f64,
    pub newton_iters: usize,
    pub grad_norm: f64,
    /// Cells whose gradient sat on `∂E` at the last Hessian assembly.
    pub boundary_cells: usize,
}

/// `E = Σ_cells F̂_ε(x_c, t, D_h v) hx hy`.
pub fn discrete_energy(spec: &GridSpec, reg: &RegularizedIntegrand, v: &[f64], t: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for j in 0..spec.cells_y() {
        for i in 0..spec.cells_x() {
            let a = reg.coefficient(spec.cell_center(i, j), t);
            acc.add(reg.value_with(a, spec.cell_gradient(v, i, j)));
        }
    }
    acc.value() * spec.cell_area()
}

/// One implicit step: data of the minimization problem at level `k → k+1`.
struct StepProblem<'a> {
    spec: GridSpec,
    reg: &'a RegularizedIntegrand,
    prev: &'a [f64],
    source: Vec<f64>,
    coeff: Vec<f64>,
    interior: Vec<bool>,
    dt: f64,
    area: f64,
    hx: f64,
    hy: f64,
}

impl<'a> StepProblem<'a> {
    fn new(
        spec: GridSpec,
        reg: &'a RegularizedIntegrand,
        prev: &'a [f64],
        f: &dyn ScalarField,
        t: f64,
        dt: f64,
    ) -> Self {
        let source = spec.sample(f, t);
        let mut coeff = Vec::with_capacity(spec.cells_x() * spec.cells_y());
        for j in 0..spec.cells_y() {
            for i in 0..spec.cells_x() {
                coeff.push(reg.coefficient(spec.cell_center(i, j), t));
            }
        }
        let mut interior = vec![false; spec.len()];
        for j in 0..spec.ny() {
            for i in 0..spec.nx() {
                interior[spec.index(i, j)] = !spec.is_boundary(i, j);
            }
        }
        Self {
            spec,
            reg,
            prev,
            source,
            coeff,
            interior,
            dt,
            area: spec.cell_area(),
            hx: spec.hx(),
            hy: spec.hy(),
        }
    }

    #[inline]
    fn cell_nodes(&self, i: usize, j: usize) -> (usize, usize, usize) {
        let s = &self.spec;
        (s.index(i, j), s.index(i + 1, j), s.index(i, j + 1))
    }

    #[inline]
    fn diff(&self, w: &[f64], (n0, n1, n2): (usize, usize, usize)) -> Vec2 {
        Vec2::new((w[n1] - w[n0]) / self.hx, (w[n2] - w[n0]) / self.hy)
    }

    /// Adds `Bᵀ q · area` into `out` (interior nodes only).
    #[inline]
    fn scatter(&self, out: &mut [f64], (n0, n1, n2): (usize, usize, usize), q: Vec2) {
        let gx = q.x / self.hx * self.area;
        let gy = q.y / self.hy * self.area;
        if self.interior[n0] {
            out[n0] -= gx + gy;
        }
        if self.interior[n1] {
            out[n1] += gx;
        }
        if self.interior[n2] {
            out[n2] += gy;
        }
    }

    /// `∇J(v)` with zeros on the boundary, given the cell fluxes.
    fn gradient_with_flux(&self, v: &[f64], flux: impl Fn(f64, Vec2) -> Vec2) -> Vec<f64> {
        let mut g = vec![0.0; v.len()];
        for n in 0..v.len() {
            if self.interior[n] {
                g[n] = ((v[n] - self.prev[n]) / self.dt - self.source[n]) * self.area;
            }
        }
        let cx = self.spec.cells_x();
        for j in 0..self.spec.cells_y() {
            for i in 0..cx {
                let nodes = self.cell_nodes(i, j);
                let q = flux(self.coeff[j * cx + i], self.diff(v, nodes));
                self.scatter(&mut g, nodes, q);
            }
        }
        g
    }

    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        self.gradient_with_flux(v, |a, xi| self.reg.h_epsilon_with(a, xi))
    }

    /// `J(v + α d) − J(v)`, summed cell by cell.
    fn energy_delta(&self, v: &[f64], d: &[f64], alpha: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for n in 0..v.len() {
            if self.interior[n] {
                let s = alpha * d[n];
                let mass = s * (2.0 * (v[n] - self.prev[n]) + s) / (2.0 * self.dt);
                acc.add((mass - self.source[n] * s) * self.area);
            }
        }
        let cx = self.spec.cells_x();
        for j in 0..self.spec.cells_y() {
            for i in 0..cx {
                let nodes = self.cell_nodes(i, j);
                let a = self.coeff[j * cx + i];
                let xi = self.diff(v, nodes);
                let dxi = self.diff(d, nodes);
                if dxi == Vec2::ZERO {
                    continue;
                }
                let new = self.reg.value_with(a, xi + dxi * alpha);
                let old = self.reg.value_with(a, xi);
                acc.add((new - old) * self.area);
            }
        }
        acc.value()
    }

    fn cell_hessians(&self, v: &[f64]) -> (Vec<Sym2>, usize) {
        let cx = self.spec.cells_x();
        let mut out = Vec::with_capacity(cx * self.spec.cells_y());
        let mut boundary = 0;
        for j in 0..self.spec.cells_y() {
            for i in 0..cx {
                let xi = self.diff(v, self.cell_nodes(i, j));
                let (h, fallback) = self.reg.solver_hessian_with(self.coeff[j * cx + i], xi);
                boundary += fallback as usize;
                out.push(h);
            }
        }
        (out, boundary)
    }

    fn hess_vec(&self, hess: &[Sym2], w: &[f64], out: &mut [f64]) {
        for n in 0..w.len() {
            out[n] = if self.interior[n] { w[n] / self.dt * self.area } else { 0.0 };
        }
        let cx = self.spec.cells_x();
        for j in 0..self.spec.cells_y() {
            for i in 0..cx {
                let nodes = self.cell_nodes(i, j);
                let q = hess[j * cx + i].apply(self.diff(w, nodes));
                self.scatter(out, nodes, q);
            }
        }
    }

    fn hess_diag(&self, hess: &[Sym2]) -> Vec<f64> {
        let mut diag = vec![0.0; self.spec.len()];
        for n in 0..diag.len() {
            if self.interior[n] {
                diag[n] = self.area / self.dt;
            }
        }
        let (ix, iy) = (1.0 / self.hx, 1.0 / self.hy);
        let cx = self.spec.cells_x();
        for j in 0..self.spec.cells_y() {
            for i in 0..cx {
                let h = hess[j * cx + i];
                let (n0, n1, n2) = self.cell_nodes(i, j);
                diag[n0] += (h.xx * ix * ix + 2.0 * h.xy * ix * iy + h.yy * iy * iy) * self.area;
                diag[n1] += h.xx * ix * ix * self.area;
                diag[n2] += h.yy * iy * iy * self.area;
            }
        }
        diag
    }

    fn inf_norm(&self, g: &[f64]) -> f64 {
        g.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Solves `H d = −g` to an `‖·‖_∞` residual of `target`.
    fn newton_direction(&self, hess: &[Sym2], g: &[f64], target: f64, max_iter: usize) -> Vec<f64> {
        let n = g.len();
        let diag = self.hess_diag(hess);
        let inv: Vec<f64> = diag
            .iter()
            .zip(&self.interior)
            .map(|(&d, &int)| if int && d > 0.0 { 1.0 / d } else { 0.0 })
            .collect();
        let mut x = vec![0.0; n];
        let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut hp = vec![0.0; n];
        for _ in 0..max_iter {
            if self.inf_norm(&r) <= target {
                break;
            }
            self.hess_vec(hess, &p, &mut hp);
            let php: f64 = p.iter().zip(&hp).map(|(a, b)| a * b).sum();
            if !(php > 0.0) {
                break;
            }
            let alpha = rz / php;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * hp[k];
            }
            for k in 0..n {
                z[k] = r[k] * inv[k];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        x
    }

    fn minimize(&self, mut v: Vec<f64>, cfg: &SolverConfig) -> Result<(Vec<f64>, usize, f64, usize)> {
        let mut boundary_cells = 0;
        for iter in 0..=cfg.max_newton {
            let g = self.gradient(&v);
            let gn = self.inf_norm(&g);
            if !gn.is_finite() {
                return Err(Error::Numerical("non-finite energy gradient"));
            }
            if gn <= cfg.newton_tol {
                return Ok((v, iter, gn, boundary_cells));
            }
            if iter == cfg.max_newton {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    grad_norm: gn,
                });
            }
            let (hess, nb) = self.cell_hessians(&v);
            boundary_cells = nb;
            let forcing = crate::math::sqrt(gn).min(0.1);
            let target = (0.01 * cfg.newton_tol).max(forcing * gn);
            let mut d = self.newton_direction(&hess, &g, target, cfg.max_cg);
            let mut slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                // preconditioned steepest descent
                let diag = self.hess_diag(&hess);
                for k in 0..d.len() {
                    d[k] = if self.interior[k] { -g[k] / diag[k] } else { 0.0 };
                }
                slope = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            }
            v = self.line_search(v, &d, slope, gn, cfg).ok_or(Error::NoConvergence {
                iterations: iter + 1,
                grad_norm: gn,
            })?;
        }
        unreachable!()
    }

    fn line_search(&self, v: Vec<f64>, d: &[f64], slope: f64, gn: f64, cfg: &SolverConfig) -> Option<Vec<f64>> {
        let trial = |alpha: f64| -> Vec<f64> { v.iter().zip(d).map(|(a, b)| a + alpha * b).collect() };
        let mut alpha = 1.0;
        for _ in 0..cfg.max_backtracks {
            let delta = self.energy_delta(&v, d, alpha);
            if !delta.is_finite() {
                alpha *= cfg.backtrack;
                continue;
            }
            if delta <= cfg.armijo * alpha * slope {
                return Some(trial(alpha));
            }
            alpha *= cfg.backtrack;
        }
        // energy differences at rounding level: settle for a smaller gradient
        let mut alpha = 1.0;
        for _ in 0..cfg.max_backtracks {
            let w = trial(alpha);
            if self.inf_norm(&self.gradient(&w)) < gn {
                return Some(w);
            }
            alpha *= cfg.backtrack;
        }
        None
    }
}

/// Computes level `k+1` from the last level of `field`.
pub fn step(
    field: &GridField,
    reg: &RegularizedIntegrand,
    f: &dyn ScalarField,
    config: &SolverConfig,
) -> Result<(Vec<f64>, StepStats)> {
    config.validate()?;
    let data = field
        .boundary()
        .ok_or_else(|| Error::param("field", "no boundary trace to extend"))?;
    let spec = *field.spec();
    let k = field.steps();
    let t = field.time(k + 1);
    let prev = field.last();
    let problem = StepProblem::new(spec, reg, prev, f, t, field.dt());

    let mut guess = prev.to_vec();
    for j in 0..spec.ny() {
        for i in 0..spec.nx() {
            if spec.is_boundary(i, j) {
                let p = spec.node(i, j);
                guess[spec.index(i, j)] = data.eval(p.x, p.y, t);
            }
        }
    }
    let (next, iters, gn, boundary_cells) = problem.minimize(guess, config)?;
    let increment_sq = next
        .iter()
        .zip(prev)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        * spec.cell_area();
    let stats = StepStats {
        step: k + 1,
        t,
        energy: discrete_energy(&spec, reg, &next, t),
        increment_sq,
        sup_norm: next.iter().fold(0.0, |m, v| m.max(v.abs())),
        newton_iters: iters,
        grad_norm: gn,
        boundary_cells,
    };
    Ok((next, stats))
}

/// Appends one level to `field`.
pub fn advance(
    field: &mut GridField,
    reg: &RegularizedIntegrand,
    f: &dyn ScalarField,
    config: &SolverConfig,
) -> Result<StepStats> {
    let (next, stats) = step(field, reg, f, config)?;
    field.push_level(next)?;
    Ok(stats)
}

/// Marches `steps` levels from data `g(·, t0)` with boundary trace `g`.
pub fn solve(
    spec: GridSpec,
    t0: f64,
    dt: f64,
    steps: usize,
    data: Arc<dyn ScalarField>,
    reg: &RegularizedIntegrand,
    f: &dyn ScalarField,
    config: &SolverConfig,
) -> Result<(GridField, Vec<StepStats>)> {
    let mut field = GridField::new(spec, t0, dt, data)?;
    let mut stats = Vec::with_capacity(steps);
    for _ in 0..steps {
        stats.push(advance(&mut field, reg, f, config)?);
    }
    Ok((field, stats))
}

/// Which vector field enters the weak form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flux {
    /// `Ĥ_ε = ∇F̂ + εξ`.
    Regularized,
    /// `∇F̂`, i.e. the `ε = 0` evaluation.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteResidual {
    /// Largest normalized residual over the test family.
    pub value: f64,
    pub tests: usize,
}

#[inline]
fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        w * w * w
    }
}

/// Weak-form residual of a solved field against tensor-product bumps
///
/// ```text
///     R(φ) = | Σ_k dt Σ_n ∂_{v_n} J_k(u^{k+1}) φ_n(t^{k+1}) | / ‖φ‖_{L¹_h}
/// ```
///
/// which is `|∬ −u ∂_t φ + ⟨H(D_h u), D_h φ⟩ − f φ|` in summation-by-parts
/// form. Bumps have spatial radius `test_radius`, centers on a lattice of the
/// same spacing, and time half-width `max(ρ², 2dt)`.
pub fn weak_residual(
    field: &GridField,
    reg: &RegularizedIntegrand,
    f: &dyn ScalarField,
    test_radius: f64,
    flux: Flux,
) -> Result<DiscreteResidual> {
    let spec = *field.spec();
    let (x0, x1) = spec.x_range();
    let (y0, y1) = spec.y_range();
    let rho = test_radius;
    if !(rho > 0.0) || 2.0 * rho > (x1 - x0).min(y1 - y0) {
        return Err(Error::param(
            "test_radius",
            format!("must be positive and fit inside the domain, got {rho}"),
        ));
    }
    if field.steps() == 0 {
        return Err(Error::param("field", "needs at least one solved step"));
    }
    let dt = field.dt();
    let (t_start, t_end) = (field.t0(), field.final_time());
    let mut tau = (rho * rho).max(2.0 * dt);
    if 2.0 * tau > t_end - t_start {
        tau = 0.5 * (t_end - t_start);
    }

    let centers = |lo: f64, hi: f64, spacing: f64| -> Vec<f64> {
        let count = floor((hi - lo - 2.0 * spacing) / spacing + 1e-9) as i64 + 1;
        (0..count.max(1)).map(|m| lo + spacing + m as f64 * spacing).collect()
    };
    let xc = centers(x0, x1, rho);
    let yc = centers(y0, y1, rho);
    let tc = centers(t_start, t_end, tau);

    // ∇J_k(u^{k+1}) for every step
    let mut grads = Vec::with_capacity(field.steps());
    for k in 0..field.steps() {
        let t = field.time(k + 1);
        let problem = StepProblem::new(spec, reg, field.level(k), f, t, dt);
        let g = match flux {
            Flux::Regularized => problem.gradient(field.level(k + 1)),
            Flux::Degenerate => {
                problem.gradient_with_flux(field.level(k + 1), |a, xi| reg.hat_gradient_with(a, xi))
            }
        };
        grads.push(g);
    }

    let area = spec.cell_area();
    let mut worst: f64 = 0.0;
    let mut tests = 0;
    for &tcen in &tc {
        for &ycen in &yc {
            for &xcen in &xc {
                let mut num = CompensatedSum::new();
                let mut den = CompensatedSum::new();
                for (k, g) in grads.iter().enumerate() {
                    let bt = bump((field.time(k + 1) - tcen) / tau);
                    if bt == 0.0 {
                        continue;
                    }
                    for j in 1..spec.ny() - 1 {
                        for i in 1..spec.nx() - 1 {
                            let p = spec.node(i, j);
                            let phi = bt * bump((p.x - xcen) / rho) * bump((p.y - ycen) / rho);
                            if phi == 0.0 {
                                continue;
                            }
                            num.add(dt * g[spec.index(i, j)] * phi);
                            den.add(dt * phi * area);
                        }
                    }
                }
                if den.value() > 0.0 {
                    tests += 1;
                    worst = worst.max(num.value().abs() / den.value());
                }
            }
        }
    }
    Ok(DiscreteResidual { value: worst, tests })
}

/// Right Steklov average of a scalar series stored at `t_k = k dt`:
/// `(1/h)∫_t^{t+h} f` for `t < T − h`, `0` otherwise. Piecewise-linear in time.
pub fn steklov_series(values: &[f64], dt: f64, h: f64) -> Result<Vec<f64>> {
    let nt = values.len().saturating_sub(1);
    let horizon = nt as f64 * dt;
    if !(h > 0.0 && h < horizon) {
        return Err(Error::param("h", format!("window must lie in (0, {horizon}), got {h}")));
    }
    let s = h / dt;
    let whole = floor(s) as usize;
    let frac = s - whole as f64;
    let mut out = vec![0.0; values.len()];
    for (k, slot) in out.iter_mut().enumerate() {
        if k as f64 + s >= nt as f64 - 1e-9 {
            break;
        }
        let mut acc = 0.0;
        for m in k..k + whole {
            acc += 0.5 * dt * (values[m] + values[m + 1]);
        }
        if frac > 0.0 {
            let a = values[k + whole];
            let b = values[k + whole + 1];
            acc += 0.5 * frac * dt * (a + (a + frac * (b - a)));
        }
        *slot = acc / h;
    }
    Ok(out)
}

/// Node-wise [`steklov_series`] of every level of `field`.
pub fn steklov_average(field: &GridField, h: f64) -> Result<GridField> {
    let n = field.spec().len();
    let mut levels = vec![vec![0.0; n]; field.level_count()];
    let mut series = vec![0.0; field.level_count()];
    for node in 0..n {
        for (k, s) in series.iter_mut().enumerate() {
            *s = field.level(k)[node];
        }
        let avg = steklov_series(&series, field.dt(), h)?;
        for (k, v) in avg.into_iter().enumerate() {
            levels[k][node] = v;
        }
    }
    GridField::from_levels(*field.spec(), field.t0(), field.dt(), levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Coefficient, ConstantField};
    use crate::gauge::ConvexBody;
    use crate::integrand::IntegrandSpec;

    fn ball_reg(eps: f64) -> RegularizedIntegrand {
        let spec =
            IntegrandSpec::new(ConvexBody::ball(1.0).unwrap(), 2.0, Coefficient::constant(1.0))
                .unwrap();
        RegularizedIntegrand::build(spec, 4.0, eps).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let spec = GridSpec::new(17, 17, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let reg = ball_reg(0.5);
        let (field, stats) = solve(
            spec,
            0.0,
            0.01,
            5,
            Arc::new(ConstantField(0.0)),
            &reg,
            &ConstantField(0.0),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(field.levels().iter().all(|l| l.iter().all(|&v| v == 0.0)));
        assert!(stats.iter().all(|s| s.newton_iters == 0));
    }

    #[test]
    fn step_gradient_vanishes_at_solution() {
        let spec = GridSpec::new(17, 17, (0.0, 2.0), (0.0, 2.0)).unwrap();
        let reg = ball_reg(0.1);
        let data = |x: f64, y: f64, _t: f64| 2.0 * x * x - y + 0.5 * x * y;
        let (field, _) = solve(
            spec,
            0.0,
            0.05,
            3,
            Arc::new(data),
            &reg,
            &ConstantField(1.0),
            &SolverConfig::default(),
        )
        .unwrap();
        let r = weak_residual(&field, &reg, &ConstantField(1.0), 0.5, Flux::Regularized).unwrap();
        assert!(r.tests > 0);
        assert!(r.value <= 1e-10 / spec.cell_area(), "{}", r.value);
        assert_eq!(field.boundary_defect(3), Some(0.0));
    }

    #[test]
    fn steklov_of_linear_series() {
        let dt = 0.1;
        let values: Vec<f64> = (0..=20).map(|k| k as f64 * dt).collect();
        let h = 0.35;
        let avg = steklov_series(&values, dt, h).unwrap();
        for (k, v) in avg.iter().enumerate() {
            let t = k as f64 * dt;
            if t < 2.0 - h - 1e-9 {
                assert!((v - (t + h / 2.0)).abs() < 1e-12, "k={k}");
            } else {
                assert_eq!(*v, 0.0);
            }
        }
        assert!(steklov_series(&values, dt, 2.0).is_err());
        assert!(steklov_series(&values, dt, 0.0).is_err());
    }

    #[test]
    fn residual_rejects_oversized_tests() {
        let spec = GridSpec::new(9, 9, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let reg = ball_reg(1.0);
        let mut field = GridField::new(spec, 0.0, 0.1, Arc::new(ConstantField(0.0))).unwrap();
        advance(&mut field, &reg, &ConstantField(0.0), &SolverConfig::default()).unwrap();
        assert!(weak_residual(&field, &reg, &ConstantField(0.0), 0.6, Flux::Regularized).is_err());
    }
}
