//! Experiment configuration.
//!
//! A config is a JSON document. Parsing reports the failing field path
//! together with the line and column; [`ExperimentConfig::validate`] then
//! checks ranges and builds every object once so that a run never starts on
//! an invalid description.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use degenlab_core::analysis::{self, Cylinder, Region};
use degenlab_core::{
    Coefficient, ConvexBody, GridSpec, IntegrandSpec, ScalarField, SolverConfig, Sym2, Vec2,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::expr::Expr;
use crate::{LabError, Result};

pub const MIN_GRID: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub body: BodyConfig,
    pub integrand: IntegrandConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Right-hand side `f(x, y, t)`.
    pub source: String,
    /// Initial and boundary data `g(x, y, t)`.
    pub data: String,
    #[serde(default)]
    pub k: KPolicy,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub checkpoint: CheckpointFormat,
    pub analysis: AnalysisPlan,
    /// Random samples per property in `verify`.
    #[serde(default = "default_verify_samples")]
    pub verify_samples: usize,
    pub seed: u64,
    pub output: PathBuf,
}

fn default_verify_samples() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyConfig {
    Ball { radius: f64 },
    /// `{ ξᵀ A ξ ≤ 1 }` with `A = [[a, b], [b, c]]` given as `[a, b, c]`.
    Ellipsoid { form: [f64; 3] },
    Polytope { vertices: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandConfig {
    pub p: f64,
    /// `a(x, y, t)`.
    pub coefficient: String,
    pub c1: f64,
    pub c2: f64,
    /// Declared spatial Lipschitz constant of `a`.
    pub lipschitz_x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    /// Total time; must be a whole number of steps.
    pub horizon: f64,
}

/// Source of the gradient bound `K` used by the regularization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum KPolicy {
    Fixed { value: f64 },
    /// Coarse pre-solve at `ε = 1`, sup of the nodal gradient, times `factor`.
    Bootstrap { factor: f64, coarse_nodes: usize },
}

impl Default for KPolicy {
    fn default() -> Self {
        KPolicy::Bootstrap {
            factor: 2.0,
            coarse_nodes: 17,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub newton_tol: f64,
    pub max_newton: usize,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub max_cg: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            newton_tol: d.newton_tol,
            max_newton: d.max_newton,
            armijo: d.armijo,
            backtrack: d.backtrack,
            max_backtracks: d.max_backtracks,
            max_cg: d.max_cg,
        }
    }
}

impl SolverSettings {
    pub fn to_core(&self) -> SolverConfig {
        SolverConfig {
            newton_tol: self.newton_tol,
            max_newton: self.max_newton,
            armijo: self.armijo,
            backtrack: self.backtrack,
            max_backtracks: self.max_backtracks,
            max_cg: self.max_cg,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointFormat {
    #[default]
    Binary,
    Csv,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderConfig {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisPlan {
    pub cylinders: Vec<CylinderConfig>,
    /// Extra cylinders drawn from the seed, ending at the final time.
    #[serde(default)]
    pub random_cylinders: usize,
    pub mu: f64,
    pub nu: f64,
    pub lag_min: f64,
    pub lag_max: f64,
    #[serde(default = "default_dual_samples")]
    pub dual_samples: usize,
    /// Bump radius for the weak residual.
    pub test_radius: f64,
    /// Node thinning for the continuity modulus.
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_dual_samples() -> usize {
    64
}

fn default_stride() -> usize {
    2
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            body: BodyConfig::Ball { radius: 1.0 },
            integrand: IntegrandConfig {
                p: 2.0,
                coefficient: "1 + 0.25*sin(x + y + t)".into(),
                c1: 0.5,
                c2: 2.0,
                lipschitz_x: 0.36,
            },
            grid: GridConfig {
                nx: 33,
                ny: 33,
                x_range: [0.0, 1.0],
                y_range: [0.0, 1.0],
            },
            time: TimeConfig {
                dt: 0.005,
                horizon: 0.05,
            },
            epsilons: vec![1.0, 0.3, 0.1],
            deltas: vec![0.25],
            source: "0".into(),
            data: "sin(3*x)*cos(2*y) + 0.8*x - 0.4*y^2".into(),
            k: KPolicy::default(),
            solver: SolverSettings::default(),
            checkpoint: CheckpointFormat::Binary,
            analysis: AnalysisPlan {
                cylinders: vec![
                    CylinderConfig {
                        x: 0.5,
                        y: 0.5,
                        t: 0.05,
                        rho: 0.2,
                    },
                    CylinderConfig {
                        x: 0.3,
                        y: 0.6,
                        t: 0.05,
                        rho: 0.15,
                    },
                ],
                random_cylinders: 2,
                mu: 0.5,
                nu: 0.2,
                lag_min: 0.065,
                lag_max: 0.7,
                dual_samples: 64,
                test_radius: 0.2,
                stride: 2,
            },
            verify_samples: default_verify_samples(),
            seed: 42,
            output: PathBuf::from("out"),
        }
    }
}

fn in_unit_interval(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LabError::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            LabError::Config { path: field, message } => LabError::config(
                field,
                format!("{message} (in {})", path.display()),
            ),
            other => other,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// SHA-256 of the compact JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        let compact = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(LabError::config("epsilons", "list must not be empty"));
        }
        for (i, &e) in self.epsilons.iter().enumerate() {
            if !in_unit_interval(e) {
                return Err(LabError::config(format!("epsilons[{i}]"), format!("ε must lie in (0, 1], got {e}")));
            }
        }
        if self.deltas.is_empty() {
            return Err(LabError::config("deltas", "list must not be empty"));
        }
        for (i, &d) in self.deltas.iter().enumerate() {
            if !in_unit_interval(d) {
                return Err(LabError::config(format!("deltas[{i}]"), format!("δ must lie in (0, 1], got {d}")));
            }
        }
        let g = &self.grid;
        if g.nx < MIN_GRID || g.ny < MIN_GRID {
            return Err(LabError::config(
                "grid",
                format!("grid must be at least {MIN_GRID}x{MIN_GRID}, got {}x{}", g.nx, g.ny),
            ));
        }
        self.grid_spec()?;
        self.steps()?;
        self.body()?;
        self.integrand()?;
        self.source_expr()?;
        self.data_expr()?;
        self.solver
            .to_core()
            .validate()
            .map_err(|e| LabError::config("solver", e.to_string()))?;
        match self.k {
            KPolicy::Fixed { value } if !(value >= 0.0 && value.is_finite()) => {
                return Err(LabError::config("k.value", format!("must be finite and non-negative, got {value}")));
            }
            KPolicy::Bootstrap { factor, coarse_nodes } => {
                if !(factor >= 1.0 && factor.is_finite()) {
                    return Err(LabError::config("k.factor", format!("must be at least 1, got {factor}")));
                }
                if coarse_nodes < 3 {
                    return Err(LabError::config("k.coarse_nodes", "need at least 3 nodes"));
                }
            }
            _ => {}
        }
        if self.verify_samples == 0 {
            return Err(LabError::config("verify_samples", "must be positive"));
        }
        self.validate_analysis()
    }

    fn validate_analysis(&self) -> Result<()> {
        let a = &self.analysis;
        if !(a.mu > 0.0 && a.mu.is_finite()) {
            return Err(LabError::config("analysis.mu", format!("must be positive, got {}", a.mu)));
        }
        if !(a.nu > 0.0 && a.nu <= 0.25) {
            return Err(LabError::config("analysis.nu", format!("must lie in (0, 1/4], got {}", a.nu)));
        }
        if a.dual_samples < 3 {
            return Err(LabError::config("analysis.dual_samples", "need at least 3 samples"));
        }
        if a.stride == 0 {
            return Err(LabError::config("analysis.stride", "must be positive"));
        }
        if !(a.lag_min > 0.0 && a.lag_max >= 10.0 * a.lag_min) {
            return Err(LabError::config(
                "analysis.lag_min",
                format!("lags must span at least one decade, got [{}, {}]", a.lag_min, a.lag_max),
            ));
        }
        let (x0, x1) = (self.grid.x_range[0], self.grid.x_range[1]);
        let (y0, y1) = (self.grid.y_range[0], self.grid.y_range[1]);
        if !(a.test_radius > 0.0 && 2.0 * a.test_radius <= (x1 - x0).min(y1 - y0)) {
            return Err(LabError::config(
                "analysis.test_radius",
                format!("must be positive and fit inside the domain, got {}", a.test_radius),
            ));
        }
        if a.cylinders.is_empty() && a.random_cylinders == 0 {
            return Err(LabError::config("analysis.cylinders", "need at least one cylinder"));
        }
        let horizon = self.time.horizon;
        for (i, c) in a.cylinders.iter().enumerate() {
            let inside = c.rho > 0.0
                && c.x - c.rho >= x0
                && c.x + c.rho <= x1
                && c.y - c.rho >= y0
                && c.y + c.rho <= y1
                && c.t <= horizon * (1.0 + 1e-12)
                && c.t - c.rho * c.rho >= -1e-12;
            if !inside {
                return Err(LabError::config(
                    format!("analysis.cylinders[{i}]"),
                    "cylinder must lie inside the space-time domain",
                ));
            }
        }
        Ok(())
    }

    pub fn body(&self) -> Result<ConvexBody> {
        let body = match &self.body {
            BodyConfig::Ball { radius } => ConvexBody::ball(*radius),
            BodyConfig::Ellipsoid { form } => ConvexBody::ellipsoid(Sym2::new(form[0], form[1], form[2])),
            BodyConfig::Polytope { vertices } => {
                ConvexBody::polytope(vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect())
            }
        };
        body.map_err(|e| LabError::config("body", e.to_string()))
    }

    pub fn coefficient_expr(&self) -> Result<Expr> {
        Expr::parse(&self.integrand.coefficient).map_err(|e| LabError::config("integrand.coefficient", e.to_string()))
    }

    pub fn source_expr(&self) -> Result<Expr> {
        Expr::parse(&self.source).map_err(|e| LabError::config("source", e.to_string()))
    }

    pub fn data_expr(&self) -> Result<Expr> {
        Expr::parse(&self.data).map_err(|e| LabError::config("data", e.to_string()))
    }

    /// Builds the integrand and checks the coefficient against `[C1, C2]` on
    /// the grid at every time level.
    pub fn integrand(&self) -> Result<IntegrandSpec> {
        let ic = &self.integrand;
        let a = self.coefficient_expr()?;
        let spec = self.grid_spec()?;
        let steps = self.steps()?;
        for k in 0..=steps {
            let t = k as f64 * self.time.dt;
            for v in spec.sample(&a, t) {
                if !(v >= ic.c1 * (1.0 - 1e-12) && v <= ic.c2 * (1.0 + 1e-12)) {
                    return Err(LabError::config(
                        "integrand.coefficient",
                        format!("value {v} at t = {t} outside [c1, c2] = [{}, {}]", ic.c1, ic.c2),
                    ));
                }
            }
        }
        if !(ic.lipschitz_x >= 0.0 && ic.lipschitz_x.is_finite()) {
            return Err(LabError::config("integrand.lipschitz_x", "must be finite and non-negative"));
        }
        let coeff = Coefficient::new(Arc::new(a), ic.c1, ic.c2, ic.lipschitz_x);
        IntegrandSpec::new(self.body()?, ic.p, coeff).map_err(|e| LabError::config("integrand", e.to_string()))
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = &self.grid;
        GridSpec::new(
            g.nx,
            g.ny,
            (g.x_range[0], g.x_range[1]),
            (g.y_range[0], g.y_range[1]),
        )
        .map_err(|e| LabError::config("grid", e.to_string()))
    }

    pub fn steps(&self) -> Result<usize> {
        let TimeConfig { dt, horizon } = self.time;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LabError::config("time.dt", format!("must be positive, got {dt}")));
        }
        if !(horizon >= dt && horizon.is_finite()) {
            return Err(LabError::config("time.horizon", format!("must be at least dt, got {horizon}")));
        }
        let n = (horizon / dt).round();
        if (n * dt - horizon).abs() > 1e-9 * horizon {
            return Err(LabError::config("time.horizon", "must be a whole number of time steps"));
        }
        Ok(n as usize)
    }

    /// Configured cylinders followed by the seeded random ones.
    pub fn cylinders(&self) -> Result<Vec<Cylinder>> {
        let mut out = Vec::new();
        for c in &self.analysis.cylinders {
            out.push(Cylinder::new(Vec2::new(c.x, c.y), c.t, c.rho)?);
        }
        if self.analysis.random_cylinders == 0 {
            return Ok(out);
        }
        let spec = self.grid_spec()?;
        let (x0, x1) = spec.x_range();
        let (y0, y1) = spec.y_range();
        let h = spec.hx().max(spec.hy());
        let t_end = self.time.horizon;
        let r_min = (3.0 * h).max(self.time.dt.sqrt() * 1.5);
        let r_max = (0.25 * (x1 - x0).min(y1 - y0)).min(t_end.sqrt());
        if r_min > r_max {
            return Err(LabError::config(
                "analysis.random_cylinders",
                "grid or horizon too small to place random cylinders",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.analysis.random_cylinders {
            let rho = rng.random_range(r_min..=r_max);
            let cx = rng.random_range(x0 + rho..=x1 - rho);
            let cy = rng.random_range(y0 + rho..=y1 - rho);
            out.push(Cylinder::new(Vec2::new(cx, cy), t_end, rho)?);
        }
        Ok(out)
    }

    /// The full space-time window thinned by the configured stride.
    pub fn region(&self) -> Region {
        Region {
            x_range: (self.grid.x_range[0], self.grid.x_range[1]),
            y_range: (self.grid.y_range[0], self.grid.y_range[1]),
            t_range: (0.0, self.time.horizon),
            stride: self.analysis.stride,
        }
    }

    pub fn lags(&self) -> Vec<f64> {
        analysis::geometric_lags(self.analysis.lag_min, self.analysis.lag_max)
    }

    /// `‖g(·, t)‖_∞` over all nodes and stored times.
    pub fn data_sup(&self) -> Result<f64> {
        let g = self.data_expr()?;
        let spec = self.grid_spec()?;
        let mut m: f64 = 0.0;
        for k in 0..=self.steps()? {
            for v in spec.sample(&g, k as f64 * self.time.dt) {
                m = m.max(v.abs());
            }
        }
        Ok(m)
    }

    /// Whether `f` vanishes identically as written.
    pub fn source_is_zero(&self) -> Result<bool> {
        Ok(self.source_expr()? == Expr::Num(0.0))
    }

    pub fn data_field(&self) -> Result<Arc<dyn ScalarField>> {
        Ok(Arc::new(self.data_expr()?))
    }
}
