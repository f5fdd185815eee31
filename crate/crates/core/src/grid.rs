//! Uniform space grid on a rectangle and time-levelled scalar fields on it.
//!
//! Nodes are indexed `(i, j)` with `0 ≤ i < nx`, `0 ≤ j < ny`, stored
//! row-major (`j * nx + i`). Cell `(i, j)` spans nodes `(i..=i+1, j..=j+1)`;
//! its gradient is the forward difference
//! `((v[i+1,j] − v[i,j])/hx, (v[i,j+1] − v[i,j])/hy)`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::math::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl GridSpec {
    /// `nx × ny` nodes, boundary included.
    pub fn new(nx: usize, ny: usize, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::param("grid", format!("need at least 3×3 nodes, got {nx}×{ny}")));
        }
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && b > a;
        if !ok(x_range) || !ok(y_range) {
            return Err(Error::param("grid", "domain ranges must be finite and increasing"));
        }
        Ok(Self {
            nx,
            ny,
            x_range,
            y_range,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y_range
    }

    pub fn hx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / (self.ny - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.x_range.0 + i as f64 * self.hx(),
            self.y_range.0 + j as f64 * self.hy(),
        )
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    pub fn cells_x(&self) -> usize {
        self.nx - 1
    }

    pub fn cells_y(&self) -> usize {
        self.ny - 1
    }

    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.x_range.0 + (i as f64 + 0.5) * self.hx(),
            self.y_range.0 + (j as f64 + 0.5) * self.hy(),
        )
    }

    /// Forward-difference gradient of nodal values `v` on cell `(i, j)`.
    #[inline]
    pub fn cell_gradient(&self, v: &[f64], i: usize, j: usize) -> Vec2 {
        let c = v[self.index(i, j)];
        Vec2::new(
            (v[self.index(i + 1, j)] - c) / self.hx(),
            (v[self.index(i, j + 1)] - c) / self.hy(),
        )
    }

    /// Average of the gradients of the cells touching node `(i, j)`.
    pub fn node_gradient(&self, v: &[f64], i: usize, j: usize) -> Vec2 {
        let mut acc = Vec2::ZERO;
        let mut n = 0.0;
        for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            if i >= di && j >= dj && i - di < self.cells_x() && j - dj < self.cells_y() {
                acc = acc + self.cell_gradient(v, i - di, j - dj);
                n += 1.0;
            }
        }
        acc / n
    }

    /// Samples `g(·, t)` at every node.
    pub fn sample(&self, g: &dyn ScalarField, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.node(i, j);
                out.push(g.eval(p.x, p.y, t));
            }
        }
        out
    }
}

/// Nodal values at equally spaced time levels `t0 + k·dt`, with the
/// Dirichlet trace generator that produced the boundary values.
#[derive(Clone)]
pub struct GridField {
    spec: GridSpec,
    t0: f64,
    dt: f64,
    levels: Vec<Vec<f64>>,
    boundary: Option<Arc<dyn ScalarField>>,
}

impl GridField {
    /// Single level at `t0` sampled from `data`, which also supplies the
    /// boundary trace for all later levels.
    pub fn new(spec: GridSpec, t0: f64, dt: f64, data: Arc<dyn ScalarField>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        let first = spec.sample(data.as_ref(), t0);
        Ok(Self {
            spec,
            t0,
            dt,
            levels: alloc::vec![first],
            boundary: Some(data),
        })
    }

    /// Field from stored levels, e.g. a checkpoint. No trace generator.
    pub fn from_levels(spec: GridSpec, t0: f64, dt: f64, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::GridMismatch("no time levels".into()));
        }
        if let Some(bad) = levels.iter().position(|l| l.len() != spec.len()) {
            return Err(Error::GridMismatch(format!(
                "level {bad} has {} values, grid has {}",
                levels[bad].len(),
                spec.len()
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        Ok(Self {
            spec,
            t0,
            dt,
            levels,
            boundary: None,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of completed steps (`levels − 1`).
    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.steps())
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn last(&self) -> &[f64] {
        self.levels.last().unwrap()
    }

    pub fn boundary(&self) -> Option<&Arc<dyn ScalarField>> {
        self.boundary.as_ref()
    }

    pub fn push_level(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.spec.len() {
            return Err(Error::GridMismatch(format!(
                "level has {} values, grid has {}",
                values.len(),
                self.spec.len()
            )));
        }
        self.levels.push(values);
        Ok(())
    }

    pub fn value(&self, k: usize, i: usize, j: usize) -> f64 {
        self.levels[k][self.spec.index(i, j)]
    }

    pub fn cell_gradient(&self, k: usize, i: usize, j: usize) -> Vec2 {
        self.spec.cell_gradient(&self.levels[k], i, j)
    }

    pub fn node_gradient(&self, k: usize, i: usize, j: usize) -> Vec2 {
        self.spec.node_gradient(&self.levels[k], i, j)
    }

    pub fn sup_norm(&self, k: usize) -> f64 {
        self.levels[k].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest deviation of the boundary nodes of level `k` from the trace.
    pub fn boundary_defect(&self, k: usize) -> Option<f64> {
        let g = self.boundary.as_ref()?;
        let t = self.time(k);
        let mut worst: f64 = 0.0;
        for j in 0..self.spec.ny() {
            for i in 0..self.spec.nx() {
                if self.spec.is_boundary(i, j) {
                    let p = self.spec.node(i, j);
                    worst = worst.max((self.value(k, i, j) - g.eval(p.x, p.y, t)).abs());
                }
            }
        }
        Some(worst)
    }

    pub fn same_layout(&self, other: &GridField) -> bool {
        self.spec == other.spec && self.levels.len() == other.levels.len() && self.dt == other.dt
    }
}

impl core::fmt::Debug for GridField {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("GridField")
            .field("spec", &self.spec)
            .field("t0", &self.t0)
            .field("dt", &self.dt)
            .field("levels", &self.levels.len())
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_of_affine_data_are_exact() {
        let spec = GridSpec::new(9, 7, (0.0, 2.0), (-1.0, 1.0)).unwrap();
        let v = spec.sample(&|x: f64, y: f64, _t: f64| 3.0 * x - 2.0 * y + 1.0, 0.0);
        for j in 0..spec.cells_y() {
            for i in 0..spec.cells_x() {
                let g = spec.cell_gradient(&v, i, j);
                assert!((g - Vec2::new(3.0, -2.0)).norm() < 1e-12);
            }
        }
        for (i, j) in [(0, 0), (8, 6), (4, 3), (0, 5)] {
            assert!((spec.node_gradient(&v, i, j) - Vec2::new(3.0, -2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(GridSpec::new(2, 5, (0.0, 1.0), (0.0, 1.0)).is_err());
        assert!(GridSpec::new(5, 5, (1.0, 1.0), (0.0, 1.0)).is_err());
        let spec = GridSpec::new(4, 4, (0.0, 1.0), (0.0, 1.0)).unwrap();
        assert!(GridField::from_levels(spec, 0.0, 0.1, alloc::vec![alloc::vec![0.0; 15]]).is_err());
        assert!(GridField::from_levels(spec, 0.0, 0.1, Vec::new()).is_err());
    }
}
