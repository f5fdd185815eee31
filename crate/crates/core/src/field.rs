//! Closed-form scalar fields over space-time.
//!
//! The core crate never parses expressions; callers hand in anything that
//! implements [`ScalarField`] (plain closures do). Coefficients additionally
//! declare their bounds `C1 ≤ a ≤ C2` and spatial Lipschitz constant `A`.

use alloc::sync::Arc;

pub trait ScalarField: Send + Sync {
    fn eval(&self, x: f64, y: f64, t: f64) -> f64;
}

impl<F> ScalarField for F
where
    F: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    #[inline]
    fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self(x, y, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantField(pub f64);

impl ScalarField for ConstantField {
    #[inline]
    fn eval(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        self.0
    }
}

/// Coefficient field `a(x, t)` with declared bounds.
#[derive(Clone)]
pub struct Coefficient {
    field: Arc<dyn ScalarField>,
    lower: f64,
    upper: f64,
    lipschitz_x: f64,
}

impl Coefficient {
    pub fn new(field: Arc<dyn ScalarField>, lower: f64, upper: f64, lipschitz_x: f64) -> Self {
        Self {
            field,
            lower,
            upper,
            lipschitz_x,
        }
    }

    pub fn constant(a: f64) -> Self {
        Self::new(Arc::new(ConstantField(a)), a, a, 0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self.field.eval(x, y, t)
    }

    /// Declared lower bound `C1`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Declared upper bound `C2`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Declared Lipschitz constant in `x`.
    pub fn lipschitz_x(&self) -> f64 {
        self.lipschitz_x
    }
}

impl core::fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Coefficient")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("lipschitz_x", &self.lipschitz_x)
            .finish_non_exhaustive()
    }
}
