use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A body whose interior does not contain the origin, or with too few vertices.
    #[error("degenerate convex body: {0}")]
    DegenerateBody(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The Hessian of the integrand was requested on `∂E`, where it does not exist.
    #[error("Hessian undefined on the boundary of the degeneracy set (gauge = {gauge})")]
    BoundarySingularity { gauge: f64 },

    #[error("Newton iteration did not converge in {iterations} steps (last ‖∇J‖∞ = {grad_norm:e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("non-finite value in {0}")]
    Numerical(&'static str),

    #[error("grids do not match: {0}")]
    GridMismatch(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
