//! Numerical laboratory for widely degenerate parabolic equations
//!
//! ```text
//!     ∂_t u − div ∇F(x, t, Du) = f
//! ```
//!
//! where `F(x, t, ·)` vanishes on a bounded convex set `E` with `0 ∈ Int E`
//! and is elliptic only outside of it.
//!
//! The crate is `no_std` (with `alloc`) and purely computational:
//!
//! - [`gauge`]: Minkowski functional, dual gauge, polar samples and radii of
//!   a [`ConvexBody`] in the plane.
//! - [`integrand`]: the prototype family `a(x,t)/p · (|ξ|_E − 1)_+^p` with
//!   analytic gradient and Hessian.
//! - [`regularize`]: the truncation / convexification / ε-lift chain that turns
//!   a degenerate integrand into a uniformly convex one with quadratic growth.
//! - [`gmaps`]: the truncation maps `G_δ` and their bi-Lipschitz constants.
//! - [`grid`] and [`solver`]: a variational implicit Euler scheme for the
//!   regularized Cauchy–Dirichlet problem on a rectangle.
//! - [`analysis`] and [`iteration`]: diagnostics on solved fields and the two
//!   numeric iteration lemmas.
//!
//! File formats, configuration and the command line live in the `degenlab`
//! companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod field;
pub mod gauge;
pub mod gmaps;
pub mod grid;
pub mod integrand;
pub mod iteration;
pub mod math;
pub mod regularize;
pub mod solver;

pub use error::{Error, Result};
pub use field::{Coefficient, ConstantField, ScalarField};
pub use gauge::{BodyKind, ConvexBody, DualSample};
pub use gmaps::GDeltaMap;
pub use grid::{GridField, GridSpec};
pub use integrand::IntegrandSpec;
pub use math::{Sym2, Vec2};
pub use regularize::RegularizedIntegrand;
pub use solver::{SolverConfig, StepStats};
