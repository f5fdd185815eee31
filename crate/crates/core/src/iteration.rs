//! The two numeric iteration lemmas: absorption of a self-referential bound
//! and geometric convergence of `Y_{i+1} ≤ C b^i Y_i^{1+κ}`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{powf, powi};

/// Decay threshold below which the tracked sequence is considered zero.
pub const GEOMETRIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum GeometricOutcome {
    /// `Y_0` met the threshold; `iterates[i] = Y_i`.
    Converged {
        iterates: Vec<f64>,
        threshold: f64,
        /// First index with `Y_i < 1e-12`, if reached within the budget.
        below_tolerance_at: Option<usize>,
        /// `Y_{i+1} ≤ Y_i` along the whole trajectory.
        monotone: bool,
    },
    ThresholdViolated {
        threshold: f64,
        y0: f64,
    },
}

/// `C^{−1/κ} b^{−1/κ²}`; infinite when `C = 0`.
pub fn geometric_threshold(c: f64, b: f64, kappa: f64) -> f64 {
    if c == 0.0 {
        return f64::INFINITY;
    }
    powf(c, -1.0 / kappa) * powf(b, -1.0 / (kappa * kappa))
}

/// Runs the extremal recursion `Y_{i+1} = C b^i Y_i^{1+κ}` for `steps` steps
/// when `Y_0` lies below the threshold.
pub fn geometric_convergence(c: f64, b: f64, kappa: f64, y0: f64, steps: usize) -> Result<GeometricOutcome> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::param("C", format!("must be finite and ≥ 0, got {c}")));
    }
    if !(b > 1.0 && b.is_finite()) {
        return Err(Error::param("b", format!("must exceed 1, got {b}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param("kappa", format!("must be positive, got {kappa}")));
    }
    if !(y0 >= 0.0) {
        return Err(Error::param("Y0", format!("must be non-negative, got {y0}")));
    }
    let threshold = geometric_threshold(c, b, kappa);
    if y0 > threshold {
        return Ok(GeometricOutcome::ThresholdViolated { threshold, y0 });
    }
    let mut iterates = Vec::with_capacity(steps + 1);
    iterates.push(y0);
    let mut y = y0;
    for i in 0..steps {
        y = if y == 0.0 {
            0.0
        } else {
            c * powi(b, i as i32) * powf(y, 1.0 + kappa)
        };
        iterates.push(y);
    }
    let below_tolerance_at = iterates.iter().position(|&v| v < GEOMETRIC_TOL);
    let monotone = iterates.windows(2).all(|w| w[1] <= w[0]);
    Ok(GeometricOutcome::Converged {
        iterates,
        threshold,
        below_tolerance_at,
        monotone,
    })
}

/// Constants of the absorption hypothesis
/// `φ(ρ) ≤ η φ(r) + A/(r−ρ)^α + B/(r−ρ)^β + C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorptionParams {
    pub eta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl AbsorptionParams {
    fn right_side(&self, gap: f64) -> f64 {
        let mut rhs = self.c;
        if self.a != 0.0 {
            rhs += self.a / powf(gap, self.alpha);
        }
        if self.b != 0.0 {
            rhs += self.b / powf(gap, self.beta);
        }
        rhs
    }

    /// `C̃(η, α) = (1−τ)^{−α} / (1 − η τ^{−α})` with `η τ^{−α} = (1+η)/2`.
    pub fn c_tilde(&self) -> f64 {
        let target = 0.5 * (1.0 + self.eta);
        let tau = if self.alpha == 0.0 {
            0.5
        } else {
            powf(self.eta / target, 1.0 / self.alpha)
        };
        powf(1.0 - tau, -self.alpha) / (1.0 - target)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AbsorptionOutcome {
    /// The hypothesis holds on every grid pair; for all pairs
    /// `φ(ρ₀) ≤ C̃ (A/(r₀−ρ₀)^α + B/(r₀−ρ₀)^β + C)`.
    Certified {
        c_tilde: f64,
        /// The conclusion bound on the widest pair `(R0, R1)`.
        bound: f64,
        /// `max φ(ρ₀) / bound(ρ₀, r₀)` over all grid pairs, at most 1.
        worst_ratio: f64,
    },
    /// First grid pair `(ρ, r)` violating the hypothesis.
    HypothesisViolated {
        rho: f64,
        r: f64,
        lhs: f64,
        rhs: f64,
    },
}

/// Checks the hypothesis on every grid pair `ρ < r` of the increasing grid
/// `radii` and certifies the conclusion.
pub fn absorption_iteration(radii: &[f64], phi: &[f64], params: AbsorptionParams) -> Result<AbsorptionOutcome> {
    let AbsorptionParams { eta, alpha, beta, .. } = params;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::param("eta", format!("must lie in (0, 1), got {eta}")));
    }
    if !(alpha >= beta && beta >= 0.0) {
        return Err(Error::param("alpha", format!("need α ≥ β ≥ 0, got α={alpha}, β={beta}")));
    }
    if params.a < 0.0 || params.b < 0.0 || params.c < 0.0 {
        return Err(Error::param("A", "constants A, B, C must be non-negative"));
    }
    if radii.len() < 2 || radii.len() != phi.len() {
        return Err(Error::param("radii", "need at least two radii with one sample each"));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("radii", "must be strictly increasing"));
    }
    if phi.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::param("phi", "samples must be finite and non-negative"));
    }

    for i in 0..radii.len() {
        for j in i + 1..radii.len() {
            let lhs = phi[i];
            let rhs = eta * phi[j] + params.right_side(radii[j] - radii[i]);
            if lhs > rhs * (1.0 + 1e-12) {
                return Ok(AbsorptionOutcome::HypothesisViolated {
                    rho: radii[i],
                    r: radii[j],
                    lhs,
                    rhs,
                });
            }
        }
    }

    let c_tilde = params.c_tilde();
    let mut worst_ratio: f64 = 0.0;
    for i in 0..radii.len() {
        for j in i + 1..radii.len() {
            let bound = c_tilde * params.right_side(radii[j] - radii[i]);
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(phi[i] / bound);
            }
        }
    }
    let bound = c_tilde * params.right_side(radii[radii.len() - 1] - radii[0]);
    Ok(AbsorptionOutcome::Certified {
        c_tilde,
        bound,
        worst_ratio,
    })
}
