use serde::{Deserialize, Serialize};

use super::SimError;

/// Recall weight `beta` and speed weight `gamma`; precision has weight 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FWeights {
    pub beta: f64,
    pub gamma: f64,
}

impl FWeights {
    pub fn new(beta: f64, gamma: f64) -> Result<Self, SimError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(SimError::InvalidParameter(format!("beta = {beta}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(SimError::InvalidParameter(format!("gamma = {gamma}")));
        }
        Ok(Self { beta, gamma })
    }
}

/// Weighted harmonic mean of precision, recall and speed with weights
/// `1, β², γ²`:
///
/// ```text
/// F = (1 + β² + γ²) · p·r·s / (r·s + β²·p·s + γ²·p·r)
/// ```
///
/// With `γ = 0` this is exactly `F_β(p, r)`; with `β = γ = 1` it is the plain
/// three-way harmonic mean. Any zero component carrying positive weight
/// yields 0.
pub fn f_beta_gamma(p: f64, r: f64, s: f64, w: FWeights) -> Result<f64, SimError> {
    for (name, v) in [("precision", p), ("recall", r), ("speed", s)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(SimError::OutOfRange(format!("{name} = {v}")));
        }
    }
    let w = FWeights::new(w.beta, w.gamma)?;
    Ok(f_unchecked(p, r, s, w.beta * w.beta, w.gamma * w.gamma))
}

/// Inner loop form taking squared weights; inputs assumed validated.
#[inline]
pub(crate) fn f_unchecked(p: f64, r: f64, s: f64, beta2: f64, gamma2: f64) -> f64 {
    if p == 0.0 || (beta2 > 0.0 && r == 0.0) || (gamma2 > 0.0 && s == 0.0) {
        return 0.0;
    }
    let mut inv = 1.0 / p;
    if beta2 > 0.0 {
        inv += beta2 / r;
    }
    if gamma2 > 0.0 {
        inv += gamma2 / s;
    }
    (1.0 + beta2 + gamma2) / inv
}
