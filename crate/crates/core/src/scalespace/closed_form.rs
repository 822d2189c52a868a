//! Closed-form divergences between one-dimensional normals, and their
//! evolution when both are smoothed with the same variance `t`. These are
//! the oracles the grid computations are checked against.

use std::f64::consts::{E, PI};

/// `KL(N(m1, v1) ‖ N(m2, v2))`.
pub fn gaussian_kl(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    0.5 * ((v2 / v1).ln() + v1 / v2 + (m1 - m2).powi(2) / v2 - 1.0)
}

/// Fisher divergence `E_p |∂ log p − ∂ log q|²` between two normals.
pub fn gaussian_fisher(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
    v1 * (1.0 / v2 - 1.0 / v1).powi(2) + (m1 - m2).powi(2) / (v2 * v2)
}

/// Derivative of the KL divergence in `t` after smoothing both normals by
/// variance `t`, obtained by differentiating [`gaussian_kl`] directly.
pub fn gaussian_kl_dt(m1: f64, v1: f64, m2: f64, v2: f64, t: f64) -> f64 {
    let (a, b) = (v1 + t, v2 + t);
    0.5 * (1.0 / b - 1.0 / a + (b - a) / (b * b) - (m1 - m2).powi(2) / (b * b))
}

pub fn gaussian_entropy(var: f64) -> f64 {
    0.5 * (2.0 * PI * E * var).ln()
}
