//! Densities on regular grids and their behavior under Gaussian smoothing.
//!
//! `p̃_t` denotes `p` convolved with an isotropic normal of variance `t`,
//! which solves `∂_t p̃ = ½ Δ p̃`. The module provides the smoothing itself,
//! entropy, Fisher information and the KL/Fisher divergence pair on grids,
//! divergence curves over `t`, and the residuals of the identities tying
//! them together.

pub mod closed_form;
mod curve;
mod grid;
mod measures;
mod smoothing;

pub use curve::{
    debruijn_residual, divergence_curve, entropy_curve, kl_decay_residual, t_grid, CurvePoint, DivergenceCurve,
    EntropyPoint, CURVE_HEADER,
};
pub use grid::{Axis, GridDensity, GridGeometry, LOG_FLOOR, SUPPORT_FRACTION};
pub use measures::{entropy, fisher_divergence, fisher_information, grid_identity_residual, kl_divergence};
pub use smoothing::{heat_pde_residual, smooth, KERNEL_HALF_WIDTH};
