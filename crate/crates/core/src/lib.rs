//! Partition-free estimation for unnormalized models.
//!
//! The crate covers continuous score matching, its generalization to other
//! linear operators (notably marginalization for discrete data), ratio
//! matching and pseudo-likelihood baselines, and a grid-based engine for
//! checking the identities between KL divergence, Fisher divergence and
//! Gaussian smoothing.

pub mod error;
pub mod estimation;
pub mod models;
pub mod numeric;
pub mod objectives;
pub mod operators;
pub mod scalespace;
pub mod verify;

pub use error::{Error, Result};
