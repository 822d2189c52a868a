//! Unnormalized model families and the datasets they are fit to.
//!
//! A [`Model`] is a parameterized unnormalized log-density `log q̃_θ`. The
//! continuous kinds expose data-space derivatives; the discrete kinds expose
//! singleton conditionals, which are free of the partition function. Exact
//! normalizers and samplers are provided where the state space or a
//! declared quadrature box makes them tractable.

mod dataset;
mod family;
mod file;
mod sample;

pub use dataset::{DataKind, Dataset};
pub use family::{Graph, Model, ModelKind, NormalizedDensity, CONDITIONAL_FLOOR, GEN_GAUSS_EPS};
pub use file::ModelFile;
