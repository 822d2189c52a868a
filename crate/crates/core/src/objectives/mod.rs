//! Divergences and the estimation objectives derived from them.
//!
//! Every objective follows the minimization convention and returns an
//! [`ObjectiveValue`]. The empirical objectives take expectations over a
//! [`Dataset`]; the population forms take them over an exact joint and are
//! the oracles the empirical forms are checked against.

mod continuous;
mod discrete;
mod population;

pub use crate::scalespace::fisher_divergence as fisher_exact;
pub use continuous::sm_objective;
pub use discrete::{
    exact_mle_objective, gsm_discrete_objective, pseudo_likelihood_objective, ratio_matching_objective,
    symbol_summed_ratio_objective, symbol_summed_rm_objective,
};
pub use population::{gsm_discrete_population, kl_exact, ratio_matching_population, squared_conditional_difference};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{DataKind, Dataset, Model, ModelKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectiveKind {
    SmContinuous,
    GsmDiscrete,
    RatioMatching,
    PseudoLikelihood,
    ExactMle,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 5] = [
        ObjectiveKind::SmContinuous,
        ObjectiveKind::GsmDiscrete,
        ObjectiveKind::RatioMatching,
        ObjectiveKind::PseudoLikelihood,
        ObjectiveKind::ExactMle,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ObjectiveKind::SmContinuous => "sm",
            ObjectiveKind::GsmDiscrete => "gsm",
            ObjectiveKind::RatioMatching => "rm",
            ObjectiveKind::PseudoLikelihood => "pl",
            ObjectiveKind::ExactMle => "mle",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag() == tag.trim())
            .ok_or_else(|| Error::Parse(format!("unknown objective `{tag}` (expected sm, gsm, rm, pl or mle)")))
    }

    /// Score matching needs a continuous model; the conditional-based
    /// objectives need a discrete one; the exact likelihood works for
    /// discrete models and for the Gaussian, whose normalizer is known.
    pub fn supports(&self, kind: ModelKind) -> bool {
        match self {
            ObjectiveKind::SmContinuous => !kind.is_discrete(),
            ObjectiveKind::GsmDiscrete | ObjectiveKind::RatioMatching | ObjectiveKind::PseudoLikelihood => {
                kind.is_discrete()
            }
            ObjectiveKind::ExactMle => kind.is_discrete() || kind == ModelKind::Gaussian,
        }
    }

    pub fn check_model(&self, model: &Model) -> Result<()> {
        if self.supports(model.kind()) {
            Ok(())
        } else {
            Err(Error::Incompatible {
                objective: self.tag().into(),
                model: model.describe(),
            })
        }
    }

    /// Checks the model kind and that the data matches it in shape.
    pub fn check(&self, model: &Model, data: &Dataset) -> Result<()> {
        self.check_model(model)?;
        if data.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: data.dim(),
            });
        }
        match (data.kind(), model.alphabet_size()) {
            (DataKind::Continuous, None) => Ok(()),
            (DataKind::Discrete { m }, Some(mm)) if m == mm => Ok(()),
            (kind, _) => Err(Error::Incompatible {
                objective: format!("{} on {kind:?} data", self.tag()),
                model: model.describe(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    /// Analytic `∂value/∂θ` when the objective provides one.
    pub grad: Option<Vec<f64>>,
}

/// Evaluates `kind` at `theta` (in the layout of `model`).
pub fn evaluate(kind: ObjectiveKind, model: &Model, theta: &[f64], data: &Dataset) -> Result<ObjectiveValue> {
    match kind {
        ObjectiveKind::SmContinuous => sm_objective(model, theta, data),
        ObjectiveKind::GsmDiscrete => gsm_discrete_objective(model, theta, data),
        ObjectiveKind::RatioMatching => ratio_matching_objective(model, theta, data),
        ObjectiveKind::PseudoLikelihood => pseudo_likelihood_objective(model, theta, data),
        ObjectiveKind::ExactMle => exact_mle_objective(model, theta, data),
    }
}

/// Loggable evaluation record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveRecord {
    pub objective: String,
    pub theta: Vec<f64>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad: Option<Vec<f64>>,
}

impl ObjectiveRecord {
    pub fn new(kind: ObjectiveKind, theta: &[f64], v: &ObjectiveValue) -> Self {
        Self {
            objective: kind.tag().into(),
            theta: theta.to_vec(),
            value: v.value,
            grad: v.grad.clone(),
        }
    }
}
