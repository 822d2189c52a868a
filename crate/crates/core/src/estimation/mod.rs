//! Estimators built on the objectives: a deterministic gradient-descent
//! optimizer, the closed-form Gaussian score-matching fit, finite-difference
//! gradients and a harness comparing estimators on one model.

mod compare;

pub use compare::{compare_estimators, CompareConfig, ComparisonRow, ComparisonTable, COMPARISON_HEADER};

use crate::error::{Error, Result};
use crate::models::{Dataset, Model};
use crate::numeric::{max_abs, pairwise_sum};
use crate::objectives::{evaluate, ObjectiveKind};

/// Central-difference step used by gradient checks.
pub const FD_CHECK_STEP: f64 = 1e-5;
/// Central-difference step used when an objective has no analytic gradient.
pub const FD_OPTIMIZER_STEP: f64 = 1e-6;

/// Step sizes smaller than this end the line search.
const MIN_STEP: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Convergence threshold on the gradient max-norm.
    pub grad_tol: f64,
    pub initial_step: f64,
    pub backtrack: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Starting point; `None` uses [`Model::default_init`].
    pub init: Option<Vec<f64>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-7,
            initial_step: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            init: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        positive("grad_tol", self.grad_tol)?;
        positive("initial_step", self.initial_step)?;
        positive("armijo", self.armijo)?;
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why the optimizer stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIters,
    /// No trial step lowered the objective: near the optimum this means the
    /// remaining decrease is below the objective's rounding error.
    Stalled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub objective: ObjectiveKind,
    pub theta_hat: Vec<f64>,
    pub objective_value: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Objective value at the start and after every accepted step.
    pub trajectory: Vec<f64>,
}

/// Central differences of `f` around `theta`, one coordinate at a time.
pub fn fd_gradient(f: impl Fn(&[f64]) -> Result<f64>, theta: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        probe[k] = theta[k] + step;
        let up = f(&probe)?;
        probe[k] = theta[k] - step;
        let down = f(&probe)?;
        probe[k] = theta[k];
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::NonFiniteObjective { theta: theta.to_vec() });
        }
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Value and gradient of `kind` at `theta`, falling back on finite
/// differences when the objective has no analytic gradient.
fn value_and_gradient(kind: ObjectiveKind, model: &Model, theta: &[f64], data: &Dataset) -> Result<(f64, Vec<f64>)> {
    let v = evaluate(kind, model, theta, data)?;
    let grad = match v.grad {
        Some(g) => g,
        None => fd_gradient(|t| Ok(evaluate(kind, model, t, data)?.value), theta, FD_OPTIMIZER_STEP)?,
    };
    Ok((v.value, grad))
}

/// Minimizes `objective` over the parameters of `model` by gradient descent
/// with a backtracking (Armijo) line search.
///
/// Every line search starts from `cfg.initial_step`. A trial step must
/// lower the objective strictly as well as pass the Armijo test, so the
/// recorded values decrease. Trial points outside the parameter domain (say,
/// a covariance that is no longer positive definite) or with a non-finite
/// objective count as rejected. The run stops when the gradient max-norm
/// drops to `grad_tol`, after `max_iters` iterations, or when no step passes
/// the line search.
pub fn fit(model: &Model, objective: ObjectiveKind, data: &Dataset, cfg: &OptimizerConfig) -> Result<FitResult> {
    cfg.validate()?;
    objective.check(model, data)?;
    let mut theta = cfg.init.clone().unwrap_or_else(|| model.default_init());
    if theta.len() != model.n_params() {
        return Err(Error::ParamLength {
            layout: model.kind().tag().into(),
            expected: model.n_params(),
            got: theta.len(),
        });
    }
    let (mut value, mut grad) = value_and_gradient(objective, model, &theta, data)?;
    let mut trajectory = vec![value];
    let mut iters = 0;
    let mut stalled = false;
    while iters < cfg.max_iters && max_abs(&grad) > cfg.grad_tol {
        let slope = pairwise_sum(&grad.iter().map(|g| g * g).collect::<Vec<_>>());
        let mut step = cfg.initial_step;
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
            if let Ok((v, g)) = value_and_gradient(objective, model, &trial, data) {
                if v < value && v <= value - cfg.armijo * step * slope {
                    accepted = Some((trial, v, g));
                    break;
                }
            }
            step *= cfg.backtrack;
        }
        let Some((t, v, g)) = accepted else {
            stalled = true;
            break;
        };
        theta = t;
        value = v;
        grad = g;
        trajectory.push(value);
        iters += 1;
    }
    let grad_norm = max_abs(&grad);
    let converged = grad_norm <= cfg.grad_tol;
    let stop = if converged {
        StopReason::Converged
    } else if stalled {
        StopReason::Stalled
    } else {
        StopReason::MaxIters
    };
    Ok(FitResult {
        objective,
        theta_hat: theta,
        objective_value: value,
        grad_norm,
        iters,
        converged,
        stop,
        trajectory,
    })
}

/// Sample mean and `1/N` covariance in the Gaussian parameter layout: the
/// score-matching optimum for a Gaussian model.
pub fn closed_form_gaussian_sm(data: &Dataset) -> Result<Vec<f64>> {
    let Some(values) = data.real_values() else {
        return Err(Error::InvalidArgument(
            "closed-form Gaussian fit needs continuous data".into(),
        ));
    };
    let d = data.dim();
    let w = data.row_weights();
    let rows: Vec<&[f64]> = values.chunks(d).collect();
    let mean: Vec<f64> = (0..d)
        .map(|a| pairwise_sum(&rows.iter().zip(&w).map(|(r, wk)| wk * r[a]).collect::<Vec<_>>()))
        .collect();
    let mut lower = Vec::with_capacity(d * (d + 1) / 2);
    for a in 0..d {
        for b in 0..=a {
            lower.push(pairwise_sum(
                &rows
                    .iter()
                    .zip(&w)
                    .map(|(r, wk)| wk * (r[a] - mean[a]) * (r[b] - mean[b]))
                    .collect::<Vec<_>>(),
            ));
        }
    }
    // validates positive definiteness
    let model = Model::gaussian(&mean, &lower)?;
    Ok(model.params().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Graph;
    use crate::objectives::{gsm_discrete_objective, sm_objective};
    use proptest::prelude::*;

    #[test]
    fn fd_of_a_quadratic() {
        let g = fd_gradient(|t| Ok(t[0] * t[0] + t[1] * t[1]), &[1.0, 2.0], FD_CHECK_STEP).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 4.0).abs() < 1e-8);
        assert!(fd_gradient(|t| Ok(t[0]), &[0.0], 0.0).is_err());
        assert!(matches!(
            fd_gradient(|t| Ok(1.0 / t[0].abs().min(0.0)), &[0.0], 1e-3),
            Err(Error::NonFiniteObjective { .. })
        ));
    }

    #[test]
    fn fd_matches_the_analytic_gradients() {
        let m = Model::gaussian(&[0.5, -0.3], &[1.2, 0.3, 0.8]).unwrap();
        let data = m.sample(200, 4).unwrap();
        let v = sm_objective(&m, m.params(), &data).unwrap();
        let n = fd_gradient(|t| Ok(sm_objective(&m, t, &data)?.value), m.params(), FD_CHECK_STEP).unwrap();
        for (a, b) in v.grad.unwrap().iter().zip(&n) {
            assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0));
        }
        let ising = Model::ising(Graph::chain(2), vec![0.2, -0.1, 0.4]).unwrap();
        let data = ising.sample(300, 5).unwrap();
        let v = gsm_discrete_objective(&ising, ising.params(), &data).unwrap();
        let n = fd_gradient(
            |t| Ok(gsm_discrete_objective(&ising, t, &data)?.value),
            ising.params(),
            FD_CHECK_STEP,
        )
        .unwrap();
        for (a, b) in v.grad.unwrap().iter().zip(&n) {
            assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn closed_form_by_hand() {
        let data = Dataset::continuous(1, vec![0.0, 2.0], 0).unwrap();
        assert_eq!(closed_form_gaussian_sm(&data).unwrap(), vec![1.0, 1.0]);
        let scaled = Dataset::continuous(1, vec![0.0, 6.0], 0).unwrap();
        assert_eq!(closed_form_gaussian_sm(&scaled).unwrap(), vec![3.0, 9.0]);
        let repeated = Dataset::continuous(2, vec![1.0, 2.0, 1.0, 2.0], 0).unwrap();
        assert!(matches!(
            closed_form_gaussian_sm(&repeated),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn gaussian_sm_fit_reaches_the_moments() {
        let truth = Model::gaussian(&[1.0, -0.5], &[1.5, 0.4, 0.7]).unwrap();
        let data = truth.sample(500, 21).unwrap();
        let model = Model::standard_gaussian(2).unwrap();
        let fit = fit(&model, ObjectiveKind::SmContinuous, &data, &OptimizerConfig::default()).unwrap();
        let closed = closed_form_gaussian_sm(&data).unwrap();
        assert!(fit.converged, "{fit:?}");
        let err = fit
            .theta_hat
            .iter()
            .zip(&closed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert!(fit.trajectory.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn population_fit_recovers_the_truth() {
        let truth = Model::ising_chain(3, 0.5, 0.0).unwrap();
        let data = Dataset::weighted_enumeration(&truth.joint().unwrap());
        for kind in [ObjectiveKind::GsmDiscrete, ObjectiveKind::RatioMatching] {
            let fit = fit(&truth, kind, &data, &OptimizerConfig::default()).unwrap();
            let err = fit
                .theta_hat
                .iter()
                .zip(truth.params())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-5, "{kind:?}: {err} after {} iterations", fit.iters);
        }
    }

    #[test]
    fn rounding_floor_stalls_instead_of_spinning() {
        // no objective resolves a gradient of 1e-15
        let truth = Model::ising_chain(4, 0.5, 0.0).unwrap();
        let data = truth.sample(2000, 4).unwrap();
        let cfg = OptimizerConfig {
            grad_tol: 1e-15,
            ..OptimizerConfig::default()
        };
        let r = fit(&truth, ObjectiveKind::GsmDiscrete, &data, &cfg).unwrap();
        assert_eq!(r.stop, StopReason::Stalled);
        assert!(!r.converged && r.iters < 500 && r.grad_norm < 1e-6, "{r:?}");
    }

    #[test]
    fn fits_are_deterministic() {
        let truth = Model::ising_chain(3, 0.5, 0.1).unwrap();
        let data = truth.sample(2000, 8).unwrap();
        let cfg = OptimizerConfig::default();
        let a = fit(&truth, ObjectiveKind::PseudoLikelihood, &data, &cfg).unwrap();
        let b = fit(&truth, ObjectiveKind::PseudoLikelihood, &data, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fd_fallback_for_gen_gauss() {
        let m = Model::gen_gauss_1d(2.0, 0.0, 1.0)
            .unwrap()
            .with_quadrature(crate::scalespace::GridGeometry::line(-12.0, 12.0, 2048).unwrap())
            .unwrap();
        let data = m.with_params(&[0.3, 0.5]).unwrap().sample(2000, 2).unwrap();
        let cfg = OptimizerConfig::default();
        let r = fit(&m, ObjectiveKind::SmContinuous, &data, &cfg).unwrap();
        assert!(r.trajectory.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.theta_hat[0] - 0.3).abs() < 0.1, "{:?}", r.theta_hat);
    }

    #[test]
    fn incompatible_and_invalid_inputs() {
        let gauss = Model::standard_gaussian(1).unwrap();
        let data = Dataset::continuous(1, vec![0.0, 1.0], 0).unwrap();
        let cfg = OptimizerConfig::default();
        assert!(matches!(
            fit(&gauss, ObjectiveKind::GsmDiscrete, &data, &cfg),
            Err(Error::Incompatible { .. })
        ));
        let bad = OptimizerConfig {
            backtrack: 1.0,
            ..OptimizerConfig::default()
        };
        assert!(fit(&gauss, ObjectiveKind::SmContinuous, &data, &bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn accepted_steps_never_increase_the_objective(seed in 0u64..1000, j in -0.8f64..0.8) {
            let truth = Model::ising(Graph::cycle(3), vec![0.1, -0.2, 0.0, j, 0.3, -j]).unwrap();
            let data = truth.sample(400, seed).unwrap();
            let cfg = OptimizerConfig { max_iters: 50, ..OptimizerConfig::default() };
            for kind in [ObjectiveKind::GsmDiscrete, ObjectiveKind::PseudoLikelihood] {
                let r = fit(&truth, kind, &data, &cfg).unwrap();
                prop_assert!(r.trajectory.windows(2).all(|w| w[1] < w[0]));
                prop_assert_eq!(r.trajectory.len(), r.iters + 1);
            }
        }
    }
}
