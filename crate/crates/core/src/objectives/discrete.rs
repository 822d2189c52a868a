//! Empirical objectives for discrete models, built from singleton
//! conditionals.
//!
//! Expectations over the data are taken state by state: the dataset is
//! tallied into distinct states (lexicographic order) and the per-state
//! terms are combined with their weights by pairwise summation. For
//! log-linear models `q(ξ|·) ∝ exp(θ·φ_ξ)`, so
//! `∂q(ξ|·)/∂θ = q(ξ|·)(φ_ξ − φ̄)` with `φ̄ = Σ_ξ q(ξ|·) φ_ξ`; all analytic
//! gradients below follow from that.

use super::continuous::gaussian_nll;
use super::{ObjectiveKind, ObjectiveValue};
use crate::error::{Error, Result};
use crate::models::{Dataset, Model};
use crate::numeric::{log_sum_exp, pairwise_sum, pairwise_sum_rows};
use crate::operators::StateSpace;

/// Conditional of one coordinate with everything its gradient needs.
struct Local {
    q: Vec<f64>,
    log_q: Vec<f64>,
    phi: Vec<Vec<f64>>,
    phi_bar: Vec<f64>,
}

fn local(model: &Model, x: &[usize], i: usize) -> Result<Local> {
    let q = model.singleton_conditional(x, i)?;
    let log_q = model.log_singleton_conditional(x, i)?;
    let mut y = x.to_vec();
    let phi = (0..q.len())
        .map(|s| {
            y[i] = s;
            model.features(&y)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut phi_bar = vec![0.0; model.n_params()];
    for (qs, f) in q.iter().zip(&phi) {
        for (b, v) in phi_bar.iter_mut().zip(f) {
            *b += qs * v;
        }
    }
    Ok(Local { q, log_q, phi, phi_bar })
}

/// `out += c · (φ_s − φ̄)`.
fn add_centered(out: &mut [f64], c: f64, l: &Local, s: usize) {
    for ((o, f), b) in out.iter_mut().zip(&l.phi[s]).zip(&l.phi_bar) {
        *o += c * (f - b);
    }
}

/// Per-state value and gradient of an objective.
type StateTerm = (f64, Option<Vec<f64>>);

/// Weighted expectation over the tallied data of a per-state term.
fn expectation(
    kind: ObjectiveKind,
    model: &Model,
    theta: &[f64],
    data: &Dataset,
    term: impl Fn(&Model, &[usize]) -> Result<StateTerm>,
) -> Result<ObjectiveValue> {
    kind.check(model, data)?;
    let q = model.with_params(theta)?;
    let tally = data.tally().expect("discrete data after kind check");
    let mut values = Vec::with_capacity(tally.len());
    let mut grads = Vec::with_capacity(tally.len());
    for (x, w) in tally {
        let (v, g) = term(&q, x)?;
        values.push(w * v);
        if let Some(g) = g {
            grads.push(g.into_iter().map(|gk| w * gk).collect::<Vec<f64>>());
        }
    }
    let value = pairwise_sum(&values);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { theta: theta.to_vec() });
    }
    let grad = (grads.len() == values.len()).then(|| pairwise_sum_rows(&grads, theta.len()));
    Ok(ObjectiveValue { value, grad })
}

fn underflow_guard(v: f64, coordinate: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::ConditionalUnderflow { coordinate })
    }
}

/// Partition-free form of the marginalization-operator divergence:
/// weighted mean over the data of
/// `Σ_i [q(x_i|x^{\i})^{−2} − 2 Σ_ξ q(ξ|x^{\i})^{−1}] + m²d`.
///
/// Against the population divergence it drops only `E_p Σ_i p(x_i|·)^{−2}`,
/// which does not depend on θ. The `m²d` constant makes every uniform model
/// evaluate to exactly zero.
pub fn gsm_discrete_objective(model: &Model, theta: &[f64], data: &Dataset) -> Result<ObjectiveValue> {
    let m = model.alphabet_size().unwrap_or(0) as f64;
    let d = model.dim() as f64;
    expectation(ObjectiveKind::GsmDiscrete, model, theta, data, |q, x| {
        let mut value = m * m * d;
        let mut grad = vec![0.0; q.n_params()];
        for i in 0..x.len() {
            let l = local(q, x, i)?;
            let own = underflow_guard(l.q[x[i]].powi(-2), i)?;
            value += own;
            add_centered(&mut grad, -2.0 * own, &l, x[i]);
            for s in 0..l.q.len() {
                let inv = underflow_guard(1.0 / l.q[s], i)?;
                value -= 2.0 * inv;
                add_centered(&mut grad, 2.0 * inv, &l, s);
            }
        }
        Ok((value, Some(grad)))
    })
}

/// Brier-type ratio-matching objective: weighted mean of
/// `Σ_i Σ_ξ ([ξ = x_i] − q(ξ|x^{\i}))²`. It differs from the population
/// form `Σ p Σ_i Σ_ξ (p(ξ|·) − q(ξ|·))²` by a θ-free constant.
pub fn ratio_matching_objective(model: &Model, theta: &[f64], data: &Dataset) -> Result<ObjectiveValue> {
    expectation(ObjectiveKind::RatioMatching, model, theta, data, |q, x| {
        let mut value = 0.0;
        let mut grad = vec![0.0; q.n_params()];
        for i in 0..x.len() {
            let l = local(q, x, i)?;
            for s in 0..l.q.len() {
                let resid = if s == x[i] { 1.0 } else { 0.0 } - l.q[s];
                value += resid * resid;
                add_centered(&mut grad, -2.0 * resid * l.q[s], &l, s);
            }
        }
        Ok((value, Some(grad)))
    })
}

/// Negative mean log pseudo-likelihood `−Σ_i log q(x_i|x^{\i})`.
pub fn pseudo_likelihood_objective(model: &Model, theta: &[f64], data: &Dataset) -> Result<ObjectiveValue> {
    expectation(ObjectiveKind::PseudoLikelihood, model, theta, data, |q, x| {
        let mut value = 0.0;
        let mut grad = vec![0.0; q.n_params()];
        for i in 0..x.len() {
            let l = local(q, x, i)?;
            value -= l.log_q[x[i]];
            add_centered(&mut grad, -1.0, &l, x[i]);
        }
        Ok((value, Some(grad)))
    })
}

/// Negative mean log of the normalized likelihood. Discrete models are
/// normalized by enumeration; the Gaussian in closed form.
pub fn exact_mle_objective(model: &Model, theta: &[f64], data: &Dataset) -> Result<ObjectiveValue> {
    ObjectiveKind::ExactMle.check(model, data)?;
    if !model.is_discrete() {
        let v = gaussian_nll(&model.with_params(theta)?, data)?;
        if !v.value.is_finite() {
            return Err(Error::NonFiniteObjective { theta: theta.to_vec() });
        }
        return Ok(v);
    }
    let q = model.with_params(theta)?;
    let space = StateSpace::new(q.alphabet_size().unwrap_or(0), q.dim())?;
    let energies = space
        .states()
        .map(|x| q.log_unnorm_discrete(&x))
        .collect::<Result<Vec<f64>>>()?;
    let log_z = log_sum_exp(&energies);
    let feats = space.states().map(|x| q.features(&x)).collect::<Result<Vec<_>>>()?;
    let model_mean = pairwise_sum_rows(
        &feats
            .iter()
            .zip(&energies)
            .map(|(f, e)| {
                let p = (e - log_z).exp();
                f.iter().map(|v| p * v).collect()
            })
            .collect::<Vec<Vec<f64>>>(),
        theta.len(),
    );
    expectation(ObjectiveKind::ExactMle, model, theta, data, |q, x| {
        let value = log_z - q.log_unnorm_discrete(x)?;
        let grad = feats[space.encode(x)]
            .iter()
            .zip(&model_mean)
            .map(|(f, e)| e - f)
            .collect();
        Ok((value, Some(grad)))
    })
}

/// Literal symbol-summed form
/// `Σ_i Σ_ξ (q(∼ξ|·)/q(ξ|·))² − m·d`, with `q(∼ξ|·) = 1 − q(ξ|·)`.
///
/// It depends on a sample only through its contexts `x^{\i}`, never on
/// the observed symbols, so it is not an estimator; it is kept for
/// reference and to document that fact. No gradient.
pub fn symbol_summed_ratio_objective(model: &Model, theta: &[f64], data: &Dataset) -> Result<ObjectiveValue> {
    let md = (model.alphabet_size().unwrap_or(0) * model.dim()) as f64;
    expectation(ObjectiveKind::GsmDiscrete, model, theta, data, |q, x| {
        let mut value = -md;
        for i in 0..x.len() {
            for qs in q.singleton_conditional(x, i)? {
                value += underflow_guard(((1.0 - qs) / qs).powi(2), i)?;
            }
        }
        Ok((value, None))
    })
}

/// Literal symbol-summed form `Σ_i Σ_ξ (1 − q(ξ|·))²`; same caveat as
/// [`symbol_summed_ratio_objective`].
pub fn symbol_summed_rm_objective(model: &Model, theta: &[f64], data: &Dataset) -> Result<ObjectiveValue> {
    expectation(ObjectiveKind::RatioMatching, model, theta, data, |q, x| {
        let mut value = 0.0;
        for i in 0..x.len() {
            for qs in q.singleton_conditional(x, i)? {
                value += (1.0 - qs).powi(2);
            }
        }
        Ok((value, None))
    })
}
