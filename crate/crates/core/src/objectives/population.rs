//! Exact divergences between a known distribution and a model, by
//! enumeration or quadrature.

use crate::error::{Error, Result};
use crate::models::{Model, NormalizedDensity};
use crate::numeric::{log_sum_exp, pairwise_sum};
use crate::operators::{DiscreteJoint, SingletonConditionals};
use crate::scalespace::kl_divergence;

/// `Σ p log(p/q)` (or its trapezoid integral on grids).
pub fn kl_exact(p: &NormalizedDensity, q: &NormalizedDensity) -> Result<f64> {
    match (p, q) {
        (NormalizedDensity::Grid(p), NormalizedDensity::Grid(q)) => kl_divergence(p, q),
        (NormalizedDensity::Discrete(p), NormalizedDensity::Discrete(q)) => {
            if p.space() != q.space() {
                return Err(Error::ShapeMismatch("joints live on different state spaces".into()));
            }
            let mut terms = Vec::with_capacity(p.probs().len());
            for (index, (&a, &b)) in p.probs().iter().zip(q.probs()).enumerate() {
                if a <= 0.0 {
                    continue;
                }
                if b <= 0.0 {
                    return Err(Error::NotAbsolutelyContinuous { index });
                }
                terms.push(a * (a.ln() - b.ln()));
            }
            Ok(pairwise_sum(&terms))
        }
        _ => Err(Error::ShapeMismatch(
            "cannot compare a grid density with a discrete joint".into(),
        )),
    }
}

fn model_for(p: &DiscreteJoint, model: &Model, theta: &[f64]) -> Result<Model> {
    let q = model.with_params(theta)?;
    if q.alphabet_size() != Some(p.space().alphabet_size()) || q.dim() != p.space().dim() {
        return Err(Error::Incompatible {
            objective: format!(
                "population divergence against a joint with m={}, d={}",
                p.space().alphabet_size(),
                p.space().dim()
            ),
            model: q.describe(),
        });
    }
    Ok(q)
}

/// Sums `p(x) · term(x)` over the states where `p` is positive.
fn over_support(p: &DiscreteJoint, term: impl Fn(&[usize]) -> Result<f64>) -> Result<f64> {
    let terms = p
        .space()
        .states()
        .zip(p.probs())
        .filter(|(_, w)| **w > 0.0)
        .map(|(x, w)| Ok(w * term(&x)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Marginalization-operator divergence
/// `Σ_x p(x) Σ_i (1/p(x_i|x^{\i}) − 1/q_θ(x_i|x^{\i}))²`: the operator's
/// score at `x` is the vector of reciprocal singleton conditionals.
pub fn gsm_discrete_population(p: &DiscreteJoint, model: &Model, theta: &[f64]) -> Result<f64> {
    let q = model_for(p, model, theta)?;
    over_support(p, |x| {
        let mut total = 0.0;
        for i in 0..x.len() {
            let pc = p.conditional(x, i)?[x[i]];
            let qc = q.singleton_conditional(x, i)?[x[i]];
            total += (1.0 / pc - 1.0 / qc).powi(2);
        }
        Ok(total)
    })
}

/// `Σ_x p(x) Σ_i Σ_ξ (p(ξ|x^{\i}) − q_θ(ξ|x^{\i}))²`, straight from the
/// conditionals.
pub fn squared_conditional_difference(p: &DiscreteJoint, model: &Model, theta: &[f64]) -> Result<f64> {
    let q = model_for(p, model, theta)?;
    over_support(p, |x| {
        let mut total = 0.0;
        for i in 0..x.len() {
            let pc = p.conditional(x, i)?;
            let qc = q.singleton_conditional(x, i)?;
            total += pc.iter().zip(&qc).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        Ok(total)
    })
}

/// `φ(u) = 1/(1+u)` of the odds of symbol `s` against all other symbols,
/// given log weights of every symbol.
fn phi_of_odds(logs: &[f64], s: usize) -> f64 {
    let rest: Vec<f64> = logs
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != s)
        .map(|(_, &l)| l)
        .collect();
    let log_odds = logs[s] - log_sum_exp(&rest);
    1.0 / (1.0 + log_odds.exp())
}

/// Ratio-matching population divergence
/// `Σ_x p(x) Σ_i Σ_ξ [φ(p(ξ, x^{\i}) / p(∼ξ, x^{\i})) − φ(q̃(ξ, x^{\i}) / q̃(∼ξ, x^{\i}))]²`
/// where `∼ξ` sums over every other symbol. The model side uses only
/// unnormalized values.
pub fn ratio_matching_population(p: &DiscreteJoint, model: &Model, theta: &[f64]) -> Result<f64> {
    let q = model_for(p, model, theta)?;
    let space = *p.space();
    let m = space.alphabet_size();
    over_support(p, |x| {
        let mut total = 0.0;
        let mut y = x.to_vec();
        for i in 0..x.len() {
            let mut p_logs = Vec::with_capacity(m);
            let mut q_logs = Vec::with_capacity(m);
            for s in 0..m {
                y[i] = s;
                p_logs.push(p.probs()[space.encode(&y)].ln());
                q_logs.push(q.log_unnorm_discrete(&y)?);
            }
            y[i] = x[i];
            for s in 0..m {
                total += (phi_of_odds(&p_logs, s) - phi_of_odds(&q_logs, s)).powi(2);
            }
        }
        Ok(total)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Dataset, Graph};
    use crate::objectives::{gsm_discrete_objective, ratio_matching_objective};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ising2(j: f64) -> Model {
        Model::ising(Graph::chain(2), vec![0.0, 0.0, j]).unwrap()
    }

    /// Brute-force `D_M` for d = 2 written out state by state.
    fn gsm_population_d2(p: &[f64; 4], q: &[f64; 4]) -> f64 {
        let idx = |a: usize, b: usize| 2 * a + b;
        let mut total = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let x = idx(a, b);
                let c0 = |t: &[f64; 4]| t[x] / (t[idx(0, b)] + t[idx(1, b)]);
                let c1 = |t: &[f64; 4]| t[x] / (t[idx(a, 0)] + t[idx(a, 1)]);
                total += p[x] * ((1.0 / c0(p) - 1.0 / c0(q)).powi(2) + (1.0 / c1(p) - 1.0 / c1(q)).powi(2));
            }
        }
        total
    }

    #[test]
    fn kl_uniform_against_ising() {
        let u = NormalizedDensity::Discrete(DiscreteJoint::uniform(2, 2).unwrap());
        let q = ising2(0.5).exact_normalize().unwrap();
        let NormalizedDensity::Discrete(qj) = &q else {
            unreachable!()
        };
        let expect: f64 = qj.probs().iter().map(|pq| 0.25 * (0.25f64 / pq).ln()).sum();
        let v = kl_exact(&u, &q).unwrap();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.1201).abs() < 1e-4, "{v}");
        assert_eq!(kl_exact(&q, &q).unwrap(), 0.0);
    }

    #[test]
    fn uniform_against_ising_by_enumeration() {
        let u = DiscreteJoint::uniform(2, 2).unwrap();
        let m = ising2(0.5);
        let q = m.joint().unwrap();
        let qp: [f64; 4] = q.probs().try_into().unwrap();
        let d = gsm_discrete_population(&u, &m, m.params()).unwrap();
        assert!((d - gsm_population_d2(&[0.25; 4], &qp)).abs() < 1e-12);
        let s = 1.0 / (1.0 + (-1.0f64).exp());
        // 16 terms of (0.5 − σ(±1))², each weighted 1/4
        let sq = 4.0 * (0.5 - s).powi(2);
        assert!((sq - 0.21355226703407265).abs() < 1e-15);
        assert!((squared_conditional_difference(&u, &m, m.params()).unwrap() - sq).abs() < 1e-12);
        assert!((ratio_matching_population(&u, &m, m.params()).unwrap() - sq).abs() < 1e-12);
    }

    #[test]
    fn zero_for_the_model_itself() {
        let m = Model::ising_chain(3, 0.7, -0.2).unwrap();
        let p = m.joint().unwrap();
        assert!(gsm_discrete_population(&p, &m, m.params()).unwrap() < 1e-20);
        assert!(ratio_matching_population(&p, &m, m.params()).unwrap() < 1e-24);
        assert!(squared_conditional_difference(&p, &m, m.params()).unwrap() < 1e-24);
    }

    #[test]
    fn against_a_uniform_binary_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = DiscreteJoint::from_weights(2, 3, (0..8).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
        let u = Model::ising(Graph::complete(3), vec![0.0; 6]).unwrap();
        let mut direct = 0.0;
        for x in p.space().states() {
            for i in 0..3 {
                let c = p.conditional(&x, i).unwrap();
                direct += p.prob(&x).unwrap() * c.iter().map(|v| (v - 0.5).powi(2)).sum::<f64>();
            }
        }
        assert!((squared_conditional_difference(&p, &u, u.params()).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn empirical_forms_are_constant_offsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = DiscreteJoint::from_weights(2, 3, (0..8).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
        let data = Dataset::weighted_enumeration(&p);
        let m = Model::ising(Graph::complete(3), vec![0.0; 6]).unwrap();
        let mut gsm_offsets = Vec::new();
        let mut rm_offsets = Vec::new();
        for _ in 0..20 {
            let theta: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            gsm_offsets.push(
                gsm_discrete_population(&p, &m, &theta).unwrap()
                    - gsm_discrete_objective(&m, &theta, &data).unwrap().value,
            );
            rm_offsets.push(
                ratio_matching_population(&p, &m, &theta).unwrap()
                    - ratio_matching_objective(&m, &theta, &data).unwrap().value,
            );
        }
        for offsets in [gsm_offsets, rm_offsets] {
            let spread = offsets.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                - offsets.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            assert!(spread < 1e-10, "{spread}");
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let p = DiscreteJoint::uniform(2, 3).unwrap();
        let m = ising2(0.5);
        assert!(matches!(
            gsm_discrete_population(&p, &m, m.params()),
            Err(Error::Incompatible { .. })
        ));
    }
}
