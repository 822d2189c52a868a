use nalgebra::{DMatrix, DVector};

use super::{ObjectiveKind, ObjectiveValue};
use crate::error::{Error, Result};
use crate::models::{Dataset, Model};
use crate::numeric::pairwise_sum;

/// Gradient with respect to a symmetric matrix, folded into the lower
/// triangle layout: off-diagonal slots move two entries at once.
fn push_lower(grad: &mut Vec<f64>, g: &DMatrix<f64>) {
    for i in 0..g.nrows() {
        for j in 0..=i {
            grad.push(if i == j { g[(i, j)] } else { 2.0 * g[(i, j)] });
        }
    }
}

/// Weighted first and second moments of `x − μ`.
fn centered_moments(data: &Dataset, mean: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let d = mean.len();
    let w = data.row_weights();
    let rows: Vec<DVector<f64>> = (0..data.n())
        .map(|k| DVector::from_column_slice(data.real_row(k).unwrap_or(&[])) - mean)
        .collect();
    let rbar = DVector::from_fn(d, |a, _| {
        pairwise_sum(&rows.iter().zip(&w).map(|(r, wk)| wk * r[a]).collect::<Vec<_>>())
    });
    let c = DMatrix::from_fn(d, d, |a, b| {
        pairwise_sum(&rows.iter().zip(&w).map(|(r, wk)| wk * r[a] * r[b]).collect::<Vec<_>>())
    });
    (rbar, c)
}

/// Empirical score-matching objective: the weighted mean of
/// `|∇_x log q̃|² + 2 Δ_x log q̃` over the data.
///
/// For the Gaussian the gradient is analytic. Writing `P = Σ⁻¹`,
/// `r̄ = E[x − μ]` and `C = E[(x − μ)(x − μ)ᵀ]`, the objective is
/// `tr(P²C) − 2 tr P`, so `∂/∂μ = −2P²r̄` and `∂/∂Σ = −P(PC + CP − 2I)P`.
pub fn sm_objective(model: &Model, theta: &[f64], data: &Dataset) -> Result<ObjectiveValue> {
    ObjectiveKind::SmContinuous.check(model, data)?;
    let q = model.with_params(theta)?;
    let w = data.row_weights();
    let terms = (0..data.n())
        .map(|k| {
            let x = data.real_row(k).unwrap_or(&[]);
            let g = q.grad_x_log(x)?;
            let lap = q.laplacian_x_log(x)?;
            Ok(w[k] * (g.iter().map(|v| v * v).sum::<f64>() + 2.0 * lap))
        })
        .collect::<Result<Vec<f64>>>()?;
    let value = pairwise_sum(&terms);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { theta: theta.to_vec() });
    }
    let grad = q.gaussian_parts().map(|(mean, _, p)| {
        let (rbar, c) = centered_moments(data, mean);
        let p2 = p * p;
        let mut grad: Vec<f64> = (-2.0 * &p2 * &rbar).iter().copied().collect();
        let eye = DMatrix::<f64>::identity(mean.len(), mean.len());
        let g_p: DMatrix<f64> = p * &c + &c * p - eye * 2.0;
        let g: DMatrix<f64> = -(p * g_p * p);
        push_lower(&mut grad, &g);
        grad
    });
    Ok(ObjectiveValue { value, grad })
}

/// Negative mean Gaussian log-likelihood,
/// `½(d log 2π + log det Σ + tr(PC) )` with `C` centered at `μ`.
pub(crate) fn gaussian_nll(q: &Model, data: &Dataset) -> Result<ObjectiveValue> {
    let (mean, _, p) = q.gaussian_parts().ok_or_else(|| Error::Incompatible {
        objective: ObjectiveKind::ExactMle.tag().into(),
        model: q.describe(),
    })?;
    let d = mean.len() as f64;
    let log_det = q.gaussian_log_det().unwrap_or(0.0);
    let (rbar, c) = centered_moments(data, mean);
    let value = 0.5 * (d * (2.0 * std::f64::consts::PI).ln() + log_det + (p * &c).trace());
    let mut grad: Vec<f64> = (-(p * &rbar)).iter().copied().collect();
    push_lower(&mut grad, &(0.5 * (p - p * &c * p)));
    Ok(ObjectiveValue {
        value,
        grad: Some(grad),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(&[f64]) -> f64, theta: &[f64], h: f64) -> Vec<f64> {
        (0..theta.len())
            .map(|k| {
                let mut a = theta.to_vec();
                let mut b = theta.to_vec();
                a[k] += h;
                b[k] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn hand_evaluated_values() {
        let m = Model::standard_gaussian(1).unwrap();
        let one = Dataset::continuous(1, vec![0.0], 0).unwrap();
        assert_eq!(sm_objective(&m, m.params(), &one).unwrap().value, -2.0);
        let two = Dataset::continuous(1, vec![1.0, -1.0], 0).unwrap();
        assert_eq!(sm_objective(&m, m.params(), &two).unwrap().value, -1.0);
    }

    #[test]
    fn offset_does_not_matter() {
        let m = Model::gen_gauss_1d(1.5, 0.2, 0.8).unwrap();
        let data = Dataset::continuous(1, vec![-1.0, 0.3, 2.0], 0).unwrap();
        let a = sm_objective(&m, m.params(), &data).unwrap().value;
        let b = sm_objective(&m.with_log_offset(7.0), m.params(), &data).unwrap().value;
        assert_eq!(a, b);
        assert!(sm_objective(&m, m.params(), &data).unwrap().grad.is_none());
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let m = Model::gaussian(&[0.3, -0.2], &[1.5, 0.4, 0.9]).unwrap();
        let data = Dataset::continuous(2, vec![0.1, 1.0, -0.7, 0.2, 1.4, -1.1, 0.5, 0.5], 0).unwrap();
        let theta = m.params().to_vec();
        for (name, f) in [
            (
                "sm",
                Box::new(|t: &[f64]| sm_objective(&m, t, &data)) as Box<dyn Fn(&[f64]) -> Result<ObjectiveValue>>,
            ),
            ("nll", Box::new(|t: &[f64]| gaussian_nll(&m.with_params(t)?, &data))),
        ] {
            let g = f(&theta).unwrap().grad.unwrap();
            let n = fd(|t| f(t).unwrap().value, &theta, 1e-5);
            for (a, b) in g.iter().zip(&n) {
                assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0), "{name}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gaussian_nll_by_hand() {
        let m = Model::standard_gaussian(1).unwrap();
        let data = Dataset::continuous(1, vec![1.0], 0).unwrap();
        let v = gaussian_nll(&m, &data).unwrap().value;
        assert!((v - 0.5 * ((2.0 * std::f64::consts::PI).ln() + 1.0)).abs() < 1e-15);
    }
}
