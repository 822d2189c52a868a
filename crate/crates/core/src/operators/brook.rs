//! Joint-probability ratios from singleton conditionals by telescoping, and
//! reconstruction of a full joint from them.

use super::discrete::{DiscreteJoint, SingletonConditionals, StateSpace};
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

/// `log p(xi) − log p(xi_tilde)` telescoped in the given coordinate order.
///
/// Step `k` switches coordinate `order[k]` from `xi` to `xi_tilde` while the
/// coordinates already visited hold their `xi_tilde` values and the rest
/// hold their `xi` values.
fn log_ratio_in_order(
    conds: &impl SingletonConditionals,
    xi: &[usize],
    xi_tilde: &[usize],
    order: &[usize],
) -> Result<f64> {
    let space = StateSpace::new(conds.alphabet_size(), conds.dim())?;
    space.check_state(xi)?;
    space.check_state(xi_tilde)?;
    let mut z = xi.to_vec();
    let mut total = 0.0;
    for &k in order {
        let c = conds.conditional(&z, k)?;
        let (num, den) = (c[xi[k]], c[xi_tilde[k]]);
        if num <= 0.0 || den <= 0.0 {
            return Err(Error::ZeroConditional { coordinate: k });
        }
        total += num.ln() - den.ln();
        z[k] = xi_tilde[k];
    }
    Ok(total)
}

pub fn log_brook_ratio(conds: &impl SingletonConditionals, xi: &[usize], xi_tilde: &[usize]) -> Result<f64> {
    let order: Vec<usize> = (0..conds.dim()).collect();
    log_ratio_in_order(conds, xi, xi_tilde, &order)
}

/// `p(xi) / p(xi_tilde)` from conditionals alone.
pub fn brook_ratio(conds: &impl SingletonConditionals, xi: &[usize], xi_tilde: &[usize]) -> Result<f64> {
    log_brook_ratio(conds, xi, xi_tilde).map(f64::exp)
}

/// Same ratio with the coordinates telescoped in an arbitrary order.
pub fn brook_ratio_ordered(
    conds: &impl SingletonConditionals,
    xi: &[usize],
    xi_tilde: &[usize],
    order: &[usize],
) -> Result<f64> {
    let d = conds.dim();
    let mut seen = vec![false; d];
    for &k in order {
        if k >= d {
            return Err(Error::IndexOutOfRange { index: k, dim: d });
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {k} repeated in telescoping order"
            )));
        }
    }
    if order.len() != d {
        return Err(Error::InvalidArgument(
            "telescoping order must be a permutation of the coordinates".into(),
        ));
    }
    log_ratio_in_order(conds, xi, xi_tilde, order).map(f64::exp)
}

/// Rebuilds the joint from its conditionals, anchored at the all-zeros state.
pub fn reconstruct_joint(conds: &impl SingletonConditionals, m: usize, d: usize) -> Result<DiscreteJoint> {
    if conds.alphabet_size() != m || conds.dim() != d {
        return Err(Error::ShapeMismatch(format!(
            "conditionals describe m={}, d={} but m={m}, d={d} was requested",
            conds.alphabet_size(),
            conds.dim()
        )));
    }
    let space = StateSpace::new(m, d)?;
    let anchor = vec![0; d];
    let logs = space
        .states()
        .map(|x| log_brook_ratio(conds, &x, &anchor))
        .collect::<Result<Vec<f64>>>()?;
    let log_z = log_sum_exp(&logs);
    DiscreteJoint::from_weights(m, d, logs.iter().map(|l| (l - log_z).exp()).collect())
}
