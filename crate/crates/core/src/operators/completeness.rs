//! Numerical check that matching scores pin down the density on a grid.
//!
//! Let `r = log p − log q`. If every forward difference of `r` along every
//! axis is at most `eps` in magnitude, then `r` varies by at most
//! `eps · L` between any node and a fixed anchor, where `L` is the summed
//! axis width. Both densities integrate to one under the same positive
//! weights, so the constant part of `r` is squeezed into the same interval,
//! and `|r| ≤ 2·eps·L` everywhere. That gives the pointwise bound
//! `|p − q| ≤ max(p, q) · (exp(2·eps·L) − 1)`.

use crate::error::Result;
use crate::scalespace::GridDensity;

/// Relative slack added to the bound for rounding in the renormalization.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CompletenessCheck {
    /// Scores differ by more than `eps` somewhere; nothing to check.
    Inapplicable { score_gap: f64 },
    Holds {
        score_gap: f64,
        max_abs_diff: f64,
        bound: f64,
    },
    Fails {
        score_gap: f64,
        max_abs_diff: f64,
        bound: f64,
    },
}

impl CompletenessCheck {
    /// True unless the precondition held and the conclusion did not.
    pub fn implication_holds(&self) -> bool {
        !matches!(self, CompletenessCheck::Fails { .. })
    }

    pub fn is_applicable(&self) -> bool {
        !matches!(self, CompletenessCheck::Inapplicable { .. })
    }

    pub fn score_gap(&self) -> f64 {
        match *self {
            CompletenessCheck::Inapplicable { score_gap }
            | CompletenessCheck::Holds { score_gap, .. }
            | CompletenessCheck::Fails { score_gap, .. } => score_gap,
        }
    }
}

/// Largest forward difference of `log p − log q` over all grid edges.
fn forward_score_gap(p: &GridDensity, q: &GridDensity) -> f64 {
    let g = p.geometry();
    let r: Vec<f64> = p
        .values()
        .iter()
        .zip(q.values())
        .map(|(a, b)| a.ln() - b.ln())
        .collect();
    let mut gap = 0.0f64;
    for (a, axis) in g.axes().iter().enumerate() {
        let stride = g.stride(a);
        let h = axis.spacing();
        for idx in 0..r.len() {
            if g.multi_index(idx)[a] + 1 < axis.n {
                gap = gap.max(((r[idx + stride] - r[idx]) / h).abs());
            }
        }
    }
    gap
}

pub fn gradient_completeness_check(p: &GridDensity, q: &GridDensity, eps: f64) -> Result<CompletenessCheck> {
    p.same_geometry(q)?;
    p.require_positive()?;
    q.require_positive()?;
    let score_gap = forward_score_gap(p, q);
    if score_gap > eps {
        return Ok(CompletenessCheck::Inapplicable { score_gap });
    }
    let growth = (2.0 * eps * p.geometry().path_length()).exp_m1();
    let peak = p.peak().max(q.peak());
    let mut max_abs_diff = 0.0f64;
    let mut ok = true;
    for (&a, &b) in p.values().iter().zip(q.values()) {
        let diff = (a - b).abs();
        max_abs_diff = max_abs_diff.max(diff);
        if diff > a.max(b) * growth + ROUNDING_SLACK * peak {
            ok = false;
        }
    }
    let bound = peak * growth + ROUNDING_SLACK * peak;
    Ok(if ok {
        CompletenessCheck::Holds {
            score_gap,
            max_abs_diff,
            bound,
        }
    } else {
        CompletenessCheck::Fails {
            score_gap,
            max_abs_diff,
            bound,
        }
    })
}
