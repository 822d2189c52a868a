//! Small numerical kernels shared across modules.

/// Blocks at or below this length are summed sequentially.
const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation with a fixed split order.
///
/// The result depends only on the slice contents and order, never on
/// how the terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Element-wise pairwise sum of equally sized rows.
pub fn pairwise_sum_rows(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let mut column = Vec::with_capacity(rows.len());
    (0..width)
        .map(|j| {
            column.clear();
            column.extend(rows.iter().map(|r| r[j]));
            pairwise_sum(&column)
        })
        .collect()
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let shifted: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Mixed absolute/relative error: `|a - b| / max(1, |a|)` taken over entries.
pub fn scaled_error(reference: &[f64], other: &[f64]) -> f64 {
    let scale = max_abs(reference).max(1.0);
    reference
        .iter()
        .zip(other)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

/// Fixed scientific notation with 17 significant digits, enough to round-trip
/// any `f64` and independent of the value's magnitude.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}
