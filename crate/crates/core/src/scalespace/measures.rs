use super::grid::{GridDensity, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::operators::stencil;

/// `−∫ p log p` by the trapezoid rule.
pub fn entropy(p: &GridDensity) -> Result<f64> {
    p.require_positive()?;
    let g = p.geometry();
    let integrand: Vec<f64> = p.values().iter().map(|&v| -v * v.max(LOG_FLOOR).ln()).collect();
    Ok(g.integrate(&integrand))
}

/// `∫ p |∇ log p|²` over the support of `p`.
pub fn fisher_information(p: &GridDensity) -> Result<f64> {
    p.require_positive()?;
    let g = p.geometry();
    let score = stencil::gradient(g, &p.log_values());
    let weights = g.weights();
    let mask = p.support_mask();
    let terms: Vec<f64> = (0..g.len())
        .filter(|&i| mask[i])
        .map(|i| weights[i] * p.values()[i] * score.iter().map(|s| s[i] * s[i]).sum::<f64>())
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `∫ p log(p/q)` by the trapezoid rule, with logs taken of floored values.
pub fn kl_divergence(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.same_geometry(q)?;
    let g = p.geometry();
    let weights = g.weights();
    let mut terms = Vec::with_capacity(g.len());
    for (i, (&a, &b)) in p.values().iter().zip(q.values()).enumerate() {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Err(Error::NotAbsolutelyContinuous { index: i });
        }
        terms.push(weights[i] * a * (a.max(LOG_FLOOR).ln() - b.max(LOG_FLOOR).ln()));
    }
    Ok(pairwise_sum(&terms))
}

/// `∫ p |∇ log p − ∇ log q|²` over the support of `p`.
pub fn fisher_divergence(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.same_geometry(q)?;
    let g = p.geometry();
    let mask = p.support_mask();
    if let Some(index) = (0..g.len()).find(|&i| mask[i] && q.values()[i] <= 0.0) {
        return Err(Error::NonPositiveDensity {
            index,
            value: q.values()[index],
        });
    }
    let sp = stencil::gradient(g, &p.log_values());
    let sq = stencil::gradient(g, &q.log_values());
    let weights = g.weights();
    let terms: Vec<f64> = (0..g.len())
        .filter(|&i| mask[i])
        .map(|i| {
            let gap: f64 = sp.iter().zip(&sq).map(|(a, b)| (a[i] - b[i]).powi(2)).sum();
            weights[i] * p.values()[i] * gap
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Residual of `Δf/f = Δ log f + |∇ log f|²` on interior nodes, each node
/// weighted by `f / max f`.
///
/// The weight keeps the check on the part of the grid that carries mass: in
/// far tails the stencil error of `Δf/f` grows like a power of `|x|` even
/// though it is multiplied by a vanishing density everywhere it is used.
pub fn grid_identity_residual(f: &GridDensity) -> Result<f64> {
    f.require_positive()?;
    let g = f.geometry();
    let v = f.values();
    let log_f = f.log_values();
    let lap_f = stencil::laplacian(g, v);
    let lap_log = stencil::laplacian(g, &log_f);
    let grad_log = stencil::gradient(g, &log_f);
    let peak = f.peak();
    Ok((0..g.len())
        .filter(|&i| !g.is_boundary(i))
        .map(|i| {
            let sq: f64 = grad_log.iter().map(|c| c[i] * c[i]).sum();
            (v[i] / peak) * (lap_f[i] / v[i] - lap_log[i] - sq).abs()
        })
        .fold(0.0, f64::max))
}
