use super::grid::GridDensity;
use crate::error::{Error, Result};
use crate::operators::stencil;

/// The kernel is truncated at this many standard deviations.
pub const KERNEL_HALF_WIDTH: f64 = 8.0;

/// Sampled normal kernel `exp(−(jh)²/2t)`, `|j| ≤ J`, normalized to unit sum.
fn kernel(t: f64, h: f64) -> Vec<f64> {
    let half = (KERNEL_HALF_WIDTH * t.sqrt() / h).ceil() as usize;
    let raw: Vec<f64> = (0..=2 * half)
        .map(|k| {
            let x = (k as f64 - half as f64) * h;
            (-x * x / (2.0 * t)).exp()
        })
        .collect();
    let total: f64 = crate::numeric::pairwise_sum(&raw);
    raw.into_iter().map(|v| v / total).collect()
}

/// Zero-padded convolution of every line along `axis` with a centered kernel.
fn convolve_axis(values: &[f64], geometry: &super::GridGeometry, axis: usize, kern: &[f64]) -> Vec<f64> {
    let n = geometry.axes()[axis].n as isize;
    let stride = geometry.stride(axis);
    let half = (kern.len() / 2) as isize;
    let mut out = vec![0.0; values.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let k = geometry.multi_index(idx)[axis] as isize;
        let base = idx - k as usize * stride;
        let lo = (k - half).max(0);
        let hi = (k + half).min(n - 1);
        let mut acc = 0.0;
        for s in lo..=hi {
            acc += kern[(k - s + half) as usize] * values[base + s as usize * stride];
        }
        *o = acc;
    }
    out
}

/// `p̃_t`: separable convolution with the sampled heat kernel, renormalized.
///
/// The input must already have decayed at the box boundary, and the kernel
/// half-width may not exceed any axis width.
pub fn smooth(p: &GridDensity, t: f64) -> Result<GridDensity> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "smoothing variance must be >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(p.clone());
    }
    let geometry = p.geometry();
    let half_width = KERNEL_HALF_WIDTH * t.sqrt();
    for axis in geometry.axes() {
        if half_width > axis.width() {
            return Err(Error::KernelTooWide {
                half_width,
                box_width: axis.width(),
            });
        }
    }
    p.check_contained()?;
    let mut values = p.values().to_vec();
    for (a, axis) in geometry.axes().iter().enumerate() {
        values = convolve_axis(&values, geometry, a, &kernel(t, axis.spacing()));
    }
    GridDensity::new(geometry.clone(), values)
}

/// Interior max-norm of `(p̃_{t+dt} − p̃_{t−dt}) / 2dt − ½ Δ_h p̃_t`.
pub fn heat_pde_residual(p: &GridDensity, t: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0 && t > dt) {
        return Err(Error::InvalidArgument(format!(
            "heat residual needs t > dt > 0 (got t={t}, dt={dt})"
        )));
    }
    let before = smooth(p, t - dt)?;
    let at = smooth(p, t)?;
    let after = smooth(p, t + dt)?;
    let geometry = p.geometry();
    let lap = stencil::laplacian(geometry, at.values());
    Ok((0..geometry.len())
        .filter(|&i| !geometry.is_boundary(i))
        .map(|i| ((after.values()[i] - before.values()[i]) / (2.0 * dt) - 0.5 * lap[i]).abs())
        .fold(0.0, f64::max))
}
