//! Finite-difference stencils on [`GridGeometry`] lattices.
//!
//! First derivatives use second-order central differences in the interior
//! and first-order one-sided differences on the boundary layer. Second
//! derivatives use the three-point stencil, with the shifted one-sided
//! three-point stencil on the boundary layer.

use crate::scalespace::GridGeometry;

/// `∂f/∂x_axis` at every node.
pub fn partial(geometry: &GridGeometry, values: &[f64], axis: usize) -> Vec<f64> {
    let n = geometry.axes()[axis].n;
    let h = geometry.axes()[axis].spacing();
    let stride = geometry.stride(axis);
    (0..values.len())
        .map(|idx| {
            let k = geometry.multi_index(idx)[axis];
            if k == 0 {
                (values[idx + stride] - values[idx]) / h
            } else if k == n - 1 {
                (values[idx] - values[idx - stride]) / h
            } else {
                (values[idx + stride] - values[idx - stride]) / (2.0 * h)
            }
        })
        .collect()
}

/// `∂²f/∂x_axis²` at every node.
pub fn second_partial(geometry: &GridGeometry, values: &[f64], axis: usize) -> Vec<f64> {
    let n = geometry.axes()[axis].n;
    let h2 = geometry.axes()[axis].spacing().powi(2);
    let stride = geometry.stride(axis);
    (0..values.len())
        .map(|idx| {
            let k = geometry.multi_index(idx)[axis];
            let c = if k == 0 {
                idx + stride
            } else if k == n - 1 {
                idx - stride
            } else {
                idx
            };
            (values[c + stride] - 2.0 * values[c] + values[c - stride]) / h2
        })
        .collect()
}

pub fn gradient(geometry: &GridGeometry, values: &[f64]) -> Vec<Vec<f64>> {
    (0..geometry.dim()).map(|a| partial(geometry, values, a)).collect()
}

/// `Σ_a ∂g_a/∂x_a` with the same first-derivative stencil as [`gradient`].
pub fn divergence(geometry: &GridGeometry, components: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; geometry.len()];
    for (a, g) in components.iter().enumerate() {
        for (o, d) in out.iter_mut().zip(partial(geometry, g, a)) {
            *o += d;
        }
    }
    out
}

pub fn laplacian(geometry: &GridGeometry, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; geometry.len()];
    for a in 0..geometry.dim() {
        for (o, d) in out.iter_mut().zip(second_partial(geometry, values, a)) {
            *o += d;
        }
    }
    out
}
