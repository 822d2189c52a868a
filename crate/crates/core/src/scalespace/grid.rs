use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Densities whose values fall below this fraction of the peak are treated
/// as outside the support by every score-based quadrature.
pub const SUPPORT_FRACTION: f64 = 1e-12;

/// Floor applied before taking logarithms of density values.
pub const LOG_FLOOR: f64 = 1e-300;

/// One regular axis `lo, lo + h, ..., hi` with `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("bad axis bounds [{lo}, {hi}]")));
        }
        if n < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: n });
        }
        Ok(Self { lo, hi, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn coord(&self, k: usize) -> f64 {
        // Anchored at both ends so the last node is exactly `hi`.
        let s = k as f64 / (self.n - 1) as f64;
        self.lo * (1.0 - s) + self.hi * s
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n];
        w[0] = 0.5 * h;
        w[self.n - 1] = 0.5 * h;
        w
    }
}

/// Tensor-product lattice in one or two dimensions, stored row-major with
/// axis 0 varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridGeometry {
    axes: Vec<Axis>,
}

impl GridGeometry {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Unsupported(format!(
                "grids of dimension {} (only 1 and 2 are supported)",
                axes.len()
            )));
        }
        Ok(Self { axes })
    }

    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![Axis::new(lo, hi, n)?])
    }

    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let a = Axis::new(lo, hi, n)?;
        Self::new(vec![a, a])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat-index step when moving one node along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.n).product()
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        match self.axes.len() {
            1 => [idx, 0],
            _ => [idx / self.axes[1].n, idx % self.axes[1].n],
        }
    }

    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let k = self.multi_index(idx);
        let mut c = [0.0; 2];
        for (a, axis) in self.axes.iter().enumerate() {
            c[a] = axis.coord(k[a]);
        }
        c
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let k = self.multi_index(idx);
        self.axes
            .iter()
            .enumerate()
            .any(|(a, axis)| k[a] == 0 || k[a] == axis.n - 1)
    }

    /// Product trapezoid weights, one per node.
    pub fn weights(&self) -> Vec<f64> {
        let w0 = self.axes[0].trapezoid_weights();
        match self.axes.len() {
            1 => w0,
            _ => {
                let w1 = self.axes[1].trapezoid_weights();
                w0.iter().flat_map(|a| w1.iter().map(move |b| a * b)).collect()
            }
        }
    }

    /// Trapezoid quadrature of `values` (fixed pairwise order).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let terms: Vec<f64> = self.weights().iter().zip(values).map(|(w, v)| w * v).collect();
        pairwise_sum(&terms)
    }

    /// Sum of the axis widths; bounds the length of an axis-aligned path
    /// between any two nodes.
    pub fn path_length(&self) -> f64 {
        self.axes.iter().map(Axis::width).sum()
    }

    pub(crate) fn check_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} nodes, got {} values",
                self.len(),
                values.len()
            )));
        }
        Ok(())
    }
}

/// Normalized density sampled on a regular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl GridDensity {
    /// Renormalizes `values` so their trapezoid integral is one.
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        geometry.check_values(&values)?;
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::NonPositiveDensity { index, value });
        }
        let mass = geometry.integrate(&values);
        if mass <= 0.0 {
            return Err(Error::InvalidArgument("density has zero mass".into()));
        }
        let values = values.into_iter().map(|v| v / mass).collect();
        Ok(Self { geometry, values })
    }

    pub fn from_fn(geometry: GridGeometry, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let d = geometry.dim();
        let values = (0..geometry.len()).map(|i| f(&geometry.coords(i)[..d])).collect();
        Self::new(geometry, values)
    }

    /// Normal density `N(mean, var)` on a 1-D grid.
    pub fn gaussian_1d(geometry: GridGeometry, mean: f64, var: f64) -> Result<Self> {
        Self::mixture_1d(geometry, &[(1.0, mean, var)])
    }

    /// Finite mixture of normals given as `(weight, mean, variance)` triples.
    pub fn mixture_1d(geometry: GridGeometry, components: &[(f64, f64, f64)]) -> Result<Self> {
        if geometry.dim() != 1 {
            return Err(Error::GeometryMismatch);
        }
        if components.is_empty() || components.iter().any(|c| !(c.0 > 0.0 && c.2 > 0.0)) {
            return Err(Error::InvalidArgument(
                "mixture components need positive weights and variances".into(),
            ));
        }
        Self::from_fn(geometry, |x| {
            components
                .iter()
                .map(|&(w, mu, var)| {
                    w * (-(x[0] - mu).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
                })
                .sum()
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest boundary value relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.peak();
        let edge = (0..self.values.len())
            .filter(|&i| self.geometry.is_boundary(i))
            .map(|i| self.values[i])
            .fold(0.0, f64::max);
        edge / peak
    }

    /// Checks that the density has decayed to `SUPPORT_FRACTION` of its peak
    /// on the box boundary.
    pub fn check_contained(&self) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio >= SUPPORT_FRACTION {
            return Err(Error::NotContained { ratio });
        }
        Ok(())
    }

    /// Node mask for score-based quadratures.
    pub fn support_mask(&self) -> Vec<bool> {
        let cut = SUPPORT_FRACTION * self.peak();
        self.values.iter().map(|&v| v > cut).collect()
    }

    pub fn log_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.max(LOG_FLOOR).ln()).collect()
    }

    pub(crate) fn require_positive(&self) -> Result<()> {
        match self.values.iter().position(|&v| v <= 0.0) {
            Some(index) => Err(Error::NonPositiveDensity {
                index,
                value: self.values[index],
            }),
            None => Ok(()),
        }
    }

    pub(crate) fn same_geometry(&self, other: &Self) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let g = GridGeometry::line(0.0, 2.0, 11).unwrap();
        let v: Vec<f64> = (0..11).map(|i| g.coords(i)[0]).collect();
        assert!((g.integrate(&v) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_grid_is_normalized_and_contained() {
        let g = GridGeometry::line(-8.0, 8.0, 4096).unwrap();
        let p = GridDensity::gaussian_1d(g.clone(), 0.0, 1.0).unwrap();
        assert!((g.integrate(p.values()) - 1.0).abs() < 1e-12);
        p.check_contained().unwrap();
        let narrow = GridDensity::gaussian_1d(GridGeometry::line(-3.0, 3.0, 512).unwrap(), 0.0, 1.0).unwrap();
        assert!(matches!(narrow.check_contained(), Err(Error::NotContained { .. })));
    }

    #[test]
    fn two_d_indexing_round_trips() {
        let g = GridGeometry::new(vec![Axis::new(0.0, 1.0, 4).unwrap(), Axis::new(0.0, 2.0, 5).unwrap()]).unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g.stride(0), 5);
        assert_eq!(g.stride(1), 1);
        assert_eq!(g.multi_index(7), [1, 2]);
        assert!(g.is_boundary(0) && g.is_boundary(19) && !g.is_boundary(6));
        let ones = vec![1.0; 20];
        assert!((g.integrate(&ones) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_negative_values() {
        let g = GridGeometry::line(0.0, 1.0, 3).unwrap();
        assert!(GridDensity::new(g, vec![1.0, -1.0, 1.0]).is_err());
    }
}
