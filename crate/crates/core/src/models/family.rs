use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, pairwise_sum};
use crate::operators::{DiscreteJoint, SingletonConditionals, StateSpace};
use crate::scalespace::{GridDensity, GridGeometry};

/// Smoothing offset in the generalized-Gaussian exponent `((x−μ)² + ε²)^{α/2}`.
pub const GEN_GAUSS_EPS: f64 = 1e-3;

/// Smallest probability a singleton conditional may report.
pub const CONDITIONAL_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Gaussian,
    Ising,
    Potts,
    GenGauss1D,
}

impl ModelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelKind::Gaussian => "gaussian",
            ModelKind::Ising => "ising",
            ModelKind::Potts => "potts",
            ModelKind::GenGauss1D => "gengauss1d",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "gaussian" => Ok(ModelKind::Gaussian),
            "ising" => Ok(ModelKind::Ising),
            "potts" => Ok(ModelKind::Potts),
            "gengauss1d" => Ok(ModelKind::GenGauss1D),
            other => Err(Error::Parse(format!("unknown model kind `{other}`"))),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ModelKind::Ising | ModelKind::Potts)
    }
}

/// Interaction graph of a lattice model; edges are stored with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    dim: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(dim: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let (i, j) = (a.min(b), a.max(b));
            if j >= dim {
                return Err(Error::IndexOutOfRange { index: j, dim });
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop on coordinate {i}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidArgument(format!("edge {i}-{j} listed twice")));
            }
            out.push((i, j));
        }
        Ok(Self { dim, edges: out })
    }

    pub fn chain(dim: usize) -> Self {
        Self {
            dim,
            edges: (1..dim).map(|i| (i - 1, i)).collect(),
        }
    }

    pub fn cycle(dim: usize) -> Self {
        let mut g = Self::chain(dim);
        if dim >= 3 {
            g.edges.push((0, dim - 1));
        }
        g
    }

    pub fn complete(dim: usize) -> Self {
        Self {
            dim,
            edges: (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j))).collect(),
        }
    }

    /// `rows × cols` lattice, node `r·cols + c`, right and down neighbors.
    pub fn lattice(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let k = r * cols + c;
                if c + 1 < cols {
                    edges.push((k, k + 1));
                }
                if r + 1 < rows {
                    edges.push((k, k + cols));
                }
            }
        }
        Self {
            dim: rows * cols,
            edges,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

#[derive(Clone, Debug)]
struct GaussianCache {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    precision: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

#[derive(Clone, Debug)]
enum Structure {
    Gaussian { dim: usize, cache: Box<GaussianCache> },
    GenGauss1D { alpha: f64 },
    Ising { graph: Graph },
    Potts { graph: Graph, m: usize },
}

/// An unnormalized log-density with its parameter vector.
///
/// Parameter layouts:
/// - Gaussian: `μ` (d entries), then the lower triangle of `Σ` row by row.
/// - Ising: fields `h_i`, then one coupling per graph edge, with energy
///   `Σ h_i s_i + Σ θ_ij s_i s_j` on spins `s = 2x − 1`.
/// - Potts: fields `h_{i,k}` for `k = 1..m−1` (symbol 0 is the reference),
///   grouped by coordinate, then one coupling per edge on `[x_i = x_j]`.
/// - GenGauss1D: `(μ, β)` with `log q̃ = −β ((x−μ)² + ε²)^{α/2}` and `α`
///   fixed by the structure.
#[derive(Clone, Debug)]
pub struct Model {
    structure: Structure,
    params: Vec<f64>,
    log_offset: f64,
    quadrature: Option<GridGeometry>,
}

/// Normalized version of a model (or any distribution) on a finite
/// representation.
#[derive(Clone, Debug, PartialEq)]
pub enum NormalizedDensity {
    Discrete(DiscreteJoint),
    Grid(GridDensity),
}

fn gaussian_cache(dim: usize, params: &[f64]) -> Result<GaussianCache> {
    let mean = DVector::from_column_slice(&params[..dim]);
    let mut cov = DMatrix::zeros(dim, dim);
    let mut k = dim;
    for i in 0..dim {
        for j in 0..=i {
            cov[(i, j)] = params[k];
            cov[(j, i)] = params[k];
            k += 1;
        }
    }
    let chol = Cholesky::new(cov.clone()).ok_or(Error::NotPositiveDefinite)?;
    let precision = chol.inverse();
    Ok(GaussianCache {
        mean,
        cov,
        precision,
        chol,
    })
}

impl Model {
    fn build(structure: Structure, params: Vec<f64>) -> Result<Self> {
        let mut model = Self {
            structure,
            params: Vec::new(),
            log_offset: 0.0,
            quadrature: None,
        };
        model.set_params(params)?;
        Ok(model)
    }

    pub fn gaussian(mean: &[f64], cov_lower: &[f64]) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("Gaussian needs dim >= 1".into()));
        }
        let params = mean.iter().chain(cov_lower).copied().collect();
        Self::build(
            Structure::Gaussian {
                dim,
                cache: Box::new(gaussian_cache(1, &[0.0, 1.0])?),
            },
            params,
        )
    }

    /// Standard normal in `dim` dimensions.
    pub fn standard_gaussian(dim: usize) -> Result<Self> {
        let mut cov = Vec::new();
        for i in 0..dim {
            for j in 0..=i {
                cov.push(if i == j { 1.0 } else { 0.0 });
            }
        }
        Self::gaussian(&vec![0.0; dim], &cov)
    }

    pub fn gen_gauss_1d(alpha: f64, mu: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParam(format!("alpha must be positive, got {alpha}")));
        }
        Self::build(Structure::GenGauss1D { alpha }, vec![mu, beta])
    }

    pub fn ising(graph: Graph, params: Vec<f64>) -> Result<Self> {
        if graph.dim() == 0 {
            return Err(Error::InvalidArgument("Ising model needs dim >= 1".into()));
        }
        Self::build(Structure::Ising { graph }, params)
    }

    /// Ising chain with every coupling `coupling` and every field `field`.
    pub fn ising_chain(dim: usize, coupling: f64, field: f64) -> Result<Self> {
        let mut params = vec![field; dim];
        params.extend(std::iter::repeat_n(coupling, dim.saturating_sub(1)));
        Self::ising(Graph::chain(dim), params)
    }

    pub fn potts(graph: Graph, m: usize, params: Vec<f64>) -> Result<Self> {
        if m < 2 || graph.dim() == 0 {
            return Err(Error::InvalidArgument(format!(
                "Potts model needs m >= 2 and dim >= 1 (got m={m}, dim={})",
                graph.dim()
            )));
        }
        Self::build(Structure::Potts { graph, m }, params)
    }

    pub fn kind(&self) -> ModelKind {
        match self.structure {
            Structure::Gaussian { .. } => ModelKind::Gaussian,
            Structure::GenGauss1D { .. } => ModelKind::GenGauss1D,
            Structure::Ising { .. } => ModelKind::Ising,
            Structure::Potts { .. } => ModelKind::Potts,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.structure {
            Structure::Gaussian { dim, .. } => *dim,
            Structure::GenGauss1D { .. } => 1,
            Structure::Ising { graph } | Structure::Potts { graph, .. } => graph.dim(),
        }
    }

    pub fn alphabet_size(&self) -> Option<usize> {
        match &self.structure {
            Structure::Ising { .. } => Some(2),
            Structure::Potts { m, .. } => Some(*m),
            _ => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.kind().is_discrete()
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.structure {
            Structure::Ising { graph } | Structure::Potts { graph, .. } => Some(graph),
            _ => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.structure {
            Structure::GenGauss1D { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Short human-readable description used in error messages.
    pub fn describe(&self) -> String {
        match self.alphabet_size() {
            Some(m) => format!("{}(d={}, m={m})", self.kind().tag(), self.dim()),
            None => format!("{}(d={})", self.kind().tag(), self.dim()),
        }
    }

    pub fn n_params(&self) -> usize {
        let d = self.dim();
        match &self.structure {
            Structure::Gaussian { .. } => d + d * (d + 1) / 2,
            Structure::GenGauss1D { .. } => 2,
            Structure::Ising { graph } => d + graph.edges().len(),
            Structure::Potts { graph, m } => d * (m - 1) + graph.edges().len(),
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Names of the parameter slots, in layout order.
    pub fn param_names(&self) -> Vec<String> {
        let d = self.dim();
        match &self.structure {
            Structure::Gaussian { .. } => (0..d)
                .map(|i| format!("mu{i}"))
                .chain((0..d).flat_map(|i| (0..=i).map(move |j| format!("cov{i}{j}"))))
                .collect(),
            Structure::GenGauss1D { .. } => vec!["mu".into(), "beta".into()],
            Structure::Ising { graph } => (0..d)
                .map(|i| format!("h{i}"))
                .chain(graph.edges().iter().map(|(i, j)| format!("j{i}_{j}")))
                .collect(),
            Structure::Potts { graph, m } => (0..d)
                .flat_map(|i| (1..*m).map(move |k| format!("h{i}_{k}")))
                .chain(graph.edges().iter().map(|(i, j)| format!("j{i}_{j}")))
                .collect(),
        }
    }

    fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        let expected = self.n_params();
        if params.len() != expected {
            return Err(Error::ParamLength {
                layout: self.kind().tag().into(),
                expected,
                got: params.len(),
            });
        }
        if let Some(index) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFiniteParam { index });
        }
        match &mut self.structure {
            Structure::Gaussian { dim, cache } => **cache = gaussian_cache(*dim, &params)?,
            Structure::GenGauss1D { .. } if params[1] <= 0.0 => {
                return Err(Error::InvalidParam(format!(
                    "beta must be positive for a normalizable density, got {}",
                    params[1]
                )))
            }
            _ => {}
        }
        self.params = params;
        Ok(())
    }

    /// Same structure with a new parameter vector.
    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        let mut m = self.clone();
        m.set_params(params.to_vec())?;
        Ok(m)
    }

    /// Adds a constant to `log q̃`. No partition-free quantity may change.
    pub fn with_log_offset(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.log_offset = c;
        m
    }

    pub fn with_quadrature(&self, geometry: GridGeometry) -> Result<Self> {
        if self.is_discrete() || geometry.dim() != self.dim() {
            return Err(Error::GeometryMismatch);
        }
        let mut m = self.clone();
        m.quadrature = Some(geometry);
        Ok(m)
    }

    pub fn quadrature(&self) -> Option<&GridGeometry> {
        self.quadrature.as_ref()
    }

    /// Parameters every fit starts from by default: zeros for the lattice
    /// models, the standard normal for the Gaussian, `(0, 1)` for GenGauss1D.
    pub fn default_init(&self) -> Vec<f64> {
        match &self.structure {
            Structure::Gaussian { dim, .. } => {
                let mut v = vec![0.0; *dim];
                for i in 0..*dim {
                    for j in 0..=i {
                        v.push(if i == j { 1.0 } else { 0.0 });
                    }
                }
                v
            }
            Structure::GenGauss1D { .. } => vec![0.0, 1.0],
            _ => vec![0.0; self.n_params()],
        }
    }

    pub(crate) fn gaussian_parts(&self) -> Option<(&DVector<f64>, &DMatrix<f64>, &DMatrix<f64>)> {
        match &self.structure {
            Structure::Gaussian { cache, .. } => Some((&cache.mean, &cache.cov, &cache.precision)),
            _ => None,
        }
    }

    pub(crate) fn gaussian_log_det(&self) -> Option<f64> {
        match &self.structure {
            Structure::Gaussian { cache, .. } => {
                Some(2.0 * cache.chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
            }
            _ => None,
        }
    }

    pub(crate) fn gaussian_cholesky(&self) -> Option<DMatrix<f64>> {
        match &self.structure {
            Structure::Gaussian { cache, .. } => Some(cache.chol.l()),
            _ => None,
        }
    }

    fn require_continuous(&self, x: &[f64], op: &'static str) -> Result<()> {
        if self.is_discrete() {
            return Err(Error::KindMismatch {
                op,
                expected: "continuous model",
                got: self.describe(),
            });
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn require_discrete(&self, op: &'static str) -> Result<usize> {
        self.alphabet_size().ok_or_else(|| Error::KindMismatch {
            op,
            expected: "discrete model",
            got: self.describe(),
        })
    }

    fn check_symbols(&self, x: &[usize]) -> Result<()> {
        let m = self.alphabet_size().unwrap_or(0);
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match x.iter().position(|&s| s >= m) {
            Some(coordinate) => Err(Error::SymbolOutOfAlphabet {
                coordinate,
                symbol: x[coordinate],
                m,
            }),
            None => Ok(()),
        }
    }

    /// `log q̃_θ(x)` for a continuous model.
    pub fn log_unnorm(&self, x: &[f64]) -> Result<f64> {
        self.require_continuous(x, "log_unnorm")?;
        let core = match &self.structure {
            Structure::Gaussian { cache, .. } => {
                let r = DVector::from_column_slice(x) - &cache.mean;
                -0.5 * r.dot(&(&cache.precision * &r))
            }
            Structure::GenGauss1D { alpha } => {
                let (mu, beta) = (self.params[0], self.params[1]);
                let s = (x[0] - mu).powi(2) + GEN_GAUSS_EPS * GEN_GAUSS_EPS;
                -beta * s.powf(alpha / 2.0)
            }
            _ => unreachable!("discrete kinds rejected above"),
        };
        Ok(core + self.log_offset)
    }

    /// `∇_x log q̃_θ(x)`.
    pub fn grad_x_log(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_continuous(x, "grad_x_log")?;
        Ok(match &self.structure {
            Structure::Gaussian { cache, .. } => {
                let r = DVector::from_column_slice(x) - &cache.mean;
                (-(&cache.precision * r)).iter().copied().collect()
            }
            Structure::GenGauss1D { alpha } => {
                let (mu, beta) = (self.params[0], self.params[1]);
                let u = x[0] - mu;
                let s = u * u + GEN_GAUSS_EPS * GEN_GAUSS_EPS;
                vec![-beta * alpha * u * s.powf(alpha / 2.0 - 1.0)]
            }
            _ => unreachable!("discrete kinds rejected above"),
        })
    }

    /// `Δ_x log q̃_θ(x)`.
    pub fn laplacian_x_log(&self, x: &[f64]) -> Result<f64> {
        self.require_continuous(x, "laplacian_x_log")?;
        Ok(match &self.structure {
            Structure::Gaussian { cache, .. } => -cache.precision.trace(),
            Structure::GenGauss1D { alpha } => {
                let (mu, beta) = (self.params[0], self.params[1]);
                let u = x[0] - mu;
                let s = u * u + GEN_GAUSS_EPS * GEN_GAUSS_EPS;
                -beta * alpha * (s.powf(alpha / 2.0 - 1.0) + (alpha - 2.0) * u * u * s.powf(alpha / 2.0 - 2.0))
            }
            _ => unreachable!("discrete kinds rejected above"),
        })
    }

    /// Sufficient statistics `φ(x)`, so that `log q̃_θ(x) = θ·φ(x) + c`.
    pub fn features(&self, x: &[usize]) -> Result<Vec<f64>> {
        self.require_discrete("features")?;
        self.check_symbols(x)?;
        Ok(self.features_unchecked(x))
    }

    fn features_unchecked(&self, x: &[usize]) -> Vec<f64> {
        let mut phi = Vec::with_capacity(self.n_params());
        match &self.structure {
            Structure::Ising { graph } => {
                let spin = |s: usize| if s == 1 { 1.0 } else { -1.0 };
                phi.extend(x.iter().map(|&s| spin(s)));
                phi.extend(graph.edges().iter().map(|&(i, j)| spin(x[i]) * spin(x[j])));
            }
            Structure::Potts { graph, m } => {
                for &s in x {
                    phi.extend((1..*m).map(|k| if s == k { 1.0 } else { 0.0 }));
                }
                phi.extend(graph.edges().iter().map(|&(i, j)| if x[i] == x[j] { 1.0 } else { 0.0 }));
            }
            _ => unreachable!("continuous kinds rejected by callers"),
        }
        phi
    }

    fn energy_unchecked(&self, x: &[usize]) -> f64 {
        let phi = self.features_unchecked(x);
        self.params.iter().zip(&phi).map(|(t, f)| t * f).sum::<f64>() + self.log_offset
    }

    /// `log q̃_θ(x)` for a discrete model.
    pub fn log_unnorm_discrete(&self, x: &[usize]) -> Result<f64> {
        self.require_discrete("log_unnorm")?;
        self.check_symbols(x)?;
        Ok(self.energy_unchecked(x))
    }

    /// Unnormalized log values of coordinate `i` taking each symbol, with
    /// the other coordinates fixed at `x`.
    fn conditional_logits(&self, x: &[usize], i: usize) -> Result<Vec<f64>> {
        let m = self.require_discrete("singleton_conditional")?;
        self.check_symbols(x)?;
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim(),
            });
        }
        let mut y = x.to_vec();
        Ok((0..m)
            .map(|s| {
                y[i] = s;
                self.energy_unchecked(&y)
            })
            .collect())
    }

    /// `log q_θ(ξ | x^{\i})` for every symbol `ξ`.
    pub fn log_singleton_conditional(&self, x: &[usize], i: usize) -> Result<Vec<f64>> {
        let logits = self.conditional_logits(x, i)?;
        let z = log_sum_exp(&logits);
        Ok(logits.into_iter().map(|l| l - z).collect())
    }

    /// `q_θ(ξ | x^{\i})` for every symbol `ξ`, floored at
    /// [`CONDITIONAL_FLOOR`].
    pub fn singleton_conditional(&self, x: &[usize], i: usize) -> Result<Vec<f64>> {
        let logits = self.conditional_logits(x, i)?;
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let total = pairwise_sum(&w);
        Ok(w.into_iter().map(|v| (v / total).max(CONDITIONAL_FLOOR)).collect())
    }

    /// Brute-force normalization: full enumeration for discrete kinds,
    /// trapezoid quadrature on the declared box for continuous ones.
    pub fn exact_normalize(&self) -> Result<NormalizedDensity> {
        if self.is_discrete() {
            let space = StateSpace::new(self.require_discrete("exact_normalize")?, self.dim())?;
            let logs: Vec<f64> = space.states().map(|x| self.energy_unchecked(&x)).collect();
            let log_z = log_sum_exp(&logs);
            let probs = logs.iter().map(|l| (l - log_z).exp()).collect();
            return Ok(NormalizedDensity::Discrete(DiscreteJoint::from_weights(
                space.alphabet_size(),
                space.dim(),
                probs,
            )?));
        }
        let geometry = self.quadrature.clone().ok_or(Error::QuadratureBoxMissing)?;
        let d = geometry.dim();
        let logs = (0..geometry.len())
            .map(|i| self.log_unnorm(&geometry.coords(i)[..d]))
            .collect::<Result<Vec<f64>>>()?;
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let values = logs.iter().map(|l| (l - max).exp()).collect();
        Ok(NormalizedDensity::Grid(GridDensity::new(geometry, values)?))
    }

    /// Exact joint of a discrete model.
    pub fn joint(&self) -> Result<DiscreteJoint> {
        match self.exact_normalize()? {
            NormalizedDensity::Discrete(j) => Ok(j),
            NormalizedDensity::Grid(_) => Err(Error::KindMismatch {
                op: "joint",
                expected: "discrete model",
                got: self.describe(),
            }),
        }
    }
}

impl SingletonConditionals for Model {
    fn alphabet_size(&self) -> usize {
        Model::alphabet_size(self).unwrap_or(0)
    }

    fn dim(&self) -> usize {
        Model::dim(self)
    }

    fn conditional(&self, x: &[usize], i: usize) -> Result<Vec<f64>> {
        self.singleton_conditional(x, i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ising2(coupling: f64) -> Model {
        Model::ising(Graph::chain(2), vec![0.0, 0.0, coupling]).unwrap()
    }

    #[test]
    fn hand_evaluated_log_densities() {
        let g = Model::standard_gaussian(1).unwrap();
        assert_eq!(g.log_unnorm(&[0.0]).unwrap(), 0.0);
        assert_eq!(ising2(0.5).log_unnorm_discrete(&[1, 1]).unwrap(), 0.5);
        assert_eq!(ising2(0.5).log_unnorm_discrete(&[1, 0]).unwrap(), -0.5);
    }

    #[test]
    fn gaussian_derivatives_by_hand() {
        let g = Model::standard_gaussian(1).unwrap();
        assert_eq!(g.grad_x_log(&[2.0]).unwrap(), vec![-2.0]);
        assert_eq!(g.laplacian_x_log(&[2.0]).unwrap(), -1.0);
        let shifted = Model::gaussian(&[1.0], &[1.0]).unwrap();
        assert_eq!(shifted.grad_x_log(&[1.0]).unwrap(), vec![0.0]);
        let laplace = Model::gen_gauss_1d(1.0, 0.0, 1.0).unwrap();
        assert_eq!(laplace.grad_x_log(&[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            Model::gaussian(&[0.0, 0.0], &[1.0, 2.0, 1.0]),
            Err(Error::NotPositiveDefinite)
        ));
        assert!(matches!(
            Model::ising(Graph::chain(3), vec![0.0; 4]),
            Err(Error::ParamLength { expected: 5, .. })
        ));
        assert!(Model::gen_gauss_1d(1.5, 0.0, -1.0).is_err());
        assert!(matches!(
            ising2(0.0).with_params(&[0.0, f64::NAN, 0.0]),
            Err(Error::NonFiniteParam { index: 1 })
        ));
    }

    #[test]
    fn conditionals_by_hand() {
        let c = ising2(0.0).singleton_conditional(&[1, 1], 0).unwrap();
        assert_eq!(c, vec![0.5, 0.5]);
        let c = ising2(0.5).singleton_conditional(&[0, 1], 0).unwrap();
        assert!((c[1] - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert!((c[1] - 0.731059).abs() < 1e-6);
        let potts = Model::potts(Graph::chain(3), 3, vec![0.0; 8]).unwrap();
        for v in potts.singleton_conditional(&[2, 0, 1], 1).unwrap() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn wrong_kind_is_reported() {
        let g = Model::standard_gaussian(2).unwrap();
        assert!(matches!(
            g.singleton_conditional(&[0, 0], 0),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            ising2(0.5).grad_x_log(&[0.0, 0.0]),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            ising2(0.5).singleton_conditional(&[0, 0], 2),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            ising2(0.5).log_unnorm_discrete(&[0, 2]),
            Err(Error::SymbolOutOfAlphabet { .. })
        ));
        assert!(matches!(g.log_unnorm(&[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ising_enumeration_by_hand() {
        let uniform = ising2(0.0).joint().unwrap();
        assert!(uniform.probs().iter().all(|&p| (p - 0.25).abs() < 1e-15));
        let j = ising2(0.5).joint().unwrap();
        let z = 2.0 * 0.5f64.exp() + 2.0 * (-0.5f64).exp();
        assert!((j.prob(&[1, 1]).unwrap() - 0.5f64.exp() / z).abs() < 1e-15);
        assert!((j.prob(&[1, 1]).unwrap() - 0.365529).abs() < 1e-6);
        assert!((j.prob(&[0, 1]).unwrap() - (-0.5f64).exp() / z).abs() < 1e-15);
    }

    #[test]
    fn gaussian_quadrature_matches_pdf() {
        let g = Model::standard_gaussian(1)
            .unwrap()
            .with_quadrature(GridGeometry::line(-8.0, 8.0, 4096).unwrap())
            .unwrap();
        let NormalizedDensity::Grid(p) = g.exact_normalize().unwrap() else {
            panic!("expected a grid density")
        };
        let geo = p.geometry();
        let err = (0..geo.len())
            .map(|i| {
                let x = geo.coords(i)[0];
                (p.values()[i] - (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-6);
        assert!(matches!(
            Model::standard_gaussian(1).unwrap().exact_normalize(),
            Err(Error::QuadratureBoxMissing)
        ));
    }

    #[test]
    fn conditionals_agree_with_enumeration() {
        let potts = Model::potts(Graph::cycle(3), 3, vec![0.3, -0.2, 0.1, 0.4, -0.5, 0.0, 0.7, -0.3, 0.2]).unwrap();
        let joint = potts.joint().unwrap();
        assert!((joint.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for x in joint.space().states() {
            for i in 0..3 {
                let a = potts.singleton_conditional(&x, i).unwrap();
                let b = joint.conditional(&x, i).unwrap();
                for (u, v) in a.iter().zip(&b) {
                    assert!((u - v).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn extreme_couplings_hit_the_floor_not_zero() {
        let m = ising2(1000.0);
        let c = m.singleton_conditional(&[0, 1], 0).unwrap();
        assert_eq!(c[0], CONDITIONAL_FLOOR);
        assert!(c.iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn graphs() {
        assert_eq!(Graph::cycle(4).edges().len(), 4);
        assert_eq!(Graph::complete(4).edges().len(), 6);
        assert_eq!(Graph::lattice(2, 3).edges().len(), 7);
        assert!(Graph::new(3, vec![(0, 0)]).is_err());
        assert!(Graph::new(3, vec![(0, 1), (1, 0)]).is_err());
        assert_eq!(Graph::new(3, vec![(2, 1)]).unwrap().edges(), &[(1, 2)]);
    }

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn gaussian_derivatives_match_differences(
            mu in -2.0f64..2.0, a in 0.5f64..2.0, b in -0.4f64..0.4, c in 0.5f64..2.0,
            x0 in -3.0f64..3.0, x1 in -3.0f64..3.0,
        ) {
            let m = Model::gaussian(&[mu, -mu], &[a, b, c]).unwrap();
            let x = [x0, x1];
            let h = 1e-4;
            let g = m.grad_x_log(&x).unwrap();
            let mut lap = 0.0;
            for k in 0..2 {
                let along = |t: f64| { let mut y = x; y[k] = t; m.log_unnorm(&y).unwrap() };
                let fd = central(along, x[k], h);
                prop_assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1.0));
                let dk = |t: f64| { let mut y = x; y[k] = t; m.grad_x_log(&y).unwrap()[k] };
                lap += central(dk, x[k], h);
            }
            let exact = m.laplacian_x_log(&x).unwrap();
            prop_assert!((lap - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }

        #[test]
        fn gen_gauss_derivatives_match_differences(
            alpha in 0.8f64..3.0, mu in -1.0f64..1.0, beta in 0.2f64..2.0, x in -3.0f64..3.0,
        ) {
            prop_assume!((x - mu).abs() > 0.2);
            let m = Model::gen_gauss_1d(alpha, mu, beta).unwrap();
            let h = 1e-4;
            let g = m.grad_x_log(&[x]).unwrap()[0];
            let fd = central(|t| m.log_unnorm(&[t]).unwrap(), x, h);
            prop_assert!((fd - g).abs() <= 1e-6 * g.abs().max(1.0));
            let lap = central(|t| m.grad_x_log(&[t]).unwrap()[0], x, h);
            let exact = m.laplacian_x_log(&[x]).unwrap();
            prop_assert!((lap - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }

        #[test]
        fn offsets_leave_conditionals_alone(c in -5.0f64..5.0, j in -1.0f64..1.0, s in 0usize..4) {
            let m = ising2(j);
            let shifted = m.with_log_offset(c);
            let x = [s / 2, s % 2];
            for i in 0..2 {
                let a = m.singleton_conditional(&x, i).unwrap();
                let b = shifted.singleton_conditional(&x, i).unwrap();
                for (u, v) in a.iter().zip(&b) {
                    prop_assert!((u - v).abs() <= 1e-12);
                }
            }
        }
    }
}
