//! Linear operators on densities: the gradient and the marginalization
//! operator, their adjoints, and the generalized Fisher divergence
//! `∫ p |Lp/p − Lq/q|²` built from them.
//!
//! Operators act on [`ScalarField`]s over a [`Domain`], which is either a
//! regular grid (trapezoid measure) or an enumerable discrete state space
//! (counting measure). Both shipped operators map scalar fields to
//! `d`-component vector fields.

mod brook;
mod completeness;
mod discrete;
pub mod stencil;

pub use brook::{brook_ratio, brook_ratio_ordered, log_brook_ratio, reconstruct_joint};
pub use completeness::{gradient_completeness_check, CompletenessCheck};
pub use discrete::{DiscreteJoint, SingletonConditionals, StateSpace, ENUMERATION_LIMIT};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::scalespace::{GridDensity, GridGeometry};

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Grid(GridGeometry),
    Discrete(StateSpace),
}

impl Domain {
    pub fn len(&self) -> usize {
        match self {
            Domain::Grid(g) => g.len(),
            Domain::Discrete(s) => s.size(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Grid(g) => g.dim(),
            Domain::Discrete(s) => s.dim(),
        }
    }

    fn repr(&self) -> &'static str {
        match self {
            Domain::Grid(_) => "grid",
            Domain::Discrete(_) => "discrete",
        }
    }

    /// Quadrature weight of every node: trapezoid on grids, one on
    /// discrete spaces.
    pub fn measure(&self) -> Vec<f64> {
        match self {
            Domain::Grid(g) => g.weights(),
            Domain::Discrete(s) => vec![1.0; s.size()],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub domain: Domain,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::ShapeMismatch(format!(
                "domain has {} nodes, got {} values",
                domain.len(),
                values.len()
            )));
        }
        Ok(Self { domain, values })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub domain: Domain,
    pub components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(domain: Domain, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.iter().any(|c| c.len() != domain.len()) {
            return Err(Error::ShapeMismatch(
                "vector component length differs from the domain size".into(),
            ));
        }
        Ok(Self { domain, components })
    }
}

impl From<&GridDensity> for ScalarField {
    fn from(p: &GridDensity) -> Self {
        Self {
            domain: Domain::Grid(p.geometry().clone()),
            values: p.values().to_vec(),
        }
    }
}

impl From<&DiscreteJoint> for ScalarField {
    fn from(p: &DiscreteJoint) -> Self {
        Self {
            domain: Domain::Discrete(*p.space()),
            values: p.probs().to_vec(),
        }
    }
}

/// `⟨f, g⟩` under the domain measure.
pub fn inner(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    if f.domain != g.domain {
        return Err(Error::ShapeMismatch("fields live on different domains".into()));
    }
    let w = f.domain.measure();
    let terms: Vec<f64> = (0..w.len()).map(|k| w[k] * f.values[k] * g.values[k]).collect();
    Ok(pairwise_sum(&terms))
}

/// `⟨F, G⟩ = ∫ F·G` under the domain measure.
pub fn inner_vector(f: &VectorField, g: &VectorField) -> Result<f64> {
    if f.domain != g.domain || f.components.len() != g.components.len() {
        return Err(Error::ShapeMismatch("vector fields do not conform".into()));
    }
    let w = f.domain.measure();
    let terms: Vec<f64> = (0..w.len())
        .map(|k| {
            w[k] * f
                .components
                .iter()
                .zip(&g.components)
                .map(|(a, b)| a[k] * b[k])
                .sum::<f64>()
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// The two operators with proofs of completeness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearOperatorKind {
    /// `∇`, discretized by [`stencil::gradient`]; grids only. Adjoint `−∇ᵀ`.
    Gradient,
    /// `M f = (M_1 f, …, M_d f)` with `M_i f(x) = Σ_{ξ} f(ξ, x^{\i})`
    /// (trapezoid integral along axis `i` on grids). Adjoint `Σ_i M_i`.
    Marginalization,
}

impl LinearOperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            LinearOperatorKind::Gradient => "gradient",
            LinearOperatorKind::Marginalization => "marginalization",
        }
    }

    /// Completeness attestation: `Lp/p = Lq/q ⇒ p = q`. Any operator added
    /// here must state this explicitly; it is never inferred.
    pub fn is_complete(&self) -> bool {
        match self {
            LinearOperatorKind::Gradient | LinearOperatorKind::Marginalization => true,
        }
    }

    pub fn apply(&self, f: &ScalarField) -> Result<VectorField> {
        let components = match (self, &f.domain) {
            (LinearOperatorKind::Gradient, Domain::Grid(g)) => stencil::gradient(g, &f.values),
            (LinearOperatorKind::Gradient, d) => {
                return Err(Error::OperatorMismatch {
                    op: self.name(),
                    repr: d.repr(),
                })
            }
            (LinearOperatorKind::Marginalization, d) => (0..d.dim()).map(|i| marginalize(d, &f.values, i)).collect(),
        };
        VectorField::new(f.domain.clone(), components)
    }

    pub fn adjoint(&self, g: &VectorField) -> Result<ScalarField> {
        if g.components.len() != g.domain.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} components, got {}",
                g.domain.dim(),
                g.components.len()
            )));
        }
        let values = match (self, &g.domain) {
            (LinearOperatorKind::Gradient, Domain::Grid(geo)) => stencil::divergence(geo, &g.components)
                .into_iter()
                .map(|v| -v)
                .collect(),
            (LinearOperatorKind::Gradient, d) => {
                return Err(Error::OperatorMismatch {
                    op: self.name(),
                    repr: d.repr(),
                })
            }
            (LinearOperatorKind::Marginalization, d) => {
                let mut out = vec![0.0; d.len()];
                for (i, gi) in g.components.iter().enumerate() {
                    for (o, v) in out.iter_mut().zip(marginalize(d, gi, i)) {
                        *o += v;
                    }
                }
                out
            }
        };
        ScalarField::new(g.domain.clone(), values)
    }
}

/// `M_i f`: sum (or trapezoid integral) of `f` along coordinate `i`,
/// broadcast back over that coordinate.
fn marginalize(domain: &Domain, f: &[f64], i: usize) -> Vec<f64> {
    let (n, stride, weights) = match domain {
        Domain::Discrete(s) => (s.alphabet_size(), s.stride(i), vec![1.0; s.alphabet_size()]),
        Domain::Grid(g) => (g.axes()[i].n, g.stride(i), g.axes()[i].trapezoid_weights()),
    };
    (0..f.len())
        .map(|idx| {
            let k = (idx / stride) % n;
            let base = idx - k * stride;
            let terms: Vec<f64> = (0..n).map(|s| weights[s] * f[base + s * stride]).collect();
            pairwise_sum(&terms)
        })
        .collect()
}

/// `|⟨Lf, g⟩ − ⟨f, L⁺g⟩|`.
pub fn adjoint_identity_residual(op: LinearOperatorKind, f: &ScalarField, g: &VectorField) -> Result<f64> {
    if f.domain != g.domain {
        return Err(Error::ShapeMismatch("f and g live on different domains".into()));
    }
    let lhs = inner_vector(&op.apply(f)?, g)?;
    let rhs = inner(f, &op.adjoint(g)?)?;
    Ok((lhs - rhs).abs())
}

/// Generalized Fisher divergence `Σ_x w(x) p(x) |Lp(x)/p(x) − Lq(x)/q(x)|²`
/// over nodes where `p` is positive (on grids, above the support cut).
pub fn generalized_fisher(op: LinearOperatorKind, p: &ScalarField, q: &ScalarField) -> Result<f64> {
    if p.domain != q.domain {
        return Err(Error::GeometryMismatch);
    }
    let lp = op.apply(p)?;
    let lq = op.apply(q)?;
    let w = p.domain.measure();
    let peak = p.values.iter().copied().fold(0.0, f64::max);
    let cut = match p.domain {
        Domain::Grid(_) => crate::scalespace::SUPPORT_FRACTION * peak,
        Domain::Discrete(_) => 0.0,
    };
    let mut terms = Vec::with_capacity(w.len());
    for k in 0..w.len() {
        let pk = p.values[k];
        if pk <= cut {
            continue;
        }
        let qk = q.values[k];
        if qk <= 0.0 {
            return Err(Error::NotAbsolutelyContinuous { index: k });
        }
        let sq: f64 = lp
            .components
            .iter()
            .zip(&lq.components)
            .map(|(a, b)| (a[k] / pk - b[k] / qk).powi(2))
            .sum();
        terms.push(w[k] * pk * sq);
    }
    Ok(pairwise_sum(&terms))
}
