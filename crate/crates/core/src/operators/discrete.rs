use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Largest number of states any brute-force enumeration will visit.
pub const ENUMERATION_LIMIT: usize = 1 << 24;

/// The lattice `{0,…,m−1}^d`, indexed row-major with coordinate 0 slowest:
/// `idx = Σ_i x_i · m^(d−1−i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateSpace {
    m: usize,
    d: usize,
    size: usize,
}

impl StateSpace {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        if m < 2 || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "state space needs m >= 2 and d >= 1 (got m={m}, d={d})"
            )));
        }
        let states = (m as f64).powi(d as i32);
        if states > ENUMERATION_LIMIT as f64 {
            return Err(Error::StateSpaceTooLarge {
                states,
                limit: ENUMERATION_LIMIT,
            });
        }
        Ok(Self {
            m,
            d,
            size: m.pow(d as u32),
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Flat-index step of coordinate `i`.
    pub fn stride(&self, i: usize) -> usize {
        self.m.pow((self.d - 1 - i) as u32)
    }

    pub fn encode(&self, x: &[usize]) -> usize {
        x.iter().fold(0, |acc, &s| acc * self.m + s)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut x = vec![0; self.d];
        for slot in x.iter_mut().rev() {
            *slot = idx % self.m;
            idx /= self.m;
        }
        x
    }

    pub fn symbol(&self, idx: usize, i: usize) -> usize {
        (idx / self.stride(i)) % self.m
    }

    pub fn states(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size).map(|i| self.decode(i))
    }

    pub fn check_state(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        match x.iter().position(|&s| s >= self.m) {
            Some(coordinate) => Err(Error::SymbolOutOfAlphabet {
                coordinate,
                symbol: x[coordinate],
                m: self.m,
            }),
            None => Ok(()),
        }
    }
}

/// Access to the singleton conditionals `p(· | x^{\i})` of a discrete
/// distribution.
pub trait SingletonConditionals {
    fn alphabet_size(&self) -> usize;
    fn dim(&self) -> usize;
    /// The `m` probabilities of coordinate `i` given the other coordinates
    /// of `x` (the value of `x[i]` itself is ignored).
    fn conditional(&self, x: &[usize], i: usize) -> Result<Vec<f64>>;
}

/// A dense, normalized probability table over `{0,…,m−1}^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteJoint {
    space: StateSpace,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    m: usize,
    d: usize,
    probs: Vec<f64>,
}

impl DiscreteJoint {
    /// Accepts a table that already sums to one (within 1e−9) and
    /// renormalizes it exactly.
    pub fn new(m: usize, d: usize, probs: Vec<f64>) -> Result<Self> {
        let joint = Self::from_weights(m, d, probs.clone())?;
        let total = pairwise_sum(&probs);
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(joint)
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(m: usize, d: usize, weights: Vec<f64>) -> Result<Self> {
        let space = StateSpace::new(m, d)?;
        if weights.len() != space.size() {
            return Err(Error::ShapeMismatch(format!(
                "{} states need {} entries, got {}",
                m,
                space.size(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "joint entries must be finite and nonnegative".into(),
            ));
        }
        let total = pairwise_sum(&weights);
        if total <= 0.0 {
            return Err(Error::InvalidArgument("joint has zero mass".into()));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { space, probs })
    }

    pub fn uniform(m: usize, d: usize) -> Result<Self> {
        let space = StateSpace::new(m, d)?;
        Self::from_weights(m, d, vec![1.0; space.size()])
    }

    /// Product of independent per-coordinate marginals.
    pub fn product(marginals: &[Vec<f64>]) -> Result<Self> {
        let m = marginals.first().map_or(0, Vec::len);
        if marginals.iter().any(|p| p.len() != m) {
            return Err(Error::ShapeMismatch("marginals of unequal length".into()));
        }
        let space = StateSpace::new(m, marginals.len())?;
        let weights = space
            .states()
            .map(|x| x.iter().zip(marginals).map(|(&s, p)| p[s]).product())
            .collect();
        Self::from_weights(m, marginals.len(), weights)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &[usize]) -> Result<f64> {
        self.space.check_state(x)?;
        Ok(self.probs[self.space.encode(x)])
    }

    pub fn is_positive(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&JointFile {
            m: self.space.alphabet_size(),
            d: self.space.dim(),
            probs: self.probs.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: JointFile = serde_json::from_str(text)?;
        Self::new(f.m, f.d, f.probs)
    }
}

impl SingletonConditionals for DiscreteJoint {
    fn alphabet_size(&self) -> usize {
        self.space.alphabet_size()
    }

    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn conditional(&self, x: &[usize], i: usize) -> Result<Vec<f64>> {
        self.space.check_state(x)?;
        if i >= self.space.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.space.dim(),
            });
        }
        let stride = self.space.stride(i);
        let base = self.space.encode(x) - x[i] * stride;
        let slice: Vec<f64> = (0..self.space.alphabet_size())
            .map(|s| self.probs[base + s * stride])
            .collect();
        let total = pairwise_sum(&slice);
        if total <= 0.0 {
            return Err(Error::ZeroConditional { coordinate: i });
        }
        Ok(slice.into_iter().map(|p| p / total).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_formula_is_coordinate_zero_slowest() {
        let s = StateSpace::new(3, 3).unwrap();
        assert_eq!(s.encode(&[1, 0, 2]), 9 + 2);
        assert_eq!(s.decode(11), vec![1, 0, 2]);
        assert_eq!(s.symbol(11, 0), 1);
        assert_eq!(s.symbol(11, 2), 2);
        for idx in 0..s.size() {
            assert_eq!(s.encode(&s.decode(idx)), idx);
        }
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        assert!(StateSpace::new(2, 24).is_ok());
        assert!(matches!(StateSpace::new(2, 25), Err(Error::StateSpaceTooLarge { .. })));
    }

    #[test]
    fn state_validation() {
        let s = StateSpace::new(2, 2).unwrap();
        assert!(matches!(
            s.check_state(&[0, 2]),
            Err(Error::SymbolOutOfAlphabet { coordinate: 1, .. })
        ));
        assert!(matches!(s.check_state(&[0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn product_conditionals_are_marginals() {
        let j = DiscreteJoint::product(&[vec![0.25, 0.75], vec![0.4, 0.6]]).unwrap();
        let c = j.conditional(&[1, 0], 1).unwrap();
        assert!((c[0] - 0.4).abs() < 1e-15 && (c[1] - 0.6).abs() < 1e-15);
        assert!((j.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_strictness() {
        let j = DiscreteJoint::product(&[vec![0.25, 0.75], vec![0.5, 0.5]]).unwrap();
        let back = DiscreteJoint::from_json(&j.to_json().unwrap()).unwrap();
        assert_eq!(j, back);
        let bad = r#"{"m":2,"d":1,"probs":[0.5,0.5],"extra":1}"#;
        assert!(DiscreteJoint::from_json(bad).is_err());
        let unnormalized = r#"{"m":2,"d":1,"probs":[0.5,0.6]}"#;
        assert!(DiscreteJoint::from_json(unnormalized).is_err());
    }
}
