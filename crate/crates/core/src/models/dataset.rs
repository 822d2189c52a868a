use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::numeric::format_real;
use crate::operators::DiscreteJoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataKind {
    Continuous,
    Discrete { m: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Values {
    Real(Vec<f64>),
    Symbols { m: usize, data: Vec<usize> },
}

/// `N` samples of `d` coordinates, stored row-major.
///
/// A dataset may carry per-row weights summing to one. That is how a whole
/// distribution is fed to the empirical objectives: every state once,
/// weighted by its probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Values,
    weights: Option<Vec<f64>>,
    seed: u64,
    /// Distinct states with their weights, built once for discrete data.
    tally: Option<Vec<(Vec<usize>, f64)>>,
}

impl Dataset {
    pub fn continuous(dim: usize, values: Vec<f64>, seed: u64) -> Result<Self> {
        check_shape(dim, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dataset contains non-finite values".into()));
        }
        Ok(Self {
            dim,
            values: Values::Real(values),
            weights: None,
            seed,
            tally: None,
        })
    }

    pub fn discrete(dim: usize, m: usize, symbols: Vec<usize>, seed: u64) -> Result<Self> {
        check_shape(dim, symbols.len())?;
        if m < 2 {
            return Err(Error::InvalidArgument(format!("alphabet size must be >= 2, got {m}")));
        }
        if let Some(k) = symbols.iter().position(|&s| s >= m) {
            return Err(Error::SymbolOutOfAlphabet {
                coordinate: k % dim,
                symbol: symbols[k],
                m,
            });
        }
        Ok(Self {
            dim,
            values: Values::Symbols { m, data: symbols },
            weights: None,
            seed,
            tally: None,
        }
        .with_tally())
    }

    /// Every state of `joint` once, weighted by its probability.
    pub fn weighted_enumeration(joint: &DiscreteJoint) -> Self {
        let space = joint.space();
        Self {
            dim: space.dim(),
            values: Values::Symbols {
                m: space.alphabet_size(),
                data: space.states().flatten().collect(),
            },
            weights: Some(joint.probs().to_vec()),
            seed: 0,
            tally: None,
        }
        .with_tally()
    }

    fn with_tally(mut self) -> Self {
        let weights = self.row_weights();
        let mut counts: BTreeMap<&[usize], Vec<f64>> = BTreeMap::new();
        for (i, w) in weights.iter().enumerate() {
            if *w > 0.0 {
                if let Some(row) = self.symbol_row(i) {
                    counts.entry(row).or_default().push(*w);
                }
            }
        }
        let tally = counts
            .into_iter()
            .map(|(x, ws)| (x.to_vec(), crate::numeric::pairwise_sum(&ws)))
            .collect();
        self.tally = Some(tally);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        match &self.values {
            Values::Real(v) => v.len() / self.dim,
            Values::Symbols { data, .. } => data.len() / self.dim,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> DataKind {
        match &self.values {
            Values::Real(_) => DataKind::Continuous,
            Values::Symbols { m, .. } => DataKind::Discrete { m: *m },
        }
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn real_row(&self, i: usize) -> Option<&[f64]> {
        match &self.values {
            Values::Real(v) => Some(&v[i * self.dim..(i + 1) * self.dim]),
            Values::Symbols { .. } => None,
        }
    }

    pub fn symbol_row(&self, i: usize) -> Option<&[usize]> {
        match &self.values {
            Values::Symbols { data, .. } => Some(&data[i * self.dim..(i + 1) * self.dim]),
            Values::Real(_) => None,
        }
    }

    pub fn real_values(&self) -> Option<&[f64]> {
        match &self.values {
            Values::Real(v) => Some(v),
            Values::Symbols { .. } => None,
        }
    }

    /// Weight of each row in an expectation: the stored weights, or `1/N`.
    pub fn row_weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => vec![1.0 / self.n() as f64; self.n()],
        }
    }

    /// Distinct discrete states in lexicographic order with their total
    /// weight. States of zero weight are dropped.
    pub fn tally(&self) -> Option<&[(Vec<usize>, f64)]> {
        self.tally.as_deref()
    }

    /// Writes the header `x0,…,x{d−1}` and one row per sample.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        if self.weights.is_some() {
            return Err(Error::Unsupported("writing a weighted dataset as CSV".into()));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record((0..self.dim).map(|i| format!("x{i}")))?;
        for i in 0..self.n() {
            match &self.values {
                Values::Real(_) => w.write_record(self.real_row(i).unwrap_or(&[]).iter().map(|v| format_real(*v)))?,
                Values::Symbols { .. } => {
                    w.write_record(self.symbol_row(i).unwrap_or(&[]).iter().map(|s| s.to_string()))?
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV format written by [`Dataset::write_csv`]. The seed of
    /// a loaded dataset is 0.
    pub fn read_csv<R: Read>(input: R, kind: DataKind) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let dim = header.len();
        for (i, name) in header.iter().enumerate() {
            if name.trim() != format!("x{i}") {
                return Err(Error::Parse(format!("column {i} is `{name}`, expected `x{i}`")));
            }
        }
        let mut reals = Vec::new();
        let mut symbols = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            if record.len() != dim {
                return Err(Error::Parse(format!(
                    "row {} has {} fields, expected {dim}",
                    line + 1,
                    record.len()
                )));
            }
            for field in record.iter() {
                let field = field.trim();
                match kind {
                    DataKind::Continuous => reals.push(
                        field
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("row {}: `{field}` is not a number", line + 1)))?,
                    ),
                    DataKind::Discrete { .. } => symbols.push(
                        field
                            .parse::<usize>()
                            .map_err(|_| Error::Parse(format!("row {}: `{field}` is not a symbol", line + 1)))?,
                    ),
                }
            }
        }
        match kind {
            DataKind::Continuous => Self::continuous(dim, reals, 0),
            DataKind::Discrete { m } => Self::discrete(dim, m, symbols, 0),
        }
    }
}

fn check_shape(dim: usize, len: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dataset dimension must be >= 1".into()));
    }
    if len == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if !len.is_multiple_of(dim) {
        return Err(Error::ShapeMismatch(format!(
            "{len} values do not split into rows of {dim}"
        )));
    }
    Ok(())
}
