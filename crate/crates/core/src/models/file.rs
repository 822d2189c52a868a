//! JSON parameter files.
//!
//! ```json
//! {"kind": "ising", "dim": 4, "alphabet_size": 2,
//!  "params": [0, 0, 0, 0, 0.5, 0.5, 0.5], "layout": "chain"}
//! ```
//!
//! Layout strings by kind:
//! - ising / potts: `chain`, `cycle`, `complete`, `grid:RxC` or
//!   `edges:0-1,1-2,…`
//! - gaussian: `mean,cov_lower`, optionally followed by `;box=lo:hi:n`
//! - gengauss1d: `alpha=<a>`, optionally followed by `;box=lo:hi:n`
//!
//! The box declares the quadrature grid (square in 2-D) used for exact
//! normalization and sampling.

use serde::{Deserialize, Serialize};

use super::family::{Graph, Model, ModelKind};
use crate::error::{Error, Result};
use crate::scalespace::{Axis, GridGeometry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_size: Option<usize>,
    pub params: Vec<f64>,
    pub layout: String,
}

fn parse_graph(dim: usize, layout: &str) -> Result<Graph> {
    match layout.trim() {
        "chain" => Ok(Graph::chain(dim)),
        "cycle" => Ok(Graph::cycle(dim)),
        "complete" => Ok(Graph::complete(dim)),
        other => {
            if let Some(shape) = other.strip_prefix("grid:") {
                let (r, c) = shape
                    .split_once('x')
                    .ok_or_else(|| Error::Parse(format!("grid layout `{shape}` is not RxC")))?;
                let (r, c): (usize, usize) = (
                    r.parse().map_err(|_| Error::Parse(format!("bad grid rows `{r}`")))?,
                    c.parse().map_err(|_| Error::Parse(format!("bad grid cols `{c}`")))?,
                );
                if r * c != dim {
                    return Err(Error::Parse(format!("grid {r}x{c} does not have {dim} nodes")));
                }
                Ok(Graph::lattice(r, c))
            } else if let Some(list) = other.strip_prefix("edges:") {
                let edges = list
                    .split(',')
                    .filter(|e| !e.trim().is_empty())
                    .map(|e| {
                        let (a, b) = e
                            .trim()
                            .split_once('-')
                            .ok_or_else(|| Error::Parse(format!("edge `{e}` is not i-j")))?;
                        Ok((
                            a.parse()
                                .map_err(|_| Error::Parse(format!("bad edge endpoint `{a}`")))?,
                            b.parse()
                                .map_err(|_| Error::Parse(format!("bad edge endpoint `{b}`")))?,
                        ))
                    })
                    .collect::<Result<Vec<(usize, usize)>>>()?;
                Graph::new(dim, edges)
            } else {
                Err(Error::Parse(format!("unknown graph layout `{other}`")))
            }
        }
    }
}

fn graph_layout(graph: &Graph) -> String {
    let d = graph.dim();
    if *graph == Graph::chain(d) {
        "chain".into()
    } else if *graph == Graph::cycle(d) {
        "cycle".into()
    } else if *graph == Graph::complete(d) {
        "complete".into()
    } else {
        let edges: Vec<String> = graph.edges().iter().map(|(i, j)| format!("{i}-{j}")).collect();
        format!("edges:{}", edges.join(","))
    }
}

/// Splits `head;box=lo:hi:n` into the head and the optional grid.
fn split_box(layout: &str, dim: usize) -> Result<(&str, Option<GridGeometry>)> {
    let mut parts = layout.split(';');
    let head = parts.next().unwrap_or("").trim();
    let mut geometry = None;
    for part in parts {
        let spec = part
            .trim()
            .strip_prefix("box=")
            .ok_or_else(|| Error::Parse(format!("unknown layout option `{part}`")))?;
        let fields: Vec<&str> = spec.split(':').collect();
        let [lo, hi, n] = fields[..] else {
            return Err(Error::Parse(format!("box `{spec}` is not lo:hi:n")));
        };
        let axis = Axis::new(
            lo.parse().map_err(|_| Error::Parse(format!("bad box bound `{lo}`")))?,
            hi.parse().map_err(|_| Error::Parse(format!("bad box bound `{hi}`")))?,
            n.parse().map_err(|_| Error::Parse(format!("bad box size `{n}`")))?,
        )?;
        geometry = Some(GridGeometry::new(vec![axis; dim])?);
    }
    Ok((head, geometry))
}

fn box_suffix(model: &Model) -> String {
    match model.quadrature() {
        Some(g) => {
            let a = g.axes()[0];
            format!(";box={}:{}:{}", a.lo, a.hi, a.n)
        }
        None => String::new(),
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<Model> {
        let kind = ModelKind::parse(&self.kind)?;
        if kind.is_discrete() != self.alphabet_size.is_some() {
            return Err(Error::Parse(format!(
                "alphabet_size must be given exactly for discrete kinds (kind `{}`)",
                self.kind
            )));
        }
        match kind {
            ModelKind::Ising => {
                if self.alphabet_size != Some(2) {
                    return Err(Error::Parse("Ising models have alphabet_size 2".into()));
                }
                Model::ising(parse_graph(self.dim, &self.layout)?, self.params)
            }
            ModelKind::Potts => Model::potts(
                parse_graph(self.dim, &self.layout)?,
                self.alphabet_size.unwrap_or(0),
                self.params,
            ),
            ModelKind::Gaussian => {
                let (head, geometry) = split_box(&self.layout, self.dim)?;
                if head != "mean,cov_lower" {
                    return Err(Error::Parse(format!(
                        "Gaussian layout must be `mean,cov_lower`, got `{head}`"
                    )));
                }
                if self.params.len() < self.dim {
                    return Err(Error::ParamLength {
                        layout: self.layout.clone(),
                        expected: self.dim + self.dim * (self.dim + 1) / 2,
                        got: self.params.len(),
                    });
                }
                let model = Model::gaussian(&self.params[..self.dim], &self.params[self.dim..])?;
                match geometry {
                    Some(g) => model.with_quadrature(g),
                    None => Ok(model),
                }
            }
            ModelKind::GenGauss1D => {
                if self.dim != 1 {
                    return Err(Error::Parse("gengauss1d models are one-dimensional".into()));
                }
                let (head, geometry) = split_box(&self.layout, 1)?;
                let alpha: f64 = head
                    .strip_prefix("alpha=")
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("gengauss1d layout must be `alpha=<a>`, got `{head}`")))?;
                let [mu, beta] = self.params[..] else {
                    return Err(Error::ParamLength {
                        layout: self.layout.clone(),
                        expected: 2,
                        got: self.params.len(),
                    });
                };
                let model = Model::gen_gauss_1d(alpha, mu, beta)?;
                match geometry {
                    Some(g) => model.with_quadrature(g),
                    None => Ok(model),
                }
            }
        }
    }

    pub fn from_model(model: &Model) -> Self {
        let layout = match model.kind() {
            ModelKind::Ising | ModelKind::Potts => graph_layout(model.graph().expect("lattice model has a graph")),
            ModelKind::Gaussian => format!("mean,cov_lower{}", box_suffix(model)),
            ModelKind::GenGauss1D => format!("alpha={}{}", model.alpha().unwrap_or(0.0), box_suffix(model)),
        };
        Self {
            kind: model.kind().tag().into(),
            dim: model.dim(),
            alphabet_size: model.alphabet_size(),
            params: model.params().to_vec(),
            layout,
        }
    }
}

impl Model {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(text)?.into_model()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from_model(self))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_file_round_trip() {
        let text = r#"{"kind":"ising","dim":4,"alphabet_size":2,"params":[0,0,0,0,0.5,0.5,0.5],"layout":"chain"}"#;
        let m = Model::from_json(text).unwrap();
        assert_eq!(m.graph().unwrap(), &Graph::chain(4));
        let back = Model::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.params(), m.params());
        assert_eq!(ModelFile::from_model(&back).layout, "chain");
    }

    #[test]
    fn layouts_parse() {
        assert_eq!(parse_graph(6, "grid:2x3").unwrap().edges().len(), 7);
        assert_eq!(parse_graph(3, "edges:0-2,1-2").unwrap().edges(), &[(0, 2), (1, 2)]);
        assert!(parse_graph(5, "grid:2x3").is_err());
        assert!(parse_graph(3, "star").is_err());
        let g = Graph::new(3, vec![(0, 2)]).unwrap();
        assert_eq!(graph_layout(&g), "edges:0-2");
    }

    #[test]
    fn continuous_files_carry_boxes() {
        let text = r#"{"kind":"gengauss1d","dim":1,"params":[0.0,1.0],"layout":"alpha=1.5;box=-10:10:2048"}"#;
        let m = Model::from_json(text).unwrap();
        assert_eq!(m.quadrature().unwrap().axes()[0].n, 2048);
        assert_eq!(ModelFile::from_model(&m).layout, "alpha=1.5;box=-10:10:2048");
        let g = r#"{"kind":"gaussian","dim":2,"params":[0,0,1,0,1],"layout":"mean,cov_lower"}"#;
        assert_eq!(Model::from_json(g).unwrap().dim(), 2);
    }

    #[test]
    fn strict_parsing() {
        let extra = r#"{"kind":"ising","dim":2,"alphabet_size":2,"params":[0,0,0],"layout":"chain","seed":1}"#;
        assert!(Model::from_json(extra).is_err());
        let missing_m = r#"{"kind":"potts","dim":2,"params":[0,0,0],"layout":"chain"}"#;
        assert!(Model::from_json(missing_m).is_err());
        let bad_kind = r#"{"kind":"boltzmann","dim":2,"params":[],"layout":"chain"}"#;
        assert!(Model::from_json(bad_kind).is_err());
        let short = r#"{"kind":"gaussian","dim":2,"params":[0,0,1],"layout":"mean,cov_lower"}"#;
        assert!(matches!(Model::from_json(short), Err(Error::ParamLength { .. })));
    }
}
