//! Side-by-side estimator comparison on an enumerable model.
//!
//! Each `(N, seed, objective)` cell samples from the true model, fits from
//! the default start and records the max-norm error. Cells are independent
//! and run on scoped threads; rows come back in a fixed order regardless of
//! scheduling. Population rows fit against the exact joint (`N = ∞`).

use std::io::Write;
use std::thread;

use super::{fit, FitResult, OptimizerConfig};
use crate::error::{Error, Result};
use crate::models::{Dataset, Model};
use crate::numeric::format_real;
use crate::objectives::ObjectiveKind;

pub const COMPARISON_HEADER: &str = "objective,n,seed,converged,iters,linf_error,objective_value,grad_norm";

#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub n_list: Vec<usize>,
    pub seeds: Vec<u64>,
    pub objectives: Vec<ObjectiveKind>,
    pub optimizer: OptimizerConfig,
    pub population: bool,
    /// Worker threads; 0 picks the available parallelism.
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub objective: ObjectiveKind,
    /// `None` for a population row.
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub fit: FitResult,
    pub linf_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{COMPARISON_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.objective.tag(),
                r.n.map_or_else(|| "inf".to_string(), |n| n.to_string()),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.fit.converged,
                r.fit.iters,
                format_real(r.linf_error),
                format_real(r.fit.objective_value),
                format_real(r.fit.grad_norm),
            )?;
        }
        Ok(())
    }

    /// Median error over seeds for one objective at one sample size.
    pub fn median_error(&self, objective: ObjectiveKind, n: usize) -> Option<f64> {
        let mut errs: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.objective == objective && r.n == Some(n))
            .map(|r| r.linf_error)
            .collect();
        if errs.is_empty() {
            return None;
        }
        errs.sort_by(f64::total_cmp);
        let k = errs.len();
        Some(if k % 2 == 1 {
            errs[k / 2]
        } else {
            0.5 * (errs[k / 2 - 1] + errs[k / 2])
        })
    }

    pub fn population_row(&self, objective: ObjectiveKind) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.objective == objective && r.n.is_none())
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct Cell {
    objective: ObjectiveKind,
    n: Option<usize>,
    seed: Option<u64>,
    data: usize,
}

/// Samples from `model` at `theta_star` and fits every requested objective.
///
/// Rows are ordered by `N`, then seed, then objective, followed by one
/// population row per objective when `cfg.population` is set.
pub fn compare_estimators(model: &Model, theta_star: &[f64], cfg: &CompareConfig) -> Result<ComparisonTable> {
    if !model.is_discrete() {
        return Err(Error::Unsupported(
            "estimator comparison needs an enumerable discrete model".into(),
        ));
    }
    let truth = model.with_params(theta_star)?;
    // fails early on state spaces too large to enumerate
    let joint = truth.joint()?;
    for kind in &cfg.objectives {
        kind.check_model(model)?;
    }
    cfg.optimizer.validate()?;

    let mut datasets = Vec::new();
    let mut cells = Vec::new();
    for &n in &cfg.n_list {
        for &seed in &cfg.seeds {
            datasets.push(truth.sample(n, seed)?);
            for &objective in &cfg.objectives {
                cells.push(Cell {
                    objective,
                    n: Some(n),
                    seed: Some(seed),
                    data: datasets.len() - 1,
                });
            }
        }
    }
    if cfg.population {
        datasets.push(Dataset::weighted_enumeration(&joint));
        for &objective in &cfg.objectives {
            cells.push(Cell {
                objective,
                n: None,
                seed: None,
                data: datasets.len() - 1,
            });
        }
    }

    let threads = match cfg.threads {
        0 => thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(cells.len().max(1));
    let run = |c: &Cell| -> Result<ComparisonRow> {
        let fit = fit(model, c.objective, &datasets[c.data], &cfg.optimizer)?;
        Ok(ComparisonRow {
            objective: c.objective,
            n: c.n,
            seed: c.seed,
            linf_error: linf(&fit.theta_hat, theta_star),
            fit,
        })
    };
    let mut results: Vec<Option<Result<ComparisonRow>>> = (0..cells.len()).map(|_| None).collect();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let run = &run;
                let cells = &cells;
                scope.spawn(move || {
                    (w..cells.len())
                        .step_by(threads)
                        .map(|k| (k, run(&cells[k])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("comparison worker panicked") {
                results[k] = Some(r);
            }
        }
    });
    let rows = results
        .into_iter()
        .map(|r| r.expect("every cell is assigned to a worker"))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(threads: usize) -> CompareConfig {
        CompareConfig {
            n_list: vec![500, 5000],
            seeds: vec![1, 2, 3],
            objectives: vec![ObjectiveKind::GsmDiscrete, ObjectiveKind::PseudoLikelihood],
            optimizer: OptimizerConfig::default(),
            population: true,
            threads,
        }
    }

    #[test]
    fn row_layout_and_population_rows() {
        let model = Model::ising_chain(3, 0.0, 0.0).unwrap();
        let theta = Model::ising_chain(3, 0.5, 0.0).unwrap().params().to_vec();
        let table = compare_estimators(&model, &theta, &small_config(0)).unwrap();
        assert_eq!(table.rows.len(), 2 * 3 * 2 + 2);
        for kind in [ObjectiveKind::GsmDiscrete, ObjectiveKind::PseudoLikelihood] {
            assert!(table.population_row(kind).unwrap().linf_error < 1e-5);
        }
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], COMPARISON_HEADER);
        assert!(lines[1].starts_with("gsm,500,1,"));
        assert!(lines.last().unwrap().starts_with("pl,inf,,"));
    }

    #[test]
    fn thread_count_does_not_change_the_table() {
        let model = Model::ising_chain(3, 0.0, 0.0).unwrap();
        let theta = Model::ising_chain(3, 0.4, 0.1).unwrap().params().to_vec();
        let a = compare_estimators(&model, &theta, &small_config(1)).unwrap();
        let b = compare_estimators(&model, &theta, &small_config(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn median_of_even_and_odd_counts() {
        let model = Model::ising_chain(2, 0.0, 0.0).unwrap();
        let theta = model.params().to_vec();
        let cfg = CompareConfig {
            n_list: vec![100],
            seeds: vec![1, 2],
            objectives: vec![ObjectiveKind::ExactMle],
            optimizer: OptimizerConfig::default(),
            population: false,
            threads: 1,
        };
        let t = compare_estimators(&model, &theta, &cfg).unwrap();
        let m = t.median_error(ObjectiveKind::ExactMle, 100).unwrap();
        assert_eq!(m, 0.5 * (t.rows[0].linf_error + t.rows[1].linf_error));
        assert!(t.median_error(ObjectiveKind::ExactMle, 7).is_none());
    }

    #[test]
    fn continuous_models_are_refused() {
        let g = Model::standard_gaussian(1).unwrap();
        assert!(compare_estimators(&g, g.params(), &small_config(1)).is_err());
    }
}
