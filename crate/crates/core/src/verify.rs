//! Self-contained numerical checks of the library's identities, grouped in
//! suites. Every check reports the measured quantity next to its bound, so
//! a failing run shows how far off it was.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimation::{fd_gradient, FD_CHECK_STEP};
use crate::models::{Dataset, Graph, Model};
use crate::numeric::max_abs;
use crate::objectives::{
    evaluate, gsm_discrete_objective, gsm_discrete_population, ratio_matching_population,
    squared_conditional_difference, ObjectiveKind,
};
use crate::operators::{
    adjoint_identity_residual, reconstruct_joint, DiscreteJoint, Domain, LinearOperatorKind, ScalarField, StateSpace,
    VectorField,
};
use crate::scalespace::closed_form::{gaussian_fisher, gaussian_kl_dt};
use crate::scalespace::{
    debruijn_residual, divergence_curve, grid_identity_residual, heat_pde_residual, kl_decay_residual, t_grid,
    GridDensity, GridGeometry,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    KlDecay,
    Debruijn,
    GridIdentity,
    HeatPde,
    Adjoint,
    Brook,
    MarginalOffset,
    RmIdentity,
    GradCheck,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::KlDecay,
        Suite::Debruijn,
        Suite::GridIdentity,
        Suite::HeatPde,
        Suite::Adjoint,
        Suite::Brook,
        Suite::MarginalOffset,
        Suite::RmIdentity,
        Suite::GradCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::KlDecay => "theorem1",
            Suite::Debruijn => "debruijn",
            Suite::GridIdentity => "lemma1",
            Suite::HeatPde => "heatpde",
            Suite::Adjoint => "adjoint",
            Suite::Brook => "brook",
            Suite::MarginalOffset => "eq16eq17",
            Suite::RmIdentity => "rm-identity",
            Suite::GradCheck => "gradcheck",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_selector(name: &str) -> Result<Vec<Suite>> {
        if name == "all" {
            return Ok(Self::ALL.to_vec());
        }
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .map(|s| vec![s])
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|s| s.name()).collect();
                Error::Parse(format!(
                    "unknown suite `{name}` (expected one of {}, all)",
                    names.join(", ")
                ))
            })
    }

    pub fn run(&self) -> Result<SuiteReport> {
        let start = Instant::now();
        let checks = match self {
            Suite::KlDecay => kl_decay()?,
            Suite::Debruijn => debruijn()?,
            Suite::GridIdentity => grid_identity()?,
            Suite::HeatPde => heat_pde()?,
            Suite::Adjoint => adjoint()?,
            Suite::Brook => brook()?,
            Suite::MarginalOffset => marginal_offset()?,
            Suite::RmIdentity => rm_identity()?,
            Suite::GradCheck => grad_check()?,
        };
        Ok(SuiteReport {
            suite: *self,
            checks,
            elapsed: start.elapsed(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtMost(f64),
    Within(f64, f64),
}

impl Bound {
    fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(b) => v <= b,
            Bound::Within(lo, hi) => v >= lo && v <= hi,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(b) => write!(f, "<= {b:e}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        self.bound.holds(self.measured)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.6e} ({})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.bound
        )
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Grid used by the 1-D scale-space checks.
fn line(n: usize) -> Result<GridGeometry> {
    GridGeometry::line(-12.0, 12.0, n)
}

fn kl_decay() -> Result<Vec<Check>> {
    let ts = t_grid(0.02, 1.0, 0.02)?;
    let mut checks = Vec::new();
    for (label, (m2, v2)) in [("N(0,1) vs N(0,2)", (0.0, 2.0)), ("N(0,1) vs N(0.5,1)", (0.5, 1.0))] {
        let p = GridDensity::gaussian_1d(line(4096)?, 0.0, 1.0)?;
        let q = GridDensity::gaussian_1d(line(4096)?, m2, v2)?;
        let curve = divergence_curve(&p, &q, &ts)?;
        checks.push(Check::new(
            format!("{label}: max |dKL/dt + F/2| / F over t in [0.02, 1]"),
            kl_decay_residual(&curve)?,
            Bound::AtMost(0.02),
        ));
        checks.push(Check::new(
            format!("{label}: KL increase along the curve"),
            curve.max_kl_increase(),
            Bound::AtMost(1e-8),
        ));
        // t = 0 only through the closed form
        let exact = gaussian_kl_dt(0.0, 1.0, m2, v2, 0.0) + 0.5 * gaussian_fisher(0.0, 1.0, m2, v2);
        checks.push(Check::new(
            format!("{label}: closed-form dKL/dt + F/2 at t = 0"),
            exact.abs(),
            Bound::AtMost(1e-15),
        ));
        checks.push(Check::new(
            format!("{label}: closed-form dKL/dt at t = 0 against -0.125"),
            (gaussian_kl_dt(0.0, 1.0, m2, v2, 0.0) + 0.125).abs(),
            Bound::AtMost(1e-15),
        ));
    }
    Ok(checks)
}

fn debruijn() -> Result<Vec<Check>> {
    let ts = t_grid(0.1, 1.0, 0.02)?;
    let normal = GridDensity::gaussian_1d(line(4096)?, 0.0, 1.0)?;
    let mixture = GridDensity::mixture_1d(line(4096)?, &[(0.5, -2.0, 1.0), (0.5, 2.0, 1.0)])?;
    Ok(vec![
        Check::new(
            "N(0,1): max |dH/dt - J/2| / J over t in [0.1, 1]",
            debruijn_residual(&normal, &ts)?,
            Bound::AtMost(0.01),
        ),
        Check::new(
            "two-bump mixture: max |dH/dt - J/2| / J over t in [0.1, 1]",
            debruijn_residual(&mixture, &ts)?,
            Bound::AtMost(0.02),
        ),
    ])
}

fn refinement_checks(label: &str, residual: impl Fn(usize) -> Result<f64>) -> Result<Vec<Check>> {
    let coarse = residual(2048)?;
    let fine = residual(4096)?;
    Ok(vec![
        Check::new(format!("{label}: residual at n = 4096"), fine, Bound::AtMost(1e-4)),
        Check::new(
            format!("{label}: residual ratio n = 2048 over n = 4096"),
            coarse / fine,
            Bound::Within(2.8, 5.2),
        ),
    ])
}

fn grid_identity() -> Result<Vec<Check>> {
    refinement_checks("exp(-x^2/2) on [-8, 8]", |n| {
        let f = GridDensity::from_fn(GridGeometry::line(-8.0, 8.0, n)?, |x| (-x[0] * x[0] / 2.0).exp())?;
        grid_identity_residual(&f)
    })
}

fn heat_pde() -> Result<Vec<Check>> {
    refinement_checks("N(0,1) at t = 0.5, dt = 1e-3", |n| {
        heat_pde_residual(&GridDensity::gaussian_1d(line(n)?, 0.0, 1.0)?, 0.5, 1e-3)
    })
}

fn random_joint(m: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<DiscreteJoint> {
    let size = StateSpace::new(m, d)?.size();
    DiscreteJoint::from_weights(m, d, (0..size).map(|_| rng.random_range(0.05..1.0)).collect())
}

fn adjoint() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = Vec::new();
    for (m, d) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)] {
        let space = StateSpace::new(m, d)?;
        let domain = Domain::Discrete(space);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let f = ScalarField::new(
                domain.clone(),
                (0..space.size()).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )?;
            let g = VectorField::new(
                domain.clone(),
                (0..d)
                    .map(|_| (0..space.size()).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect(),
            )?;
            worst = worst.max(adjoint_identity_residual(LinearOperatorKind::Marginalization, &f, &g)?);
        }
        checks.push(Check::new(
            format!("marginalization, m = {m}, d = {d}: worst residual over 100 pairs"),
            worst,
            Bound::AtMost(1e-12),
        ));
    }
    Ok(checks)
}

fn brook() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checks = Vec::new();
    for (m, d) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)] {
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let p = random_joint(m, d, &mut rng)?;
            let r = reconstruct_joint(&p, m, d)?;
            let err = p
                .probs()
                .iter()
                .zip(r.probs())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
        }
        checks.push(Check::new(
            format!("reconstruction from conditionals, m = {m}, d = {d}: worst error over 10 joints"),
            worst,
            Bound::AtMost(1e-10),
        ));
    }
    Ok(checks)
}

fn spread(v: &[f64]) -> f64 {
    v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - v.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

fn marginal_offset() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checks = Vec::new();
    for d in 2..=6 {
        let p = random_joint(2, d, &mut rng)?;
        let data = Dataset::weighted_enumeration(&p);
        let model = Model::ising(Graph::chain(d), vec![0.0; 2 * d - 1])?;
        let mut offsets = Vec::with_capacity(20);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..model.n_params()).map(|_| rng.random_range(-0.5..0.5)).collect();
            let population = gsm_discrete_population(&p, &model, &theta)?;
            let empirical = gsm_discrete_objective(&model, &theta, &data)?.value;
            offsets.push(population - empirical);
        }
        checks.push(Check::new(
            format!("binary d = {d}: spread of population minus empirical over 20 parameters"),
            spread(&offsets),
            Bound::AtMost(1e-10),
        ));
    }
    Ok(checks)
}

fn rm_identity() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = Model::ising(Graph::complete(3), vec![0.0; 6])?;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = random_joint(2, 3, &mut rng)?;
        let theta: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = ratio_matching_population(&p, &model, &theta)?;
        let b = squared_conditional_difference(&p, &model, &theta)?;
        worst = worst.max((a - b).abs());
    }
    Ok(vec![Check::new(
        "ratio-matching population against squared conditional differences, 50 pairs",
        worst,
        Bound::AtMost(1e-12),
    )])
}

fn grad_check() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in [2, 3, 4] {
        let truth = Model::ising_chain(d, 0.5, 0.0)?;
        let p = truth.joint()?;
        let star = truth.params();
        let gsm = fd_gradient(|t| gsm_discrete_population(&p, &truth, t), star, FD_CHECK_STEP)?;
        let rm = fd_gradient(|t| ratio_matching_population(&p, &truth, t), star, FD_CHECK_STEP)?;
        checks.push(Check::new(
            format!("Ising chain d = {d}: population gradient at the truth, marginalization divergence"),
            max_abs(&gsm),
            Bound::AtMost(1e-8),
        ));
        checks.push(Check::new(
            format!("Ising chain d = {d}: population gradient at the truth, ratio matching"),
            max_abs(&rm),
            Bound::AtMost(1e-8),
        ));
    }

    // analytic gradients against central differences
    let ising = Model::ising(Graph::cycle(3), vec![0.2, -0.1, 0.3, 0.4, -0.6, 0.5])?;
    let potts = Model::potts(Graph::chain(2), 3, vec![0.1, -0.2, 0.3, 0.0, 0.7])?;
    let gauss = Model::gaussian(&[0.4, -0.2], &[1.3, 0.2, 0.9])?;
    let cases = [
        (&ising, ising.sample(500, 1)?),
        (&potts, potts.sample(500, 2)?),
        (&gauss, gauss.sample(500, 3)?),
    ];
    for (model, data) in &cases {
        for kind in ObjectiveKind::ALL.into_iter().filter(|k| k.supports(model.kind())) {
            let theta: Vec<f64> = model.params().iter().map(|v| v * 0.9 + 0.05).collect();
            let Some(grad) = evaluate(kind, model, &theta, data)?.grad else {
                continue;
            };
            let fd = fd_gradient(|t| Ok(evaluate(kind, model, t, data)?.value), &theta, FD_CHECK_STEP)?;
            let err = grad
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
                .fold(0.0, f64::max);
            checks.push(Check::new(
                format!(
                    "{} on {}: analytic against central differences",
                    kind.tag(),
                    model.kind().tag()
                ),
                err,
                Bound::AtMost(1e-5),
            ));
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_parsing() {
        assert_eq!(Suite::parse_selector("all").unwrap().len(), 9);
        assert_eq!(Suite::parse_selector("rm-identity").unwrap(), vec![Suite::RmIdentity]);
        assert!(Suite::parse_selector("lemma9").is_err());
        for s in Suite::ALL {
            assert_eq!(Suite::parse_selector(s.name()).unwrap(), vec![s]);
        }
    }

    #[test]
    fn discrete_suites_pass() {
        for s in [
            Suite::Adjoint,
            Suite::Brook,
            Suite::MarginalOffset,
            Suite::RmIdentity,
            Suite::GradCheck,
        ] {
            let r = s.run().unwrap();
            for c in &r.checks {
                assert!(c.passed(), "{}: {c}", s.name());
            }
        }
    }

    #[test]
    fn check_formatting() {
        let c = Check::new("x", 0.5, Bound::Within(0.0, 1.0));
        assert_eq!(c.to_string(), "PASS x: 5.000000e-1 (in [0, 1])");
        let c = Check::new("y", 2.0, Bound::AtMost(1.0));
        assert!(!c.passed());
        assert!(c.to_string().starts_with("FAIL y"));
    }
}
