//! `scorematch`: generate data, fit models, compare estimators, trace
//! scale-space divergence curves and run the verification suites.
//!
//! Exit codes: 0 on success, 1 when a verification suite fails, 2 on usage,
//! compatibility or I/O errors.

mod density;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use scorematch::estimation::{compare_estimators, fit, CompareConfig, OptimizerConfig};
use scorematch::models::{DataKind, Dataset, Model};
use scorematch::objectives::ObjectiveKind;
use scorematch::scalespace::{divergence_curve, t_grid, GridDensity, GridGeometry};
use scorematch::verify::Suite;

use density::DensitySpec;
use output::{read_text, write_to};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] scorematch::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("verification failed")]
    VerificationFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerificationFailed => 1,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "scorematch",
    version,
    about = "Score matching and related estimators for unnormalized models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw an exact sample from a model file and write it as CSV.
    Generate(GenerateArgs),
    /// Fit a model to a dataset by minimizing one objective.
    Fit(FitArgs),
    /// Sample, fit and score several estimators against known parameters.
    Compare(CompareArgs),
    /// KL and Fisher divergence between two smoothed densities over t.
    Scalespace(ScalespaceArgs),
    /// Run the numerical verification suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: String,
}

/// Optimizer settings read from a JSON file. Unknown keys are an error.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerFile {
    max_iters: Option<usize>,
    grad_tol: Option<f64>,
    initial_step: Option<f64>,
    backtrack: Option<f64>,
    armijo: Option<f64>,
    init: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct OptimizerArgs {
    /// JSON file with any of max_iters, grad_tol, initial_step, backtrack,
    /// armijo, init. Flags override it.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
    #[arg(long)]
    initial_step: Option<f64>,
    #[arg(long)]
    backtrack: Option<f64>,
    #[arg(long)]
    armijo: Option<f64>,
    /// Starting parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<f64>>,
}

impl OptimizerArgs {
    fn config(&self) -> Result<OptimizerConfig, CliError> {
        let file: OptimizerFile = match &self.optimizer {
            Some(path) => serde_json::from_str(&read_text(path)?)?,
            None => OptimizerFile::default(),
        };
        let d = OptimizerConfig::default();
        let cfg = OptimizerConfig {
            max_iters: self.max_iters.or(file.max_iters).unwrap_or(d.max_iters),
            grad_tol: self.grad_tol.or(file.grad_tol).unwrap_or(d.grad_tol),
            initial_step: self.initial_step.or(file.initial_step).unwrap_or(d.initial_step),
            backtrack: self.backtrack.or(file.backtrack).unwrap_or(d.backtrack),
            armijo: self.armijo.or(file.armijo).unwrap_or(d.armijo),
            init: self.init.clone().or(file.init),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    objective: String,
    /// CSV data file, or `enumerate` to fit against the exact joint of
    /// `--p-model`.
    #[arg(long)]
    data: String,
    #[arg(long)]
    p_model: Option<String>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Model file; its parameters are the truth.
    #[arg(long)]
    model: String,
    #[arg(long, value_delimiter = ',', default_value = "gsm,rm,pl,mle")]
    objectives: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Seeds as a list (`1,2,3`) or an inclusive range (`1..5`).
    #[arg(long, default_value = "1..5")]
    seeds: String,
    /// Skip the rows fitted against the exact joint.
    #[arg(long)]
    no_population: bool,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct ScalespaceArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    q: String,
    /// Scale grid `lo:hi:step`.
    #[arg(long, default_value = "0.02:1:0.02")]
    t: String,
    /// Grid points.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Grid box `lo:hi`; by default both densities to 8 standard deviations
    /// at the largest t.
    #[arg(long = "box", allow_hyphen_values = true)]
    bounds: Option<String>,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
}

#[derive(Serialize)]
struct FitReport {
    theta_hat: Vec<f64>,
    objective: &'static str,
    value: f64,
    grad_norm: f64,
    iters: usize,
    converged: bool,
    seed_of_data: Option<u64>,
}

fn load_model(path: &str) -> Result<Model, CliError> {
    Ok(Model::from_json(&read_text(path)?)?)
}

fn data_kind(model: &Model) -> DataKind {
    match model.alphabet_size() {
        Some(m) => DataKind::Discrete { m },
        None => DataKind::Continuous,
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("bad seed list `{text}` (expected 1,2,3 or 1..5)"));
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn parse_triplet(text: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bad t-grid `{text}` (expected lo:hi:step)")))?;
    match parts[..] {
        [lo, hi, step] => Ok((lo, hi, step)),
        _ => Err(CliError::Usage(format!("bad t-grid `{text}` (expected lo:hi:step)"))),
    }
}

fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let model = load_model(&args.model)?;
    let data = model.sample(args.n, args.seed)?;
    write_to(&args.out, |w| Ok(data.write_csv(w)?))?;
    eprintln!("seed {}", args.seed);
    Ok(())
}

fn fit_command(args: &FitArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let objective = ObjectiveKind::parse(&args.objective)?;
    objective.check_model(&model)?;
    let cfg = args.optimizer.config()?;
    let (data, seed) = if args.data == "enumerate" {
        let path = args
            .p_model
            .as_deref()
            .ok_or_else(|| CliError::Usage("--data enumerate needs --p-model".into()))?;
        let p = load_model(path)?;
        (Dataset::weighted_enumeration(&p.joint()?), None)
    } else {
        if args.p_model.is_some() {
            return Err(CliError::Usage("--p-model only applies with --data enumerate".into()));
        }
        let file = std::fs::File::open(&args.data)
            .map_err(|e| CliError::Usage(format!("cannot read `{}`: {e}", args.data)))?;
        let data = Dataset::read_csv(file, data_kind(&model))?;
        let seed = data.seed();
        (data, Some(seed))
    };
    let r = fit(&model, objective, &data, &cfg)?;
    let report = FitReport {
        theta_hat: r.theta_hat,
        objective: objective.tag(),
        value: r.objective_value,
        grad_norm: r.grad_norm,
        iters: r.iters,
        converged: r.converged,
        seed_of_data: seed,
    };
    write_to(&args.out, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}

fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let objectives = args
        .objectives
        .iter()
        .map(|t| ObjectiveKind::parse(t))
        .collect::<Result<Vec<_>, _>>()?;
    if args.n.contains(&0) {
        return Err(CliError::Usage("sample sizes must be at least 1".into()));
    }
    let cfg = CompareConfig {
        n_list: args.n.clone(),
        seeds: parse_seeds(&args.seeds)?,
        objectives,
        optimizer: args.optimizer.config()?,
        population: !args.no_population,
        threads: args.threads,
    };
    let table = compare_estimators(&model, model.params(), &cfg)?;
    write_to(&args.out, |w| Ok(table.write_csv(w)?))
}

fn scalespace(args: &ScalespaceArgs) -> Result<(), CliError> {
    let p = DensitySpec::parse(&args.p)?;
    let q = DensitySpec::parse(&args.q)?;
    let (lo, hi, step) = parse_triplet(&args.t)?;
    let ts = t_grid(lo, hi, step)?;
    let t_max = ts.last().copied().unwrap_or(0.0);
    let (a, b) = match &args.bounds {
        Some(text) => {
            let parts: Vec<f64> = text
                .split(':')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("bad box `{text}` (expected lo:hi)")))?;
            match parts[..] {
                [a, b] => (a, b),
                _ => return Err(CliError::Usage(format!("bad box `{text}` (expected lo:hi)"))),
            }
        }
        None => {
            let (pa, pb) = p.support(8.0, t_max);
            let (qa, qb) = q.support(8.0, t_max);
            (pa.min(qa), pb.max(qb))
        }
    };
    let geometry = GridGeometry::line(a, b, args.n)?;
    let pd = GridDensity::mixture_1d(geometry.clone(), &p.components)?;
    let qd = GridDensity::mixture_1d(geometry, &q.components)?;
    let curve = divergence_curve(&pd, &qd, &ts)?;
    write_to(&args.out, |w| Ok(curve.write_csv(w)?))
}

fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let suites = Suite::parse_selector(&args.suite)?;
    let mut all_passed = true;
    for suite in suites {
        let report = suite.run()?;
        println!("suite {}", suite.name());
        for check in &report.checks {
            println!("  {check}");
        }
        println!("{}: {}", suite.name(), if report.passed() { "PASS" } else { "FAIL" });
        all_passed &= report.passed();
    }
    println!("overall: {}", if all_passed { "PASS" } else { "FAIL" });
    if all_passed {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Fit(a) => fit_command(a),
        Command::Compare(a) => compare(a),
        Command::Scalespace(a) => scalespace(a),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_seeds("3,1").unwrap(), vec![3, 1]);
        assert!(parse_seeds("5..1").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn t_grid_triplets() {
        assert_eq!(parse_triplet("0.02:1:0.02").unwrap(), (0.02, 1.0, 0.02));
        assert!(parse_triplet("0:1").is_err());
    }

    #[test]
    fn optimizer_file_is_strict() {
        assert!(serde_json::from_str::<OptimizerFile>(r#"{"max_iter": 5}"#).is_err());
        let f: OptimizerFile = serde_json::from_str(r#"{"max_iters": 5}"#).unwrap();
        assert_eq!(f.max_iters, Some(5));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
