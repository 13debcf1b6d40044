//! Command-line front end: generate instances, certify them, run solvers,
//! and drive the Monte Carlo experiments.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mcps2::conditions::{candidate_minimizer, certify_instance, Hyperparams};
use mcps2::metrics::{score_recovery, RecoveryScore};
use mcps2::harness::{
    run_condition_rate_experiment, run_recovery_experiment, write_condition_rate_report,
    write_recovery_report, ExperimentConfig,
};
use mcps2::problem::{generate_instance, Ensemble, GeneratorConfig, ProblemInstance};
use mcps2::solvers::{admm_lasso, admm_mcps2, global_minimize_bruteforce, AdmmInit};

#[derive(Parser)]
#[command(
    name = "mcps2",
    version,
    about = "Sparse recovery with a concave-regularized estimator: solvers, \
             recovery certificates, and Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random sparse-recovery instance as JSON.
    Gen(GenArgs),
    /// Evaluate every support-recovery certificate on an instance.
    Certify(CertifyArgs),
    /// Run a solver on an instance.
    Solve(SolveArgs),
    /// Run a Monte Carlo sweep and write a report directory.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 40)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    /// Planted magnitude range "lo,hi" (fractions of d allowed up to d).
    #[arg(long, default_value = "0.5,1.0")]
    magnitude_range: String,
    /// ℓ∞ bound on the noise; 0 for a noise-free instance.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Instance JSON produced by `gen`.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    /// Samples for the restricted-eigenvalue estimate.
    #[arg(long, default_value_t = 2000)]
    re_samples: usize,
    #[arg(long, default_value_t = 0)]
    re_seed: u64,
    /// Use this restricted-eigenvalue lower bound instead of estimating one.
    #[arg(long)]
    phi: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON produced by `gen`.
    #[arg(long)]
    instance: PathBuf,
    /// One of: mcps2, lasso, oracle.
    #[arg(long)]
    method: String,
    #[arg(long)]
    lambda: f64,
    /// ADMM penalty; defaults to max(1, 10λ).
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Residual tolerance; defaults to 1e-8·√n.
    #[arg(long)]
    tol: Option<f64>,
    /// Start ADMM from the closed-form support candidate instead of zero.
    #[arg(long, default_value_t = false)]
    warm_candidate: bool,
    /// Accuracy pitch reported by the exhaustive oracle.
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    /// Magnitude above which a coordinate counts as selected when scoring.
    #[arg(long, default_value_t = 0.25)]
    tau: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// For each instance, sweep λ and record whether any grid point passes
    /// each method's support-recovery certificate.
    CondRate(ExperimentArgs),
    /// Run the ADMM solvers at pilot-tuned λ and score exact sign recovery.
    Recovery(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    /// Planted magnitude range "lo,hi".
    #[arg(long, default_value = "0.5,1.0")]
    magnitude_range: String,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Measurement counts: "start:stop:step" or a comma list.
    #[arg(long, default_value = "10:100:10")]
    m_values: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// λ grid: "log:lo:hi:count", "start:stop:step", or a comma list.
    #[arg(long, default_value = "log:1e-6:1:25")]
    lambda_grid: String,
    /// Support-selection threshold for scoring estimates.
    #[arg(long, default_value_t = 0.25)]
    tau: f64,
    /// Held-out trials per (method, λ, m) when tuning λ (recovery only).
    #[arg(long, default_value_t = 16)]
    pilot_trials: usize,
    /// Report directory (created if needed).
    #[arg(long)]
    out: PathBuf,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => gen(args),
        Command::Certify(args) => certify(args),
        Command::Solve(args) => solve(args),
        Command::Experiment(cmd) => experiment(cmd),
    }
}

fn gen(args: GenArgs) -> anyhow::Result<()> {
    let magnitude_range = parse_pair(&args.magnitude_range)
        .context("--magnitude-range must look like \"0.5,1.0\"")?;
    let cfg = GeneratorConfig {
        n: args.n,
        m: args.m,
        k: args.k,
        d: args.d,
        magnitude_range,
        noise_inf_bound: args.noise,
        rng_seed: args.seed,
        ensemble: Ensemble::GaussianInvM,
    };
    let inst = generate_instance(&cfg)?;
    emit(args.out.as_deref(), &inst.to_json()?)
}

fn certify(args: CertifyArgs) -> anyhow::Result<()> {
    let inst = load_instance(&args.instance)?;
    let mut hp = Hyperparams::new(args.lambda, inst.n());
    hp.epsilon = args.epsilon;
    hp.alpha = args.alpha;
    hp.re_samples = args.re_samples;
    hp.re_seed = args.re_seed;
    let report = certify_instance(&inst, &hp, args.phi)?;
    emit(args.out.as_deref(), &report.to_json()?)
}

#[derive(Serialize)]
struct SolveOutput {
    solver_id: String,
    objective: f64,
    iterations: usize,
    converged: bool,
    primal_residual: f64,
    dual_residual: f64,
    runtime_seconds: f64,
    /// Guaranteed objective accuracy, when the solver provides one.
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    /// Recovery metrics against the instance's planted truth.
    score: RecoveryScore,
    x_hat: Vec<f64>,
}

fn solve(args: SolveArgs) -> anyhow::Result<()> {
    let inst = load_instance(&args.instance)?;
    let mut hp = Hyperparams::new(args.lambda, inst.n());
    if let Some(rho) = args.rho {
        hp.rho = rho;
    }
    if let Some(tol) = args.tol {
        hp.tol_primal = tol;
        hp.tol_dual = tol;
    }
    hp.max_iters = args.max_iters;

    let init = if args.warm_candidate {
        if args.method == "oracle" {
            bail!("--warm-candidate applies to the ADMM methods only");
        }
        let candidate = candidate_minimizer(&inst, args.lambda)?;
        Some(AdmmInit {
            z0: candidate
                .x_star
                .map(|v| mcps2::solvers::project_box(v, inst.d)),
            u0: nalgebra::DVector::zeros(inst.n()),
        })
    } else {
        None
    };

    let result = match args.method.as_str() {
        "mcps2" => admm_mcps2(&inst.a, &inst.y, inst.d, &hp, init.as_ref())?,
        "lasso" => admm_lasso(&inst.a, &inst.y, inst.d, &hp, init.as_ref())?,
        "oracle" => {
            global_minimize_bruteforce(&inst.a, &inst.y, inst.d, args.lambda, args.grid_step)?
        }
        other => bail!("unknown method {other:?}; expected mcps2, lasso, or oracle"),
    };

    let output = SolveOutput {
        solver_id: result.solver_id.to_string(),
        objective: result.objective,
        iterations: result.iterations,
        converged: result.converged,
        primal_residual: result.primal_residual,
        dual_residual: result.dual_residual,
        runtime_seconds: result.runtime_seconds,
        tolerance: result.tolerance,
        score: score_recovery(&inst, &result.x_hat, args.tau)?,
        x_hat: result.x_hat.iter().copied().collect(),
    };
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&output)?)
}

fn experiment(cmd: ExperimentCmd) -> anyhow::Result<()> {
    let (args, is_recovery) = match &cmd {
        ExperimentCmd::CondRate(args) => (args, false),
        ExperimentCmd::Recovery(args) => (args, true),
    };
    let cfg = ExperimentConfig {
        n: args.n,
        k: args.k,
        d: args.d,
        magnitude_range: parse_pair(&args.magnitude_range)
            .context("--magnitude-range must look like \"0.5,1.0\"")?,
        noise_inf_bound: args.noise,
        m_values: parse_usize_list(&args.m_values)
            .context("--m-values must look like \"10:100:10\" or \"10,20,40\"")?,
        trials_per_m: args.trials,
        base_seed: args.seed,
        lambda_grid: parse_lambda_grid(&args.lambda_grid)
            .context("--lambda-grid must look like \"log:1e-6:1:25\", \"0.1:0.5:0.1\", or a comma list")?,
        support_tau: args.tau,
        pilot_trials: args.pilot_trials,
    };

    let summary = if is_recovery {
        let out = run_recovery_experiment(&cfg)?;
        write_recovery_report(&out, &args.out)?;
        out.summary
    } else {
        let out = run_condition_rate_experiment(&cfg)?;
        write_condition_rate_report(&out, &args.out)?;
        out.summary
    };

    let mut lines = format!("report written to {}\n", args.out.display());
    lines.push_str(&format!("{:>6} {:>8} {:>8}\n", "m", "method", "rate"));
    for row in &summary {
        lines.push_str(&format!("{:>6} {:>8} {:>8.3}\n", row.m, row.method, row.rate));
    }
    print_text(&lines)
}

/// Prints without panicking when the reader closes the pipe early.
fn print_text(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match write!(lock, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn load_instance(path: &std::path::Path) -> anyhow::Result<ProblemInstance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    Ok(ProblemInstance::from_json(&text)?)
}

fn emit(out: Option<&std::path::Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            print_text(&format!("wrote {}\n", path.display()))
        }
        None => print_text(&format!("{text}\n")),
    }
}

fn parse_pair(spec: &str) -> anyhow::Result<(f64, f64)> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        bail!("expected two comma-separated numbers, got {spec:?}");
    }
    Ok((parts[0].trim().parse()?, parts[1].trim().parse()?))
}

/// "start:stop:step" (inclusive of stop when it lands on the lattice) or a
/// comma list.
fn parse_usize_list(spec: &str) -> anyhow::Result<Vec<usize>> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("expected start:stop:step, got {spec:?}");
        }
        let start: usize = parts[0].trim().parse()?;
        let stop: usize = parts[1].trim().parse()?;
        let step: usize = parts[2].trim().parse()?;
        if step == 0 || stop < start {
            bail!("need step > 0 and stop >= start in {spec:?}");
        }
        Ok((start..=stop).step_by(step).collect())
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(Into::into))
            .collect()
    }
}

/// "log:lo:hi:count" (log-spaced), "start:stop:step" (linear, inclusive up
/// to rounding), or a comma list. Values must come out positive and
/// strictly ascending.
fn parse_lambda_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let grid: Vec<f64> = if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("expected log:lo:hi:count, got {spec:?}");
        }
        let lo: f64 = parts[0].trim().parse()?;
        let hi: f64 = parts[1].trim().parse()?;
        let count: usize = parts[2].trim().parse()?;
        if !(lo > 0.0) || !(hi > lo) || count < 2 {
            bail!("need 0 < lo < hi and count >= 2 in {spec:?}");
        }
        (0..count)
            .map(|i| {
                let t = i as f64 / (count - 1) as f64;
                10f64.powf(lo.log10() + t * (hi.log10() - lo.log10()))
            })
            .collect()
    } else if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("expected start:stop:step, got {spec:?}");
        }
        let start: f64 = parts[0].trim().parse()?;
        let stop: f64 = parts[1].trim().parse()?;
        let step: f64 = parts[2].trim().parse()?;
        if !(step > 0.0) || stop < start {
            bail!("need step > 0 and stop >= start in {spec:?}");
        }
        let mut out = Vec::new();
        let mut i = 0usize;
        loop {
            let v = start + step * i as f64;
            if v > stop * (1.0 + 1e-12) {
                break;
            }
            out.push(v);
            i += 1;
        }
        out
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(anyhow::Error::from))
            .collect::<anyhow::Result<_>>()?
    };
    if grid.is_empty() || !(grid[0] > 0.0) || grid.windows(2).any(|w| w[0] >= w[1]) {
        bail!("grid from {spec:?} must be positive and strictly ascending");
    }
    Ok(grid)
}
