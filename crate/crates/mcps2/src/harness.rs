//! Monte Carlo harness: sweeps over the measurement count m, runs trials in
//! parallel, and writes reproducible reports.
//!
//! Reproducibility contract: every trial's RNG seed is derived from the
//! experiment's base seed, the stream (main or pilot), m, and the trial
//! index, so re-running an experiment regenerates the identical instances
//! regardless of thread count or machine — `rows.csv` is byte-identical
//! across runs. Wall-clock measurements go to `timings.csv`, which is the
//! one deliberately non-reproducible file.
//!
//! Two experiment families:
//!
//! * **Condition rate** — for each instance, sweep the λ grid and record
//!   whether any grid point satisfies the full support-recovery certificate
//!   of each method (the Lasso's sign + dual conditions; the concave
//!   penalty's sign bound + positive separation margin).
//! * **Recovery** — run the ADMM solvers at a per-method λ chosen on a small
//!   held-out pilot set, and score exact sign recovery of the estimates.

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{line_chart, Series};
use crate::conditions::{lambda_feasible_range, CertFamily, Hyperparams};
use crate::metrics::score_recovery;
use crate::problem::{generate_instance, Ensemble, GeneratorConfig, ProblemInstance};
use crate::solvers::{admm_lasso, admm_mcps2, SolverResult};
use crate::{Error, Result};

/// The two estimators under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mcps2,
    Lasso,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Mcps2, Method::Lasso];

    pub fn id(self) -> &'static str {
        match self {
            Method::Mcps2 => "mcps2",
            Method::Lasso => "lasso",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mcps2" => Ok(Method::Mcps2),
            "lasso" => Ok(Method::Lasso),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }

    fn cert_family(self) -> CertFamily {
        match self {
            Method::Mcps2 => CertFamily::Mcps2,
            Method::Lasso => CertFamily::Lasso,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.id())
    }
}

/// Full description of a sweep experiment. Serialized verbatim into the
/// report directory as `config.echo`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub d: f64,
    /// Planted magnitudes are uniform on this range (times a fair-coin
    /// sign), as fractions of nothing — absolute values, bounded by d.
    pub magnitude_range: (f64, f64),
    pub noise_inf_bound: f64,
    pub m_values: Vec<usize>,
    pub trials_per_m: usize,
    pub base_seed: u64,
    pub lambda_grid: Vec<f64>,
    /// Coordinates with |estimate| above this threshold count as selected.
    pub support_tau: f64,
    /// Held-out trials per (method, λ, m) used to pick the recovery λ.
    pub pilot_trials: usize,
}

impl ExperimentConfig {
    /// The reference sweep: n = 100, k = 5, d = 1, magnitudes uniform on
    /// [0.5, 1], noise-free, m from 10 to 100, 200 trials per m.
    pub fn reference(trials_per_m: usize) -> Self {
        ExperimentConfig {
            n: 100,
            k: 5,
            d: 1.0,
            magnitude_range: (0.5, 1.0),
            noise_inf_bound: 0.0,
            m_values: (1..=10).map(|i| 10 * i).collect(),
            trials_per_m,
            base_seed: 7,
            lambda_grid: crate::conditions::default_lambda_grid(),
            support_tau: 0.25,
            pilot_trials: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() {
            return Err(Error::Config("m_values must be nonempty".into()));
        }
        if self.trials_per_m == 0 {
            return Err(Error::Config("trials_per_m must be positive".into()));
        }
        if self.pilot_trials == 0 {
            return Err(Error::Config("pilot_trials must be positive".into()));
        }
        if self.lambda_grid.is_empty()
            || !(self.lambda_grid[0] > 0.0)
            || self.lambda_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config(
                "lambda grid must be nonempty, positive, and strictly ascending".into(),
            ));
        }
        if !(self.support_tau >= 0.0) {
            return Err(Error::Config("support_tau must be nonnegative".into()));
        }
        // Shape constraints are delegated to the generator; validate them
        // here for the smallest m so failures surface before any work runs.
        self.generator(*self.m_values.iter().min().unwrap(), 0).validate()
    }

    fn generator(&self, m: usize, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            n: self.n,
            m,
            k: self.k,
            d: self.d,
            magnitude_range: self.magnitude_range,
            noise_inf_bound: self.noise_inf_bound,
            rng_seed: seed,
            ensemble: Ensemble::GaussianInvM,
        }
    }
}

/// splitmix64 finalizer; full-strength mixing for seed derivation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed stream for scored trials.
pub const STREAM_MAIN: u64 = 0;
/// Seed stream for the held-out pilot trials that pick λ; disjoint from the
/// main stream so tuning never sees scored instances.
pub const STREAM_PILOT: u64 = 1;

/// Derives the instance seed for one trial. Both methods receive the same
/// seed at the same (m, trial), so comparisons are paired.
pub fn derive_trial_seed(base_seed: u64, stream: u64, m: usize, trial: usize) -> u64 {
    let mut h = splitmix64(base_seed);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ (m as u64));
    h = splitmix64(h ^ (trial as u64));
    h
}

/// One (instance, method) outcome of the condition-rate experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct CondRateRow {
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    /// Some grid point satisfied the method's full certificate.
    pub success: bool,
    /// Smallest passing λ, when one exists.
    pub first_lambda: Option<f64>,
    /// Irrepresentability constant of the instance (NaN when the support
    /// block is numerically rank-deficient).
    pub irr: f64,
    pub mu: f64,
}

/// One (instance, method) outcome of the recovery experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryRow {
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub lambda: f64,
    pub signs_exact: bool,
    pub support_exact: bool,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    pub linf_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-(m, method) success aggregate.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub m: usize,
    pub method: Method,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
}

/// Wall-clock bucket; the one non-reproducible output.
#[derive(Clone, Debug)]
pub struct TimingRow {
    pub m: usize,
    pub label: String,
    pub seconds_total: f64,
}

/// λ chosen by the pilot phase for one (m, method).
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaChoice {
    pub m: usize,
    pub method: Method,
    pub lambda: f64,
    pub pilot_rate: f64,
}

pub struct CondRateOutcome {
    pub config: ExperimentConfig,
    pub rows: Vec<CondRateRow>,
    pub summary: Vec<SummaryRow>,
    pub timings: Vec<TimingRow>,
}

pub struct RecoveryOutcome {
    pub config: ExperimentConfig,
    pub lambda_choices: Vec<LambdaChoice>,
    pub rows: Vec<RecoveryRow>,
    pub summary: Vec<SummaryRow>,
    pub timings: Vec<TimingRow>,
}

/// Sweeps the λ grid per instance and records, for each method, whether any
/// grid point satisfies its full support-recovery certificate.
pub fn run_condition_rate_experiment(cfg: &ExperimentConfig) -> Result<CondRateOutcome> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.m_values.len() * cfg.trials_per_m * 2);
    let mut timings = Vec::new();
    for &m in &cfg.m_values {
        let started = Instant::now();
        let per_trial: Vec<Result<[CondRateRow; 2]>> = (0..cfg.trials_per_m)
            .into_par_iter()
            .map(|trial| {
                let seed = derive_trial_seed(cfg.base_seed, STREAM_MAIN, m, trial);
                let inst = generate_instance(&cfg.generator(m, seed))?;
                condition_rate_rows(cfg, &inst, m, trial, seed)
            })
            .collect();
        for pair in per_trial {
            rows.extend(pair?);
        }
        timings.push(TimingRow {
            m,
            label: "sweep".into(),
            seconds_total: started.elapsed().as_secs_f64(),
        });
    }
    let summary = aggregate_cond_rate(&rows);
    Ok(CondRateOutcome {
        config: cfg.clone(),
        rows,
        summary,
        timings,
    })
}

fn condition_rate_rows(
    cfg: &ExperimentConfig,
    inst: &ProblemInstance,
    m: usize,
    trial: usize,
    seed: u64,
) -> Result<[CondRateRow; 2]> {
    let irr = match crate::conditions::irr_constant(&inst.a, &inst.support) {
        Ok(irr) => irr,
        // A numerically rank-deficient support block certifies nothing.
        Err(Error::RankDeficient { .. }) => f64::NAN,
        Err(other) => return Err(other),
    };
    let mut out = Vec::with_capacity(2);
    for method in Method::ALL {
        let (success, first_lambda) = if irr.is_nan() {
            (false, None)
        } else {
            let sweep = lambda_feasible_range(inst, method.cert_family(), &cfg.lambda_grid)?;
            let first = sweep.iter().find(|&&(_, pass)| pass).map(|&(l, _)| l);
            (first.is_some(), first)
        };
        out.push(CondRateRow {
            m,
            trial,
            seed,
            method,
            success,
            first_lambda,
            irr,
            mu: inst.mu,
        });
    }
    Ok([out.remove(0), out.remove(0)])
}

/// Runs the solvers at pilot-tuned λ values and scores exact sign recovery.
pub fn run_recovery_experiment(cfg: &ExperimentConfig) -> Result<RecoveryOutcome> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.m_values.len() * cfg.trials_per_m * 2);
    let mut lambda_choices = Vec::new();
    let mut timings = Vec::new();
    for &m in &cfg.m_values {
        let pilot_started = Instant::now();
        let pilot: Vec<ProblemInstance> = (0..cfg.pilot_trials)
            .map(|t| {
                let seed = derive_trial_seed(cfg.base_seed, STREAM_PILOT, m, t);
                generate_instance(&cfg.generator(m, seed))
            })
            .collect::<Result<_>>()?;
        let mut chosen = [0.0f64; 2];
        for (slot, method) in Method::ALL.into_iter().enumerate() {
            let (lambda, pilot_rate) = pilot_select_lambda(cfg, method, &pilot)?;
            chosen[slot] = lambda;
            lambda_choices.push(LambdaChoice {
                m,
                method,
                lambda,
                pilot_rate,
            });
        }
        timings.push(TimingRow {
            m,
            label: "pilot".into(),
            seconds_total: pilot_started.elapsed().as_secs_f64(),
        });

        let per_trial: Vec<Result<[(RecoveryRow, f64); 2]>> = (0..cfg.trials_per_m)
            .into_par_iter()
            .map(|trial| {
                let seed = derive_trial_seed(cfg.base_seed, STREAM_MAIN, m, trial);
                let inst = generate_instance(&cfg.generator(m, seed))?;
                let mut out = Vec::with_capacity(2);
                for (slot, method) in Method::ALL.into_iter().enumerate() {
                    let lambda = chosen[slot];
                    let solved = run_method(method, &inst, lambda, cfg.n)?;
                    let score = score_recovery(&inst, &solved.x_hat, cfg.support_tau)?;
                    out.push((
                        RecoveryRow {
                            m,
                            trial,
                            seed,
                            method,
                            lambda,
                            signs_exact: score.signs_exact,
                            support_exact: score.support_exact,
                            false_positive_rate: score.false_positive_rate,
                            false_negative_rate: score.false_negative_rate,
                            linf_error: score.linf_error,
                            iterations: solved.iterations,
                            converged: solved.converged,
                        },
                        solved.runtime_seconds,
                    ));
                }
                Ok([out.remove(0), out.remove(0)])
            })
            .collect();

        let mut solver_seconds = [0.0f64; 2];
        for pair in per_trial {
            for (slot, (row, seconds)) in pair?.into_iter().enumerate() {
                solver_seconds[slot] += seconds;
                rows.push(row);
            }
        }
        for (slot, method) in Method::ALL.into_iter().enumerate() {
            timings.push(TimingRow {
                m,
                label: method.id().into(),
                seconds_total: solver_seconds[slot],
            });
        }
    }
    let summary = aggregate_recovery(&rows);
    Ok(RecoveryOutcome {
        config: cfg.clone(),
        lambda_choices,
        rows,
        summary,
        timings,
    })
}

fn run_method(
    method: Method,
    inst: &ProblemInstance,
    lambda: f64,
    n: usize,
) -> Result<SolverResult> {
    let hp = Hyperparams::new(lambda, n);
    match method {
        Method::Mcps2 => admm_mcps2(&inst.a, &inst.y, inst.d, &hp, None),
        Method::Lasso => admm_lasso(&inst.a, &inst.y, inst.d, &hp, None),
    }
}

/// Grid point with the best pilot sign-recovery rate; ties go to the
/// smallest λ.
fn pilot_select_lambda(
    cfg: &ExperimentConfig,
    method: Method,
    pilot: &[ProblemInstance],
) -> Result<(f64, f64)> {
    let rates: Vec<f64> = cfg
        .lambda_grid
        .par_iter()
        .map(|&lambda| -> Result<f64> {
            let mut wins = 0usize;
            for inst in pilot {
                let solved = run_method(method, inst, lambda, cfg.n)?;
                if score_recovery(inst, &solved.x_hat, cfg.support_tau)?.signs_exact {
                    wins += 1;
                }
            }
            Ok(wins as f64 / pilot.len() as f64)
        })
        .collect::<Result<_>>()?;
    let best = argmax_first(&rates);
    Ok((cfg.lambda_grid[best], rates[best]))
}

/// Index of the maximum, preferring the earliest on ties.
fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn aggregate(items: impl Iterator<Item = (usize, Method, bool)>) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for (m, method, success) in items {
        match out.iter_mut().find(|r| r.m == m && r.method == method) {
            Some(r) => {
                r.trials += 1;
                r.successes += success as usize;
            }
            None => out.push(SummaryRow {
                m,
                method,
                trials: 1,
                successes: success as usize,
                rate: 0.0,
            }),
        }
    }
    for r in &mut out {
        r.rate = r.successes as f64 / r.trials as f64;
    }
    out
}

pub fn aggregate_cond_rate(rows: &[CondRateRow]) -> Vec<SummaryRow> {
    aggregate(rows.iter().map(|r| (r.m, r.method, r.success)))
}

/// Success for the recovery experiment is exact sign recovery.
pub fn aggregate_recovery(rows: &[RecoveryRow]) -> Vec<SummaryRow> {
    aggregate(rows.iter().map(|r| (r.m, r.method, r.signs_exact)))
}

const COND_RATE_HEADER: &str = "m,trial,seed,method,success,first_lambda,irr,mu";
const RECOVERY_HEADER: &str = "m,trial,seed,method,lambda,signs_exact,support_exact,\
                               false_positive_rate,false_negative_rate,linf_error,iterations,converged";
const SUMMARY_HEADER: &str = "m,method,trials,successes,rate";
const TIMINGS_HEADER: &str = "m,label,seconds_total";
const LAMBDA_CHOICES_HEADER: &str = "m,method,lambda,pilot_rate";

fn bool01(b: bool) -> u8 {
    b as u8
}

fn cond_rate_csv(rows: &[CondRateRow]) -> String {
    let mut s = String::from(COND_RATE_HEADER);
    s.push('\n');
    for r in rows {
        let first = r.first_lambda.map(|l| l.to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.m,
            r.trial,
            r.seed,
            r.method,
            bool01(r.success),
            first,
            r.irr,
            r.mu
        ));
    }
    s
}

fn recovery_csv(rows: &[RecoveryRow]) -> String {
    let mut s = String::from(RECOVERY_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.m,
            r.trial,
            r.seed,
            r.method,
            r.lambda,
            bool01(r.signs_exact),
            bool01(r.support_exact),
            r.false_positive_rate,
            r.false_negative_rate,
            r.linf_error,
            r.iterations,
            bool01(r.converged)
        ));
    }
    s
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.m, r.method, r.trials, r.successes, r.rate
        ));
    }
    s
}

fn timings_csv(rows: &[TimingRow]) -> String {
    let mut s = String::from(TIMINGS_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.m, r.label, r.seconds_total));
    }
    s
}

fn lambda_choices_csv(rows: &[LambdaChoice]) -> String {
    let mut s = String::from(LAMBDA_CHOICES_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.m, r.method, r.lambda, r.pilot_rate));
    }
    s
}

fn rate_chart(summary: &[SummaryRow], title: &str) -> String {
    let series: Vec<Series> = Method::ALL
        .into_iter()
        .zip(["#1f77b4", "#ff7f0e"])
        .map(|(method, color)| Series {
            name: method.id().to_string(),
            color,
            points: summary
                .iter()
                .filter(|r| r.method == method)
                .map(|r| (r.m as f64, r.rate))
                .collect(),
        })
        .collect();
    line_chart(title, "measurements m", "success rate", &series)
}

/// Writes `rows.csv`, `summary.csv`, `timings.csv`, `config.echo`, and
/// `success_rate.svg` into `dir` (created if needed).
pub fn write_condition_rate_report(out: &CondRateOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("rows.csv"), cond_rate_csv(&out.rows))?;
    fs::write(dir.join("summary.csv"), summary_csv(&out.summary))?;
    fs::write(dir.join("timings.csv"), timings_csv(&out.timings))?;
    fs::write(
        dir.join("config.echo"),
        serde_json::to_string_pretty(&out.config)? + "\n",
    )?;
    fs::write(
        dir.join("success_rate.svg"),
        rate_chart(&out.summary, "certificate success rate"),
    )?;
    Ok(())
}

/// Same as [`write_condition_rate_report`], plus `lambda_choices.csv`.
pub fn write_recovery_report(out: &RecoveryOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("rows.csv"), recovery_csv(&out.rows))?;
    fs::write(dir.join("summary.csv"), summary_csv(&out.summary))?;
    fs::write(dir.join("timings.csv"), timings_csv(&out.timings))?;
    fs::write(dir.join("lambda_choices.csv"), lambda_choices_csv(&out.lambda_choices))?;
    fs::write(
        dir.join("config.echo"),
        serde_json::to_string_pretty(&out.config)? + "\n",
    )?;
    fs::write(
        dir.join("success_rate.svg"),
        rate_chart(&out.summary, "exact sign recovery rate"),
    )?;
    Ok(())
}

struct CsvReader {
    lines: Vec<String>,
}

impl CsvReader {
    fn open(path: &Path, header: &str) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        let normalized = |s: &str| s.replace(char::is_whitespace, "");
        match lines.next() {
            Some(first) if normalized(first) == normalized(header) => {}
            other => {
                return Err(Error::Parse(format!(
                    "{}: expected header {header:?}, found {other:?}",
                    path.display()
                )))
            }
        }
        Ok(CsvReader {
            lines: lines.map(str::to_string).collect(),
        })
    }
}

fn field<'a>(parts: &'a [&str], idx: usize, line_no: usize) -> Result<&'a str> {
    parts
        .get(idx)
        .copied()
        .ok_or_else(|| Error::Parse(format!("line {line_no}: missing field {idx}")))
}

fn parse_num<T: std::str::FromStr>(s: &str, line_no: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line_no}: bad {what} {s:?}")))
}

fn parse_bool01(s: &str, line_no: usize) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse(format!("line {line_no}: bad flag {other:?}"))),
    }
}

pub fn read_cond_rate_rows(path: &Path) -> Result<Vec<CondRateRow>> {
    let reader = CsvReader::open(path, COND_RATE_HEADER)?;
    let mut out = Vec::with_capacity(reader.lines.len());
    for (i, line) in reader.lines.iter().enumerate() {
        let line_no = i + 2;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 8 {
            return Err(Error::Parse(format!(
                "line {line_no}: expected 8 fields, found {}",
                parts.len()
            )));
        }
        let first = field(&parts, 5, line_no)?;
        out.push(CondRateRow {
            m: parse_num(field(&parts, 0, line_no)?, line_no, "m")?,
            trial: parse_num(field(&parts, 1, line_no)?, line_no, "trial")?,
            seed: parse_num(field(&parts, 2, line_no)?, line_no, "seed")?,
            method: Method::parse(field(&parts, 3, line_no)?)?,
            success: parse_bool01(field(&parts, 4, line_no)?, line_no)?,
            first_lambda: if first.is_empty() {
                None
            } else {
                Some(parse_num(first, line_no, "first_lambda")?)
            },
            irr: parse_num(field(&parts, 6, line_no)?, line_no, "irr")?,
            mu: parse_num(field(&parts, 7, line_no)?, line_no, "mu")?,
        });
    }
    Ok(out)
}

pub fn read_recovery_rows(path: &Path) -> Result<Vec<RecoveryRow>> {
    let reader = CsvReader::open(path, RECOVERY_HEADER)?;
    let mut out = Vec::with_capacity(reader.lines.len());
    for (i, line) in reader.lines.iter().enumerate() {
        let line_no = i + 2;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 12 {
            return Err(Error::Parse(format!(
                "line {line_no}: expected 12 fields, found {}",
                parts.len()
            )));
        }
        out.push(RecoveryRow {
            m: parse_num(field(&parts, 0, line_no)?, line_no, "m")?,
            trial: parse_num(field(&parts, 1, line_no)?, line_no, "trial")?,
            seed: parse_num(field(&parts, 2, line_no)?, line_no, "seed")?,
            method: Method::parse(field(&parts, 3, line_no)?)?,
            lambda: parse_num(field(&parts, 4, line_no)?, line_no, "lambda")?,
            signs_exact: parse_bool01(field(&parts, 5, line_no)?, line_no)?,
            support_exact: parse_bool01(field(&parts, 6, line_no)?, line_no)?,
            false_positive_rate: parse_num(field(&parts, 7, line_no)?, line_no, "fp rate")?,
            false_negative_rate: parse_num(field(&parts, 8, line_no)?, line_no, "fn rate")?,
            linf_error: parse_num(field(&parts, 9, line_no)?, line_no, "linf error")?,
            iterations: parse_num(field(&parts, 10, line_no)?, line_no, "iterations")?,
            converged: parse_bool01(field(&parts, 11, line_no)?, line_no)?,
        });
    }
    Ok(out)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let reader = CsvReader::open(path, SUMMARY_HEADER)?;
    let mut out = Vec::with_capacity(reader.lines.len());
    for (i, line) in reader.lines.iter().enumerate() {
        let line_no = i + 2;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Parse(format!(
                "line {line_no}: expected 5 fields, found {}",
                parts.len()
            )));
        }
        out.push(SummaryRow {
            m: parse_num(field(&parts, 0, line_no)?, line_no, "m")?,
            method: Method::parse(field(&parts, 1, line_no)?)?,
            trials: parse_num(field(&parts, 2, line_no)?, line_no, "trials")?,
            successes: parse_num(field(&parts, 3, line_no)?, line_no, "successes")?,
            rate: parse_num(field(&parts, 4, line_no)?, line_no, "rate")?,
        });
    }
    Ok(out)
}
