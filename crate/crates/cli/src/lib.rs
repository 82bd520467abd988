//! Command implementations behind the `dynsampler` binary.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 parse error,
//! 3 round budget exceeded, 4 verification failed, 5 regime not satisfied.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use dynsampler::bench::{bench, rows_to_csv, Family};
use dynsampler::convergence::{
    check_hardcore_regime, check_ising_regime, check_potts_regime, check_soft_condition,
    RegimeReport,
};
use dynsampler::factor_graph::UpdateRequest;
use dynsampler::io::{parse_model, parse_updates, ModelSpec, Update};
use dynsampler::oracle::{
    conditional_gibbs_test, exact_gibbs, multinomial_noise, EmpiricalDistribution, MIN_BUCKET,
};
use dynsampler::resample_engine::{EngineOptions, KappaRule, RoundMode, TraceStats};
use dynsampler::rng::RngStream;
use dynsampler::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_REGIME: i32 = 5;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Budget(String),
    VerificationFailed,
    RegimeNotSatisfied,
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::VerificationFailed => EXIT_VERIFY,
            CliError::RegimeNotSatisfied => EXIT_REGIME,
            CliError::Other(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Budget(m) => write!(f, "{m}"),
            CliError::VerificationFailed => write!(f, "verification failed"),
            CliError::RegimeNotSatisfied => write!(f, "regime condition not satisfied"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_budget_exceeded() {
            CliError::Budget(e.to_string())
        } else {
            match e {
                Error::Parse(m) => CliError::Parse(m),
                other => CliError::Other(other.to_string()),
            }
        }
    }
}

fn io_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Other(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = Result<T, CliError>;

/// Settings shared by the commands that run the sampler.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: PathBuf,
    pub updates: Option<PathBuf>,
    pub seed: u64,
    pub trials: u64,
    pub budget: Option<u64>,
    pub mode: RoundMode,
    pub out: Option<PathBuf>,
    /// Forces `κ = 1` on boundary constraints. Only meaningful as a
    /// negative control.
    pub boundary_kappa_one: bool,
}

impl ExperimentConfig {
    pub fn new(model: impl Into<PathBuf>) -> Self {
        Self {
            model: model.into(),
            updates: None,
            seed: 0,
            trials: 1,
            budget: None,
            mode: RoundMode::Sequential,
            out: None,
            boundary_kappa_one: false,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.trials == 0 {
            return Err(CliError::Parse("trials must be at least 1".into()));
        }
        if self.budget == Some(0) {
            return Err(CliError::Parse("budget must be at least 1".into()));
        }
        Ok(())
    }

    pub fn engine_options(&self) -> EngineOptions {
        EngineOptions {
            mode: self.mode,
            kappa: if self.boundary_kappa_one {
                KappaRule::BoundaryForcedToOne
            } else {
                KappaRule::Exact
            },
            budget: self.budget,
            record_potential: false,
        }
    }

    fn load(&self) -> CliResult<(ModelSpec, Vec<Update>)> {
        let text = fs::read_to_string(&self.model)
            .map_err(|e| CliError::Parse(format!("{}: {e}", self.model.display())))?;
        let model = parse_model(&text)?;
        let updates = match &self.updates {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
                parse_updates(&model, &text)?
            }
            None => Vec::new(),
        };
        Ok((model, updates))
    }
}

/// The same stream on the equivalent factor graph, for the generic engine.
fn to_factor_stream(model: &ModelSpec, updates: &[Update]) -> CliResult<(ModelSpec, Vec<Update>)> {
    let mut current = model.clone();
    let mut converted = Vec::with_capacity(updates.len());
    for u in updates {
        converted.push(Update::FactorGraph(current.factor_update(u)?));
        current = current.apply_update(u)?;
    }
    Ok((ModelSpec::FactorGraph(model.to_factor_graph()), converted))
}

#[derive(Debug, Serialize)]
struct TraceRow {
    update_index: usize,
    iterations: u64,
    var_resamples: u64,
    coin_flips: u64,
    wallclock_ns: u128,
}

impl TraceRow {
    fn new(update_index: usize, stats: &TraceStats, wallclock_ns: u128) -> Self {
        Self {
            update_index,
            iterations: stats.iterations,
            var_resamples: stats.variable_resamples,
            coin_flips: stats.coin_flips,
            wallclock_ns,
        }
    }
}

fn write_trace(path: &Path, rows: &[TraceRow]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| io_error(path, e))?;
    w.write_record([
        "update_index",
        "iterations",
        "var_resamples",
        "coin_flips",
        "wallclock_ns",
    ])
    .map_err(|e| io_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

/// Draws an exact initial sample from the seed, threads it through the
/// update stream and writes `trace.csv` and `final_config.json` into the
/// output directory. On a budget overrun the rows so far, including the
/// partial row of the failing update, are still written.
pub fn cmd_sample(config: &ExperimentConfig, wallclock: bool) -> CliResult<()> {
    config.validate()?;
    let (mut model, mut updates) = config.load()?;
    if config.boundary_kappa_one {
        (model, updates) = to_factor_stream(&model, &updates)?;
    }
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    let opts = config.engine_options();
    let root = RngStream::new(config.seed);
    let mut x = model.bootstrap_sample(&root.split("initial", 0), &opts)?;
    let engine = root.split("engine", 0);
    let mut rows = Vec::with_capacity(updates.len());
    let mut failure = None;
    for (i, update) in updates.iter().enumerate() {
        let start = Instant::now();
        match model.step(update, x.clone(), &engine.split("update", i as u64), &opts) {
            Ok((next, y, stats)) => {
                let ns = if wallclock {
                    start.elapsed().as_nanos()
                } else {
                    0
                };
                rows.push(TraceRow::new(i, &stats, ns));
                model = next;
                x = y;
            }
            Err(Error::BudgetExceeded(partial)) => {
                let ns = if wallclock {
                    start.elapsed().as_nanos()
                } else {
                    0
                };
                rows.push(TraceRow::new(i, &partial.stats, ns));
                failure = Some(CliError::Budget(format!(
                    "update {i} exceeded the budget of {} rounds",
                    partial.stats.iterations
                )));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_trace(&out.join("trace.csv"), &rows)?;
    write_file(
        &out.join("final_config.json"),
        &serde_json::to_string(x.values()).expect("configuration serializes"),
    )?;
    failure.map_or(Ok(()), Err)
}

#[derive(Debug, Serialize)]
pub struct RoundCheck {
    pub round: u64,
    pub buckets: usize,
    pub skipped_buckets: usize,
    pub max_tvd: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub samples: u64,
    pub states: usize,
    pub tvd: f64,
    pub noise: f64,
    pub tolerance: f64,
    pub bucket_tolerance: f64,
    pub conditional: Vec<RoundCheck>,
}

/// Compares `samples` outputs of the update stream with enumeration, then
/// runs the conditional-Gibbs check on the first update after rounds 1..3.
/// Without updates the compared samples come from the build-up sampler.
pub fn verify(
    config: &ExperimentConfig,
    samples: u64,
    tolerance: f64,
    bucket_tolerance: f64,
) -> CliResult<VerifyReport> {
    config.validate()?;
    if samples == 0 {
        return Err(CliError::Parse("samples must be at least 1".into()));
    }
    let (mut model, mut updates) = config.load()?;
    if config.boundary_kappa_one {
        (model, updates) = to_factor_stream(&model, &updates)?;
    }
    let opts = config.engine_options();
    let root = RngStream::new(config.seed);

    let initial = exact_gibbs(&model.to_factor_graph())?.sampler()?;
    let final_model = updates
        .iter()
        .try_fold(model.clone(), |m, u| m.apply_update(u))?;
    let target = exact_gibbs(&final_model.to_factor_graph())?;
    let indexer = target.indexer();
    let run = |i: u64| -> CliResult<usize> {
        let trial = root.split("trial", i);
        let x = if updates.is_empty() {
            model.bootstrap_sample(&trial.split("initial", 0), &opts)?
        } else {
            let x0 = initial.sample(&mut trial.split("initial", 0).rng());
            model
                .run_updates(x0, &updates, &trial.split("engine", 0), &opts)?
                .1
        };
        Ok(indexer.index(x.into_values()))
    };
    let finals: Vec<usize> = match config.mode {
        RoundMode::Parallel => (0..samples)
            .into_par_iter()
            .map(run)
            .collect::<CliResult<_>>()?,
        RoundMode::Sequential => (0..samples).map(run).collect::<CliResult<_>>()?,
    };
    let emp = EmpiricalDistribution::from_indices(target.len(), finals);
    let tvd = emp.tvd_to(&target.probs)?;
    let support = target.probs.iter().filter(|p| **p > 0.0).count();

    let mut conditional = Vec::new();
    if let Some(first) = updates.first() {
        let pre = model.to_factor_graph();
        let request: UpdateRequest = model.factor_update(first)?;
        for t in 1..=3 {
            let rep = conditional_gibbs_test(
                &pre,
                &request,
                samples,
                t,
                MIN_BUCKET,
                &root.split("conditional", t),
                &opts,
            )?;
            conditional.push(RoundCheck {
                round: t,
                buckets: rep.buckets.len(),
                skipped_buckets: rep.skipped_buckets,
                max_tvd: rep.max_tvd,
                passed: rep.passes(bucket_tolerance),
            });
        }
    }
    Ok(VerifyReport {
        passed: tvd <= tolerance && conditional.iter().all(|c| c.passed),
        samples,
        states: target.len(),
        tvd,
        noise: multinomial_noise(support, samples),
        tolerance,
        bucket_tolerance,
        conditional,
    })
}

/// Runs [`verify`] and returns the report JSON (also written to `--out`
/// when given) with the pass flag; a failed check maps to exit code 4.
pub fn cmd_verify(
    config: &ExperimentConfig,
    samples: u64,
    tolerance: f64,
    bucket_tolerance: f64,
) -> CliResult<(String, bool)> {
    let report = verify(config, samples, tolerance, bucket_tolerance)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = &config.out {
        write_file(path, &json)?;
    }
    Ok((json, report.passed))
}

pub fn regime_report(model: &ModelSpec, delta: f64) -> CliResult<RegimeReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::Parse("delta must lie in (0, 1)".into()));
    }
    Ok(match model {
        ModelSpec::FactorGraph(m) => check_soft_condition(m, delta),
        ModelSpec::Ising(m) => check_ising_regime(m),
        ModelSpec::Potts(m) => check_potts_regime(m),
        ModelSpec::Hardcore(m) => check_hardcore_regime(m),
    })
}

/// Returns the report JSON; the caller prints it and exits with 5 when the
/// condition fails.
pub fn cmd_regime(model: &Path, delta: f64) -> CliResult<(String, bool)> {
    let text = fs::read_to_string(model)
        .map_err(|e| CliError::Parse(format!("{}: {e}", model.display())))?;
    let report = regime_report(&parse_model(&text)?, delta)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    Ok((json, report.satisfied))
}

pub fn cmd_bench(
    family: &Family,
    ks: &[usize],
    trials: u64,
    seed: u64,
    budget: Option<u64>,
) -> CliResult<String> {
    if trials == 0 {
        return Err(CliError::Parse("trials must be at least 1".into()));
    }
    if ks.is_empty() {
        return Err(CliError::Parse(
            "at least one update size is required".into(),
        ));
    }
    let opts = EngineOptions {
        budget,
        ..EngineOptions::default()
    };
    let rows = bench(family, ks, trials, &RngStream::new(seed), &opts)?;
    Ok(rows_to_csv(&rows))
}
