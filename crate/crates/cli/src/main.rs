use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dynsampler::bench::Family;
use dynsampler::resample_engine::RoundMode;
use dynsampler_cli::{
    cmd_bench, cmd_regime, cmd_sample, cmd_verify, CliError, CliResult, ExperimentConfig,
};

/// Dynamic exact sampling from graphical models under update streams.
///
/// Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 round budget
/// exceeded, 4 verification failed, 5 regime not satisfied.
#[derive(Parser)]
#[command(name = "dynsampler", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Seq,
    Par,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Chain,
    Ising,
    Hardcore,
}

#[derive(Args)]
struct Common {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Update stream file (JSON list); omitted means no updates.
    #[arg(long)]
    updates: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Round budget per update; defaults to 1000·(1 + log₂(1 + |R₀|)).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "seq")]
    mode: Mode,
    #[arg(long, hide = true)]
    boundary_kappa_one: bool,
}

impl Common {
    fn config(self, trials: u64, out: Option<PathBuf>) -> ExperimentConfig {
        ExperimentConfig {
            model: self.model,
            updates: self.updates,
            seed: self.seed,
            trials,
            budget: self.budget,
            mode: match self.mode {
                Mode::Seq => RoundMode::Sequential,
                Mode::Par => RoundMode::Parallel,
            },
            out,
            boundary_kappa_one: self.boundary_kappa_one,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Repair one sample through the update stream; writes trace.csv and
    /// final_config.json into --out.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Record wall-clock time per update (makes trace.csv nondeterministic).
        #[arg(long)]
        wallclock: bool,
    },
    /// Check the sampler against exact enumeration; prints a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of sampled outputs and of conditional-check runs.
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
        /// Tolerance on the output distribution's TVD.
        #[arg(long, default_value_t = 0.015)]
        tol: f64,
        /// Tolerance on every conditional-check bucket.
        #[arg(long, default_value_t = 0.05)]
        bucket_tol: f64,
    },
    /// Print the sufficient-condition report for a model.
    Regime {
        #[arg(long)]
        model: PathBuf,
        /// Slack of the soft condition for generic factor graphs.
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
    },
    /// Sweep update sizes on a model family; prints CSV.
    Bench {
        #[arg(long, value_enum)]
        family: FamilyName,
        #[arg(long)]
        n: usize,
        /// Soft-condition slack for the chain family.
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        /// Comma-separated update sizes.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget: Option<u64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sample {
            common,
            out,
            wallclock,
        } => cmd_sample(&common.config(1, Some(out)), wallclock),
        Command::Verify {
            common,
            out,
            samples,
            tol,
            bucket_tol,
        } => {
            let (json, passed) = cmd_verify(&common.config(1, out), samples, tol, bucket_tol)?;
            println!("{json}");
            if passed {
                Ok(())
            } else {
                Err(CliError::VerificationFailed)
            }
        }
        Command::Regime { model, delta } => {
            let (json, satisfied) = cmd_regime(&model, delta)?;
            println!("{json}");
            if satisfied {
                Ok(())
            } else {
                Err(CliError::RegimeNotSatisfied)
            }
        }
        Command::Bench {
            family,
            n,
            delta,
            ks,
            trials,
            seed,
            budget,
            out,
        } => {
            let family = match family {
                FamilyName::Chain => Family::Chain { n, delta },
                FamilyName::Ising => Family::Ising { n },
                FamilyName::Hardcore => Family::Hardcore { n },
            };
            let csv = cmd_bench(&family, &ks, trials, seed, budget)?;
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| CliError::Other(format!("{}: {e}", path.display()))),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dynsampler: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
