use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use strike::commands;
use strike::config::{Overrides, RunConfig};
use strike::synth::{FixtureKind, FixtureParams};
use strike::{CliError, CliResult, Threaded};
use strike_core::cmi::{SummaryMethod, DEFAULT_BINS};

#[derive(Parser)]
#[command(name = "strike", version, about = "Feature-group-aware stacking for binary tabular classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration JSON. Flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads. Affects wall time only.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    overrides: Overrides,
}

impl RunArgs {
    fn load(&self) -> CliResult<(RunConfig, Threaded)> {
        let cfg = RunConfig::load(self.config.as_deref(), &self.overrides)?;
        Ok((cfg, Threaded::new(self.workers)))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a model bundle and write its evaluation report.
    Train(RunArgs),
    /// Score a CSV with a trained bundle.
    Predict {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compute held-out metrics of a bundle on a labelled CSV.
    Evaluate {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Write metrics JSON here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare grouping strategies by meta-learner CV AUC.
    AblateGroups {
        #[command(flatten)]
        run: RunArgs,
        /// Seeds of the random round-robin partitions.
        #[arg(long, value_delimiter = ',', default_values_t = commands::DEFAULT_ABLATION_SEEDS)]
        seeds: Vec<u64>,
    },
    /// Compare meta-learner kinds by CV AUC.
    AblateMeta(RunArgs),
    /// Monolithic learners vs orthodox stacking vs group-aware stacking.
    Benchmark(RunArgs),
    /// Conditional mutual information between feature groups given the label.
    Cmi {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value = "oof-logit")]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
    },
    /// Write a synthetic fixture (data.csv and groups.json).
    Synth {
        #[arg(long, value_enum)]
        kind: FixtureKind,
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        groups: usize,
        #[arg(long, default_value_t = 12)]
        features_per_group: usize,
        #[arg(long)]
        output_dir: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Method {
    OofLogit,
    FirstPc,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train(args) => {
            let (cfg, exec) = args.load()?;
            let out = commands::run_train(&cfg, &exec)?;
            println!(
                "meta cv auc {:.4} +/- {:.4}; bundle written to {}",
                out.report.eval.meta.cv_auc_mean,
                out.report.eval.meta.cv_auc_std,
                out.bundle_path.display()
            );
        }
        Command::Predict {
            bundle,
            input,
            output,
        } => {
            let probs = commands::run_predict(&bundle, &input, &output)?;
            println!("{} rows scored to {}", probs.len(), output.display());
        }
        Command::Evaluate {
            bundle,
            input,
            output,
        } => {
            let report = commands::run_evaluate(&bundle, &input, output.as_deref())?;
            if output.is_none() {
                let text = serde_json::to_string_pretty(&report)
                    .map_err(|e| CliError::runtime(e.to_string()))?;
                println!("{text}");
            }
        }
        Command::AblateGroups { run, seeds } => {
            let (cfg, exec) = run.load()?;
            for r in commands::run_ablate_groups(&cfg, &seeds, &exec)? {
                let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
                println!("{:<12} {:>4} {:.4}", r.strategy, seed, r.meta_cv_auc);
            }
        }
        Command::AblateMeta(args) => {
            let (cfg, exec) = args.load()?;
            for r in commands::run_ablate_meta(&cfg, &exec)? {
                println!("{:<16} {:.4} +/- {:.4}", r.meta.name(), r.cv_auc_mean, r.cv_auc_std);
            }
        }
        Command::Benchmark(args) => {
            let (cfg, exec) = args.load()?;
            for r in commands::run_benchmark(&cfg, &exec)? {
                println!("{:<18} {:.4} +/- {:.4}", r.model, r.cv_auc_mean, r.cv_auc_std);
            }
        }
        Command::Cmi { run, method, bins } => {
            let (cfg, exec) = run.load()?;
            let method = match method {
                Method::OofLogit => SummaryMethod::OofLogit,
                Method::FirstPc => SummaryMethod::FirstPc,
            };
            let m = commands::run_cmi(&cfg, method, bins, &exec)?;
            println!("off-diagonal mean {:.6} nats", m.off_diagonal_mean);
        }
        Command::Synth {
            kind,
            n,
            seed,
            groups,
            features_per_group,
            output_dir,
        } => {
            let params = FixtureParams {
                n,
                seed,
                groups,
                features_per_group,
            };
            commands::run_synth(kind, &params, &output_dir)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
