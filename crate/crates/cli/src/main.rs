//! Command-line front end for the federated fairness simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fedgft_core::bench::{
    ablation, load_splits, parse_sweep, partition_stats, run_experiment, theorem_checks,
    write_atomic, write_json_atomic, ExperimentConfig,
};
use fedgft_core::data::partition;
use fedgft_core::fairness::MetricKind;

#[derive(Parser)]
#[command(
    name = "fedgft",
    version,
    about = "Federated training with global fairness penalties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Sp,
    Eop,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Sp => MetricKind::StatisticalParity,
            MetricArg::Eop => MetricKind::EqualOpportunity,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides `replications` from the config.
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Repeat an experiment over values of one hyperparameter.
    Ablation {
        #[arg(long)]
        config: PathBuf,
        /// `param=v1,v2,...` with param one of epochs, lambda,
        /// learning_rate, num_clients, regularizer.
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Randomized checks of the fairness identities; exits with 2 on failure.
    Theorems {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Per-client (A, Y) tables and the heterogeneity coefficient of a partition.
    PartitionStats {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "sp")]
        metric: MetricArg,
        /// Write the client-to-row assignment as JSON.
        #[arg(long)]
        dump_partition: Option<PathBuf>,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json_file(path)
        .with_context(|| format!("reading config {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            output_dir,
            replications,
        } => {
            let mut cfg = load_config(&config)?;
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            if let Some(r) = replications {
                cfg.replications = r;
            }
            let out = run_experiment(&cfg)?;
            print!("{}", out.table.to_csv_string()?);
        }
        Command::Ablation {
            config,
            sweep,
            output_dir,
        } => {
            let mut cfg = load_config(&config)?;
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            let (param, values) = parse_sweep(&sweep)?;
            let out = ablation(&cfg, param, &values)?;
            print!("{}", out.to_csv_string()?);
        }
        Command::Theorems {
            trials,
            seed,
            output,
        } => {
            anyhow::ensure!(trials >= 1, "--trials must be at least 1");
            let report = theorem_checks(seed, trials);
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(path) = output {
                write_json_atomic(&path, &report)?;
            }
            if !report.passed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::PartitionStats {
            config,
            metric,
            dump_partition,
        } => {
            let cfg = load_config(&config)?;
            cfg.partition.validate()?;
            let splits = load_splits(cfg.dataset, &cfg.data_dir, cfg.split_seed, &cfg.synthetic)?;
            let shards = partition(&splits.train, &cfg.partition)?;
            let stats = partition_stats(&shards, metric.into())?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
            if let Some(path) = dump_partition {
                let manifest: Vec<_> = shards
                    .iter()
                    .map(|s| serde_json::json!({ "client_id": s.client_id, "weight": s.weight, "indices": s.indices }))
                    .collect();
                let text = serde_json::to_vec_pretty(&manifest)?;
                write_atomic(&path, &text)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
