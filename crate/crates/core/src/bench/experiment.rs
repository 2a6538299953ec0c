//! Replicated experiments with persisted, resumable results.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::datasets::{load_splits, DatasetKind, Splits};
use crate::bench::io::{write_atomic, write_json_atomic};
use crate::bench::results::ResultsTable;
use crate::data::synthetic::SyntheticConfig;
use crate::data::{partition, PartitionConfig, TabularDataset};
use crate::engine::{evaluate, run_training, Algorithm, Evaluation, TrainConfig, TrainTrace};
use crate::fairness::MetricKind;
use crate::rng::rng_from;
use crate::{Error, Result};

/// Accuracy slack, in percentage points, when choosing a hyperparameter
/// (FairFed's beta, FedGFT's lambda) from a grid.
pub const SELECTION_ACCURACY_SLACK: f64 = 2.0;
/// Share of the training set held out for hyperparameter selection.
pub const SELECTION_VALIDATION_FRACTION: f64 = 0.2;

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_replications() -> usize {
    1
}

fn default_metrics() -> Vec<MetricKind> {
    vec![MetricKind::StatisticalParity, MetricKind::EqualOpportunity]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    pub partition: PartitionConfig,
    pub train: TrainConfig,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_metrics")]
    pub metrics_to_report: Vec<MetricKind>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Seed of the fixed train/test split (COMPAS, synthetic).
    #[serde(default)]
    pub split_seed: u64,
    /// Candidate FairFed betas; empty means use `train.fairfed_beta` as is.
    #[serde(default)]
    pub fairfed_beta_grid: Vec<f64>,
    /// Candidate FedGFT lambdas; empty means use `train.penalty.lambda` as is.
    #[serde(default)]
    pub fedgft_lambda_grid: Vec<f64>,
    #[serde(default)]
    pub synthetic: SyntheticConfig,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.partition.num_clients != self.train.num_clients {
            return Err(Error::InvalidConfig(format!(
                "partition has {} clients but training expects {}",
                self.partition.num_clients, self.train.num_clients
            )));
        }
        for (name, grid) in [
            ("fairfed betas", &self.fairfed_beta_grid),
            ("fedgft lambdas", &self.fedgft_lambda_grid),
        ] {
            if grid.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::InvalidConfig(format!("{name} must be nonnegative")));
            }
        }
        self.partition.validate()?;
        self.train.validate()
    }

    /// Seed shared by the partition and training of replication `r` (1-based).
    pub fn replication_seed(&self, r: usize) -> u64 {
        self.train.seed.wrapping_add(r as u64)
    }

    /// Everything that determines a replication's outcome.
    fn fingerprint(&self) -> serde_json::Value {
        let mut c = self.clone();
        c.replications = 0;
        c.output_dir = None;
        serde_json::to_value(c).expect("config serializes")
    }
}

/// Grid candidates for one hyperparameter and their validation scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSelection {
    pub chosen: f64,
    /// `(value, accuracy, bias)` on the validation split.
    pub candidates: Vec<(f64, f64, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub replication: usize,
    pub seed: u64,
    pub evaluation: Evaluation,
    #[serde(default)]
    pub fairfed: Option<GridSelection>,
    #[serde(default)]
    pub fedgft: Option<GridSelection>,
    #[serde(default)]
    pub warnings: Vec<String>,
    config: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub table: ResultsTable,
    pub replications: Vec<ReplicationResult>,
    /// Traces of replications run in this call; resumed ones are on disk.
    pub traces: Vec<(usize, TrainTrace)>,
}

/// Notes on protocol choices, written into `meta.json`.
const PROTOCOL_NOTES: &[&str] = &[
    "bias values are the configured fairness metric on the pooled test set, in percent",
    "replication r re-partitions and trains with seed = train.seed + r",
    "FairFed beta and FedGFT lambda grids: train on 80% of the training set for each candidate, keep those within 2 accuracy points of the best on the held-out 20%, pick the lowest bias",
    "FairFed clients train with local reweighing weights",
    "COMPAS uses one fixed 80/20 split chosen by split_seed",
];

fn split_validation(train: &TabularDataset, seed: u64) -> Result<(TabularDataset, TabularDataset)> {
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut rng_from(seed, &[0xFA1F]));
    let n_val = (SELECTION_VALIDATION_FRACTION * train.len() as f64).round() as usize;
    let (val, fit) = order.split_at(n_val);
    Ok((train.subset(fit)?, train.subset(val)?))
}

/// Picks a hyperparameter from `grid` on a held-out part of `train`: among
/// candidates within [`SELECTION_ACCURACY_SLACK`] points of the best
/// validation accuracy, the one with the lowest validation bias.
pub fn select_on_validation(
    train: &TabularDataset,
    partition_config: &PartitionConfig,
    train_config: &TrainConfig,
    grid: &[f64],
    apply: impl Fn(&mut TrainConfig, f64),
) -> Result<Option<GridSelection>> {
    if grid.is_empty() {
        return Ok(None);
    }
    let (fit, val) = split_validation(train, train_config.seed)?;
    let shards = partition(&fit, partition_config)?;
    let metric = train_config.penalty.metric;
    let candidates = grid
        .iter()
        .map(|&value| {
            let mut cfg = train_config.clone();
            apply(&mut cfg, value);
            let out = run_training(&shards, &val, &cfg)?;
            let e = evaluate(&out.model, &val)?;
            Ok((value, e.accuracy, e.metric(metric)))
        })
        .collect::<Result<Vec<_>>>()?;
    let best_acc = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let chosen = candidates
        .iter()
        .filter(|c| c.1 >= best_acc - SELECTION_ACCURACY_SLACK)
        .min_by(|x, y| {
            let bx = x.2.unwrap_or(f64::INFINITY);
            let by = y.2.unwrap_or(f64::INFINITY);
            bx.total_cmp(&by)
        })
        .map(|c| c.0)
        .expect("the best candidate is always within the slack");
    Ok(Some(GridSelection { chosen, candidates }))
}

/// Picks FairFed's beta on a held-out part of `train`.
pub fn select_fairfed_beta(
    train: &TabularDataset,
    partition_config: &PartitionConfig,
    train_config: &TrainConfig,
    grid: &[f64],
) -> Result<Option<GridSelection>> {
    select_on_validation(train, partition_config, train_config, grid, |c, v| {
        c.fairfed_beta = v
    })
}

/// Picks FedGFT's penalty strength on a held-out part of `train`.
pub fn select_fedgft_lambda(
    train: &TabularDataset,
    partition_config: &PartitionConfig,
    train_config: &TrainConfig,
    grid: &[f64],
) -> Result<Option<GridSelection>> {
    select_on_validation(train, partition_config, train_config, grid, |c, v| {
        c.penalty.lambda = v
    })
}

fn run_replication(
    config: &ExperimentConfig,
    splits: &Splits,
    r: usize,
) -> Result<(ReplicationResult, TrainTrace)> {
    let seed = config.replication_seed(r);
    let pcfg = PartitionConfig {
        seed,
        ..config.partition
    };
    let mut tcfg = TrainConfig {
        seed,
        ..config.train.clone()
    };
    let shards = partition(&splits.train, &pcfg)?;
    let mut fairfed = None;
    let mut fedgft = None;
    match tcfg.algorithm {
        Algorithm::FairFed => {
            fairfed = select_fairfed_beta(&splits.train, &pcfg, &tcfg, &config.fairfed_beta_grid)?;
            if let Some(sel) = &fairfed {
                tcfg.fairfed_beta = sel.chosen;
            }
        }
        Algorithm::FedGft => {
            fedgft = select_fedgft_lambda(&splits.train, &pcfg, &tcfg, &config.fedgft_lambda_grid)?;
            if let Some(sel) = &fedgft {
                tcfg.penalty.lambda = sel.chosen;
            }
        }
        _ => {}
    }
    let out = run_training(&shards, &splits.test, &tcfg)?;
    let evaluation = evaluate(&out.model, &splits.test)?;
    Ok((
        ReplicationResult {
            replication: r,
            seed,
            evaluation,
            fairfed,
            fedgft,
            warnings: out.warnings,
            config: config.fingerprint(),
        },
        out.trace,
    ))
}

fn rep_path(dir: &Path, r: usize) -> PathBuf {
    dir.join(format!("rep_r{r}.json"))
}

fn load_completed(config: &ExperimentConfig, r: usize) -> Option<ReplicationResult> {
    let dir = config.output_dir.as_ref()?;
    let text = std::fs::read_to_string(rep_path(dir, r)).ok()?;
    let rep: ReplicationResult = serde_json::from_str(&text).ok()?;
    (rep.config == config.fingerprint() && dir.join(format!("trace_r{r}.csv")).exists())
        .then_some(rep)
}

/// Mean and standard error of accuracy and each reported metric.
pub fn summarize(config: &ExperimentConfig, reps: &[ReplicationResult]) -> ResultsTable {
    let alg = config.train.algorithm.name();
    let alpha = config.partition.concentration;
    let mut table = ResultsTable::default();
    let acc: Vec<f64> = reps.iter().map(|r| r.evaluation.accuracy).collect();
    table.push(alg, alpha, "accuracy", &acc);
    for &m in &config.metrics_to_report {
        let vals: Vec<f64> = reps.iter().filter_map(|r| r.evaluation.metric(m)).collect();
        if vals.len() < reps.len() {
            log::warn!(
                "{}: undefined in {} replication(s)",
                m.short_name(),
                reps.len() - vals.len()
            );
        }
        table.push(alg, alpha, m.short_name(), &vals);
    }
    table
}

/// Runs every replication (in parallel), persists per-replication results
/// and traces as they finish, then writes `summary.csv` and `meta.json`.
///
/// With an output directory, replications already on disk for the same
/// configuration are loaded instead of rerun.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let splits = load_splits(
        config.dataset,
        &config.data_dir,
        config.split_seed,
        &config.synthetic,
    )?;
    run_experiment_on(config, &splits)
}

/// [`run_experiment`] on already loaded splits.
pub fn run_experiment_on(config: &ExperimentConfig, splits: &Splits) -> Result<ExperimentOutcome> {
    config.validate()?;
    let results: Vec<Result<(ReplicationResult, Option<TrainTrace>)>> = (1..=config.replications)
        .into_par_iter()
        .map(|r| {
            if let Some(done) = load_completed(config, r) {
                log::info!("replication {r}: loaded from disk");
                return Ok((done, None));
            }
            let (rep, trace) = run_replication(config, splits, r)?;
            if let Some(dir) = &config.output_dir {
                write_atomic(
                    &dir.join(format!("trace_r{r}.csv")),
                    trace.to_csv_string()?.as_bytes(),
                )?;
                write_json_atomic(&rep_path(dir, r), &rep)?;
            }
            Ok((rep, Some(trace)))
        })
        .collect();

    let mut reps = Vec::with_capacity(results.len());
    let mut traces = Vec::new();
    for res in results {
        let (rep, trace) = res?;
        if let Some(t) = trace {
            traces.push((rep.replication, t));
        }
        reps.push(rep);
    }
    let table = summarize(config, &reps);

    if let Some(dir) = &config.output_dir {
        write_atomic(&dir.join("summary.csv"), table.to_csv_string()?.as_bytes())?;
        let warnings: Vec<&String> = reps.iter().flat_map(|r| &r.warnings).collect();
        let fairfed: Vec<_> = reps.iter().filter_map(|r| r.fairfed.as_ref()).collect();
        let fedgft: Vec<_> = reps.iter().filter_map(|r| r.fedgft.as_ref()).collect();
        let meta = serde_json::json!({
            "config": config,
            "train_rows": splits.train.len(),
            "test_rows": splits.test.len(),
            "dropped_rows": splits.dropped_rows,
            "features": splits.train.feature_names,
            "protocol": PROTOCOL_NOTES,
            "fairfed_selection": fairfed,
            "fedgft_selection": fedgft,
            "warnings": warnings,
        });
        write_json_atomic(&dir.join("meta.json"), &meta)?;
    }
    Ok(ExperimentOutcome {
        table,
        replications: reps,
        traces,
    })
}
