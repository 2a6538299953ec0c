//! One-parameter sweeps over an experiment configuration.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::datasets::load_splits;
use crate::bench::experiment::{run_experiment_on, ExperimentConfig};
use crate::bench::io::write_atomic;
use crate::bench::results::ResultsTable;
use crate::fairness::Regularizer;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Epochs,
    Lambda,
    LearningRate,
    NumClients,
    Regularizer,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Epochs => "epochs",
            SweepParam::Lambda => "lambda",
            SweepParam::LearningRate => "learning_rate",
            SweepParam::NumClients => "num_clients",
            SweepParam::Regularizer => "regularizer",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &ExperimentConfig, value: &str) -> Result<ExperimentConfig> {
        let bad = || Error::InvalidConfig(format!("bad value `{value}` for {}", self.name()));
        let mut cfg = base.clone();
        match self {
            SweepParam::Epochs => cfg.train.local_epochs = value.parse().map_err(|_| bad())?,
            SweepParam::Lambda => {
                cfg.train.penalty.lambda = value.parse().map_err(|_| bad())?;
                // a swept lambda must not be replaced by grid selection
                cfg.fedgft_lambda_grid.clear();
            }
            SweepParam::LearningRate => {
                cfg.train.learning_rate = value.parse().map_err(|_| bad())?
            }
            SweepParam::NumClients => {
                let k: usize = value.parse().map_err(|_| bad())?;
                cfg.train.num_clients = k;
                cfg.partition.num_clients = k;
            }
            SweepParam::Regularizer => {
                cfg.train.penalty.regularizer = match value.to_ascii_lowercase().as_str() {
                    "l1" => Regularizer::L1,
                    "l2" => Regularizer::L2,
                    _ => return Err(bad()),
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepParam::Epochs,
            SweepParam::Lambda,
            SweepParam::LearningRate,
            SweepParam::NumClients,
            SweepParam::Regularizer,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| Error::InvalidConfig(format!("cannot sweep `{s}`")))
    }
}

/// Parses `param=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> Result<(SweepParam, Vec<String>)> {
    let (param, values) = spec
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("sweep `{spec}` is not param=v1,v2,...")))?;
    let values: Vec<String> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(String::from)
        .collect();
    if values.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "sweep `{spec}` lists no values"
        )));
    }
    Ok((param.trim().parse()?, values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub param: String,
    pub value: String,
    pub algorithm: String,
    pub alpha: f64,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub replications: usize,
}

#[derive(Debug, Clone)]
pub struct AblationOutcome {
    pub tables: Vec<(String, ResultsTable)>,
    pub rows: Vec<AblationRow>,
}

impl AblationOutcome {
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Runs one experiment per value with the base seeds. Each value writes
/// into `output_dir/{param}={value}`; the long table goes to
/// `output_dir/ablation.csv`.
pub fn ablation(
    base: &ExperimentConfig,
    param: SweepParam,
    values: &[String],
) -> Result<AblationOutcome> {
    base.validate()?;
    let splits = load_splits(
        base.dataset,
        &base.data_dir,
        base.split_seed,
        &base.synthetic,
    )?;
    let mut tables = Vec::new();
    let mut rows = Vec::new();
    for value in values {
        let mut cfg = param.apply(base, value)?;
        cfg.output_dir = base
            .output_dir
            .as_ref()
            .map(|d| d.join(format!("{}={value}", param.name())));
        let table = run_experiment_on(&cfg, &splits)?.table;
        rows.extend(table.rows.iter().map(|r| AblationRow {
            param: param.name().to_string(),
            value: value.clone(),
            algorithm: r.algorithm.clone(),
            alpha: r.alpha,
            metric: r.metric.clone(),
            mean: r.mean,
            stderr: r.stderr,
            replications: r.replications,
        }));
        tables.push((value.clone(), table));
    }
    let out = AblationOutcome { tables, rows };
    if let Some(dir) = &base.output_dir {
        write_atomic(&dir.join("ablation.csv"), out.to_csv_string()?.as_bytes())?;
    }
    Ok(out)
}
