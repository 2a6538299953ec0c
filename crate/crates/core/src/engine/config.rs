use serde::{Deserialize, Serialize};

use crate::fairness::{MetricKind, PenaltyConfig, Regularizer};
use crate::model::OptimizerKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "fedavg")]
    FedAvg,
    #[serde(rename = "lrw")]
    Lrw,
    #[serde(rename = "fairfed")]
    FairFed,
    #[serde(rename = "fedgft")]
    FedGft,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::FedAvg,
        Algorithm::Lrw,
        Algorithm::FairFed,
        Algorithm::FedGft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FedAvg => "fedavg",
            Algorithm::Lrw => "lrw",
            Algorithm::FairFed => "fairfed",
            Algorithm::FedGft => "fedgft",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm `{s}`")))
    }
}

fn default_penalty() -> PenaltyConfig {
    PenaltyConfig::new(0.0, Regularizer::L1, MetricKind::StatisticalParity)
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub rounds: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub num_clients: usize,
    /// Share of clients sampled each round; `ceil(fraction * K)` participate.
    #[serde(default = "one")]
    pub client_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Fairness penalty; only FedGFT trains with it, but its metric also
    /// drives the signed fairness value recorded in traces.
    #[serde(default = "default_penalty")]
    pub penalty: PenaltyConfig,
    #[serde(default = "one")]
    pub fairfed_beta: f64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
}

impl TrainConfig {
    /// Hyperparameters of the tabular benchmarks.
    pub fn benchmark(algorithm: Algorithm) -> Self {
        TrainConfig {
            rounds: 20,
            local_epochs: 1,
            batch_size: 256,
            learning_rate: 0.002,
            num_clients: 10,
            client_fraction: 1.0,
            seed: 0,
            algorithm,
            penalty: default_penalty(),
            fairfed_beta: 1.0,
            optimizer: OptimizerKind::Adam,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, v) in [
            ("rounds", self.rounds),
            ("local_epochs", self.local_epochs),
            ("batch_size", self.batch_size),
            ("num_clients", self.num_clients),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.client_fraction > 0.0 && self.client_fraction <= 1.0) {
            return bad(format!(
                "client_fraction must lie in (0, 1], got {}",
                self.client_fraction
            ));
        }
        if !(self.fairfed_beta >= 0.0 && self.fairfed_beta.is_finite()) {
            return bad(format!(
                "fairfed_beta must be nonnegative, got {}",
                self.fairfed_beta
            ));
        }
        self.penalty.validate()
    }

    /// Number of clients sampled per round.
    pub fn clients_per_round(&self) -> usize {
        ((self.client_fraction * self.num_clients as f64).ceil() as usize)
            .clamp(1, self.num_clients)
    }

    /// Penalty actually applied during training: the configured one for
    /// FedGFT, a zero-strength copy otherwise.
    pub fn effective_penalty(&self) -> PenaltyConfig {
        match self.algorithm {
            Algorithm::FedGft => self.penalty,
            _ => PenaltyConfig {
                lambda: 0.0,
                ..self.penalty
            },
        }
    }
}
