use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ClientShard, TabularDataset};
use crate::engine::client::{
    client_summary, client_update, lrw_weights, ClientExtras, ClientSummary, FairnessTerm,
};
use crate::engine::config::{Algorithm, TrainConfig};
use crate::engine::eval::evaluate;
use crate::engine::probe::penalized_gradient;
use crate::engine::server::{
    aggregate, const_from_summaries, fairfed_weights, pooled_denominators, restrict_weights,
};
use crate::engine::trace::{RoundRecord, TrainTrace};
use crate::fairness::{local_fairness, FairnessStats, StatsMode};
use crate::model::ModelParams;
use crate::rng::rng_from;
use crate::{Error, Result};

/// Server view at the end of a round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundState {
    pub round: usize,
    pub params: ModelParams,
    pub selected: Vec<usize>,
    /// FedGFT constant used during this round; zero for other algorithms.
    pub c_theta: f64,
    /// Aggregation weights aligned with `selected`.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: ModelParams,
    pub trace: TrainTrace,
    pub final_state: RoundState,
    /// Conditions worth surfacing in run metadata.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
struct Flags {
    fairfed_undefined_local: bool,
}

fn select_clients(config: &TrainConfig, round: usize) -> Vec<usize> {
    let k = config.num_clients;
    let m = config.clients_per_round();
    if m == k {
        return (0..k).collect();
    }
    let mut rng = rng_from(config.seed, &[0x5E1EC7, round as u64]);
    let mut chosen = sample(&mut rng, k, m).into_vec();
    chosen.sort_unstable();
    chosen
}

fn ensure_finite(params: &ModelParams, round: usize) -> Result<()> {
    if params.is_finite() {
        Ok(())
    } else {
        Err(Error::DivergedTraining(round))
    }
}

/// FairFed's global value and per-client local values under `params`,
/// from hard statistics of the selected clients.
fn fairfed_inputs(
    params: &ModelParams,
    shards: &[ClientShard],
    selected: &[usize],
    weights: &[f64],
    config: &TrainConfig,
    pooled: (f64, f64),
) -> Result<(f64, Vec<Option<f64>>)> {
    let metric = config.penalty.metric;
    let summaries: Vec<ClientSummary> = selected
        .iter()
        .map(|&k| client_summary(params, &shards[k], metric, StatsMode::Hard))
        .collect::<Result<_>>()?;
    let local = summaries
        .iter()
        .map(|s| local_fairness(&FairnessStats::new(s.a, s.b, s.c, s.d, metric)))
        .collect();
    let signed: f64 = summaries
        .iter()
        .zip(weights)
        .map(|(s, w)| w * (s.a / pooled.0 - s.c / pooled.1))
        .sum();
    Ok((signed.abs(), local))
}

/// Runs `config.rounds` rounds of federated training from the zero model.
///
/// Each round records the training loss and penalized-gradient norm on the
/// shards and the accuracy and bias of the new global model on `test`.
pub fn run_training(
    shards: &[ClientShard],
    test: &TabularDataset,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if shards.len() != config.num_clients {
        return Err(Error::InvalidConfig(format!(
            "partition has {} clients but num_clients is {}",
            shards.len(),
            config.num_clients
        )));
    }
    if let Some(k) = shards.iter().position(|s| s.is_empty()) {
        return Err(Error::InvalidConfig(format!("client {k} has no samples")));
    }
    let base_weights: Vec<f64> = shards.iter().map(|s| s.weight).collect();
    let penalty = config.effective_penalty();
    let pooled = pooled_denominators(shards, &base_weights, penalty.metric)?;
    let sample_weights: Option<Vec<Vec<f64>>> =
        matches!(config.algorithm, Algorithm::Lrw | Algorithm::FairFed)
            .then(|| shards.iter().map(lrw_weights).collect());

    let mut params = ModelParams::zeros(test.input_dim());
    let mut trace = TrainTrace::default();
    let mut flags = Flags::default();
    let mut state = None;

    for round in 1..=config.rounds {
        let selected = select_clients(config, round);
        let weights = restrict_weights(&base_weights, &selected);

        let mut fairness = None;
        let mut c_theta = 0.0;
        if config.algorithm == Algorithm::FedGft {
            let summaries: Vec<ClientSummary> = selected
                .iter()
                .map(|&k| client_summary(&params, &shards[k], penalty.metric, StatsMode::Surrogate))
                .collect::<Result<_>>()?;
            let cu = const_from_summaries(&summaries, &weights, pooled.0, pooled.1, &penalty)?;
            c_theta = cu.c_theta;
            fairness = Some(FairnessTerm {
                coefficient: penalty.lambda * cu.c_theta,
                metric: penalty.metric,
                pooled_b: pooled.0,
                pooled_d: pooled.1,
            });
        }
        let fairfed = if config.algorithm == Algorithm::FairFed {
            Some(fairfed_inputs(
                &params, shards, &selected, &weights, config, pooled,
            )?)
        } else {
            None
        };

        let updates: Vec<ModelParams> = selected
            .par_iter()
            .map(|&k| {
                let extras = ClientExtras {
                    fairness,
                    sample_weights: sample_weights.as_ref().map(|w| w[k].as_slice()),
                };
                client_update(&params, &shards[k], config, &extras, round)
            })
            .collect::<Result<_>>()?;

        let agg_weights = match fairfed {
            Some((global, local)) => {
                if local.iter().any(Option::is_none) {
                    flags.fairfed_undefined_local = true;
                }
                fairfed_weights(global, &local, &weights, config.fairfed_beta)
            }
            None => weights,
        };
        params = aggregate(&updates, &agg_weights)?;
        ensure_finite(&params, round)?;

        let probe = penalized_gradient(&params, shards, &base_weights, &penalty)?;
        let eval = evaluate(&params, test)?;
        trace.records.push(RoundRecord {
            round,
            loss: probe.loss,
            acc: eval.accuracy,
            sp: eval.sp,
            eop: eval.eop,
            grad_norm: probe.norm(),
            signed_f: probe.signed,
        });
        log::debug!(
            "{} round {round}: loss {:.4} acc {:.2} sp {:?}",
            config.algorithm.name(),
            probe.loss,
            eval.accuracy,
            eval.sp
        );
        state = Some(RoundState {
            round,
            params: params.clone(),
            selected,
            c_theta,
            weights: agg_weights,
        });
    }

    let mut warnings = Vec::new();
    if flags.fairfed_undefined_local {
        warnings.push(
            "fairfed: some clients hold a single group; their local fairness was treated as equal to the global value"
                .to_string(),
        );
    }
    Ok(TrainOutcome {
        model: params,
        trace,
        final_state: state.expect("rounds is positive"),
        warnings,
    })
}
