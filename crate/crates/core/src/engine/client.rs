//! Work done on a single client: local training, reweighing, and the
//! summary statistics it shares with the server.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{CellProbs, ClientShard, Sample};
use crate::engine::config::TrainConfig;
use crate::fairness::{fairness_component_gradient, fairness_stats, MetricKind, StatsMode};
use crate::model::{loss_gradient, ModelParams, Optimizer};
use crate::rng::rng_from;
use crate::{Error, Result};

/// Fairness term `coefficient * F_k` added to the local objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessTerm {
    /// `lambda * C` for the current round.
    pub coefficient: f64,
    pub metric: MetricKind,
    pub pooled_b: f64,
    pub pooled_d: f64,
}

/// Algorithm-specific inputs to [`client_update`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ClientExtras<'a> {
    pub fairness: Option<FairnessTerm>,
    /// One weight per shard sample, in shard order.
    pub sample_weights: Option<&'a [f64]>,
}

/// Runs `local_epochs` of mini-batch training from `params` on `shard`.
///
/// Batches come from a fresh shuffle each epoch, seeded by
/// `(seed, round, client_id)`. Every call starts a new optimizer state.
pub fn client_update(
    params: &ModelParams,
    shard: &ClientShard,
    config: &TrainConfig,
    extras: &ClientExtras<'_>,
    round: usize,
) -> Result<ModelParams> {
    if shard.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if let Some(w) = extras.sample_weights {
        if w.len() != shard.len() {
            return Err(Error::DimensionMismatch {
                expected: shard.len(),
                actual: w.len(),
            });
        }
    }
    let fairness = extras.fairness.filter(|t| t.coefficient != 0.0);
    let mut theta = params.clone();
    let mut optimizer = Optimizer::new(config.optimizer, theta.len(), config.learning_rate);
    let mut rng = rng_from(config.seed, &[round as u64, shard.client_id as u64]);
    let mut order: Vec<usize> = (0..shard.len()).collect();
    let cap = config.batch_size.min(shard.len());
    let mut batch: Vec<&Sample> = Vec::with_capacity(cap);
    let mut batch_weights: Vec<f64> = Vec::with_capacity(cap);

    for _ in 0..config.local_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| &shard.samples[i]));
            let weights = extras.sample_weights.map(|w| {
                batch_weights.clear();
                batch_weights.extend(chunk.iter().map(|&i| w[i]));
                batch_weights.as_slice()
            });
            let mut grad = loss_gradient(&theta, &batch, weights)?;
            if let Some(term) = fairness {
                let fg = fairness_component_gradient(
                    &theta,
                    &batch,
                    term.metric,
                    term.pooled_b,
                    term.pooled_d,
                )?;
                grad.axpy(term.coefficient, &fg);
            }
            optimizer.step(&mut theta, &grad);
        }
    }
    Ok(theta)
}

/// Reweighing weights `P(A=a) P(Y=y) / P(A=a, Y=y)`, scaled to mean 1.
pub fn lrw_weights(shard: &ClientShard) -> Vec<f64> {
    let cells = CellProbs::of_samples(&shard.samples);
    let cell_weight = |a: usize, y: usize| cells.group(a) * cells.label(y) / cells.p[a][y];
    let raw: Vec<f64> = shard
        .samples
        .iter()
        .map(|s| {
            let (a, y) = s.cell();
            cell_weight(a, y)
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len().max(1) as f64;
    raw.into_iter().map(|w| w / mean).collect()
}

/// Everything a client reveals to the server about its data: the two
/// numerators under the current model, the two model-free denominators, and
/// its sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClientSummary {
    pub a: f64,
    pub c: f64,
    pub b: f64,
    pub d: f64,
    pub n: usize,
}

pub fn client_summary(
    params: &ModelParams,
    shard: &ClientShard,
    metric: MetricKind,
    mode: StatsMode,
) -> Result<ClientSummary> {
    let st = fairness_stats(params, &shard.samples, metric, mode)?;
    Ok(ClientSummary {
        a: st.a,
        c: st.c,
        b: st.b,
        d: st.d,
        n: shard.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::{generate, SyntheticConfig};
    use crate::engine::config::Algorithm;
    use crate::model::OptimizerKind;

    fn shard_of(samples: Vec<Sample>) -> ClientShard {
        ClientShard {
            client_id: 0,
            indices: (0..samples.len()).collect(),
            samples,
            weight: 1.0,
        }
    }

    fn synthetic_shard(n: usize) -> ClientShard {
        let ds = generate(&SyntheticConfig {
            n_samples: n,
            ..Default::default()
        })
        .unwrap();
        ClientShard::whole(&ds)
    }

    fn cell_samples(counts: [[usize; 2]; 2]) -> Vec<Sample> {
        let mut out = Vec::new();
        for (a, row) in counts.iter().enumerate() {
            for (y, &n) in row.iter().enumerate() {
                for _ in 0..n {
                    out.push(Sample::new(vec![0.0], a as u8, y as u8).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn reweighing_example() {
        let shard = shard_of(cell_samples([[4, 1], [1, 4]]));
        let w = lrw_weights(&shard);
        // raw weights: 0.625 on the diagonal cells, 2.5 off it; mean is 1
        let raw_mean = (8.0 * 0.625 + 2.0 * 2.5) / 10.0;
        assert!((w[4] - 2.5 / raw_mean).abs() < 1e-12);
        assert!((w[0] - 0.625 / raw_mean).abs() < 1e-12);
        assert!((w.iter().sum::<f64>() / 10.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reweighing_independent_and_pure() {
        let indep = lrw_weights(&shard_of(cell_samples([[2, 2], [3, 3]])));
        assert!(indep.iter().all(|w| (w - 1.0).abs() < 1e-12));
        let pure = lrw_weights(&shard_of(cell_samples([[3, 7], [0, 0]])));
        assert!(pure.iter().all(|w| (w - 1.0).abs() < 1e-12));
    }

    #[test]
    fn update_leaves_input_untouched_and_is_deterministic() {
        let shard = synthetic_shard(300);
        let cfg = TrainConfig {
            batch_size: 32,
            ..TrainConfig::benchmark(Algorithm::FedAvg)
        };
        let p = ModelParams::zeros(5);
        let a = client_update(&p, &shard, &cfg, &ClientExtras::default(), 3).unwrap();
        let b = client_update(&p, &shard, &cfg, &ClientExtras::default(), 3).unwrap();
        assert_eq!(p, ModelParams::zeros(5));
        assert_eq!(a, b);
        let c = client_update(&p, &shard, &cfg, &ClientExtras::default(), 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_full_batch_is_one_step() {
        let shard = synthetic_shard(100);
        let cfg = TrainConfig {
            batch_size: 1000,
            learning_rate: 0.1,
            optimizer: OptimizerKind::Sgd,
            ..TrainConfig::benchmark(Algorithm::FedAvg)
        };
        let p = ModelParams::from_flat(vec![0.1, -0.2, 0.3, 0.0, 0.5, 0.05]);
        let got = client_update(&p, &shard, &cfg, &ClientExtras::default(), 0).unwrap();
        let mut want = p.clone();
        want.axpy(-0.1, &loss_gradient(&p, &shard.samples, None).unwrap());
        for (x, y) in got.as_slice().iter().zip(want.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_coefficient_matches_plain_update() {
        let shard = synthetic_shard(200);
        let cfg = TrainConfig {
            batch_size: 16,
            ..TrainConfig::benchmark(Algorithm::FedGft)
        };
        let p = ModelParams::zeros(5);
        let extras = ClientExtras {
            fairness: Some(FairnessTerm {
                coefficient: 0.0,
                metric: MetricKind::StatisticalParity,
                pooled_b: 0.5,
                pooled_d: 0.5,
            }),
            sample_weights: None,
        };
        assert_eq!(
            client_update(&p, &shard, &cfg, &extras, 1).unwrap(),
            client_update(&p, &shard, &cfg, &ClientExtras::default(), 1).unwrap()
        );
    }

    #[test]
    fn fairness_term_on_pure_group_shard() {
        let samples: Vec<Sample> = synthetic_shard(200)
            .samples
            .into_iter()
            .filter(|s| s.sensitive == 0)
            .collect();
        let shard = shard_of(samples);
        let cfg = TrainConfig::benchmark(Algorithm::FedGft);
        let extras = ClientExtras {
            fairness: Some(FairnessTerm {
                coefficient: 5.0,
                metric: MetricKind::StatisticalParity,
                pooled_b: 0.5,
                pooled_d: 0.5,
            }),
            sample_weights: None,
        };
        let out = client_update(&ModelParams::zeros(5), &shard, &cfg, &extras, 0).unwrap();
        assert!(out.is_finite());
        // a positive coefficient pushes group-0 scores down
        assert!(out.bias() < 0.0);
    }

    #[test]
    fn summary_matches_stats() {
        let shard = synthetic_shard(120);
        let p = ModelParams::from_flat(vec![0.3, 0.1, -0.2, 0.0, 0.4, 0.0]);
        let s = client_summary(
            &p,
            &shard,
            MetricKind::StatisticalParity,
            StatsMode::Surrogate,
        )
        .unwrap();
        assert_eq!(s.n, 120);
        assert!((s.b + s.d - 1.0).abs() < 1e-12);
    }
}
