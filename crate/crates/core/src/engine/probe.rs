//! Full-data gradient of the penalized global objective
//! `sum_k w_k L_k(theta) + lambda * J(|sum_k w_k F_k(theta)|)`.

use crate::data::ClientShard;
use crate::engine::server::{const_update, pooled_denominators};
use crate::fairness::{component_value, fairness_component_gradient, PenaltyConfig};
use crate::model::{batch_loss, loss_gradient, ModelParams};
use crate::{Error, Result};

/// Objective value, its gradient, and the signed surrogate fairness at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientProbe {
    pub objective: f64,
    pub loss: f64,
    pub signed: f64,
    pub gradient: ModelParams,
}

impl GradientProbe {
    pub fn norm(&self) -> f64 {
        self.gradient.norm()
    }
}

fn check_shards(shards: &[ClientShard], weights: &[f64]) -> Result<()> {
    if shards.len() != weights.len() {
        return Err(Error::LengthMismatch(shards.len(), weights.len()));
    }
    if shards.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(())
}

/// Value of the penalized objective, computed directly from its definition.
pub fn penalized_objective(
    params: &ModelParams,
    shards: &[ClientShard],
    weights: &[f64],
    penalty: &PenaltyConfig,
) -> Result<f64> {
    check_shards(shards, weights)?;
    let (b, d) = pooled_denominators(shards, weights, penalty.metric)?;
    let mut loss = 0.0;
    let mut signed = 0.0;
    for (shard, w) in shards.iter().zip(weights) {
        loss += w * batch_loss(params, &shard.samples)?;
        signed += w * component_value(params, &shard.samples, penalty.metric, b, d)?;
    }
    Ok(loss + penalty.lambda * penalty.regularizer.value(signed.abs()))
}

/// Gradient of [`penalized_objective`] assembled from per-client pieces:
/// `sum_k w_k grad L_k + lambda * C * sum_k w_k grad F_k`.
pub fn penalized_gradient(
    params: &ModelParams,
    shards: &[ClientShard],
    weights: &[f64],
    penalty: &PenaltyConfig,
) -> Result<GradientProbe> {
    check_shards(shards, weights)?;
    let cu = const_update(params, shards, weights, penalty)?;
    let scale = penalty.lambda * cu.c_theta;
    let mut gradient = ModelParams::from_flat(vec![0.0; params.len()]);
    let mut loss = 0.0;
    for (shard, &w) in shards.iter().zip(weights) {
        loss += w * batch_loss(params, &shard.samples)?;
        gradient.axpy(w, &loss_gradient(params, &shard.samples, None)?);
        if scale != 0.0 {
            let fg = fairness_component_gradient(
                params,
                &shard.samples,
                penalty.metric,
                cu.pooled_b,
                cu.pooled_d,
            )?;
            gradient.axpy(w * scale, &fg);
        }
    }
    Ok(GradientProbe {
        objective: loss + penalty.lambda * penalty.regularizer.value(cu.signed.abs()),
        loss,
        signed: cu.signed,
        gradient,
    })
}

/// `||grad L(theta)||_2` of the penalized objective on full shards.
pub fn gradient_norm_probe(
    params: &ModelParams,
    shards: &[ClientShard],
    weights: &[f64],
    penalty: &PenaltyConfig,
) -> Result<f64> {
    Ok(penalized_gradient(params, shards, weights, penalty)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::{generate, SyntheticConfig};
    use crate::data::{partition, PartitionConfig, PartitionMode};
    use crate::fairness::{MetricKind, Regularizer};
    use crate::model::{finite_diff_gradient, Optimizer, OptimizerKind, DEFAULT_STEP};

    fn setup() -> (Vec<ClientShard>, Vec<f64>) {
        let ds = generate(&SyntheticConfig {
            n_samples: 400,
            ..Default::default()
        })
        .unwrap();
        let shards = partition(
            &ds,
            &PartitionConfig {
                num_clients: 3,
                concentration: 0.5,
                seed: 1,
                mode: PartitionMode::Dirichlet,
            },
        )
        .unwrap();
        let w = shards.iter().map(|s| s.weight).collect();
        (shards, w)
    }

    #[test]
    fn matches_finite_differences() {
        let (shards, w) = setup();
        let params = ModelParams::from_flat(vec![0.4, -0.3, 0.2, 0.1, -0.5, 0.2]);
        for j in [Regularizer::L1, Regularizer::L2] {
            for metric in [MetricKind::StatisticalParity, MetricKind::EqualOpportunity] {
                let pen = PenaltyConfig::new(3.0, j, metric);
                let probe = penalized_gradient(&params, &shards, &w, &pen).unwrap();
                let fd = finite_diff_gradient(
                    |p| penalized_objective(p, &shards, &w, &pen).unwrap(),
                    &params,
                    DEFAULT_STEP,
                );
                let scale = fd.max_abs().max(1e-8);
                for (x, y) in probe.gradient.as_slice().iter().zip(fd.as_slice()) {
                    assert!((x - y).abs() / scale < 1e-4, "{j:?} {metric:?}: {x} vs {y}");
                }
                assert!(
                    (probe.objective - penalized_objective(&params, &shards, &w, &pen).unwrap())
                        .abs()
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn zero_lambda_is_loss_gradient() {
        let (shards, w) = setup();
        let params = ModelParams::from_flat(vec![0.4, -0.3, 0.2, 0.1, -0.5, 0.2]);
        let pen = PenaltyConfig::new(0.0, Regularizer::L1, MetricKind::StatisticalParity);
        let mut want = ModelParams::from_flat(vec![0.0; 6]);
        for (s, &wk) in shards.iter().zip(&w) {
            want.axpy(wk, &loss_gradient(&params, &s.samples, None).unwrap());
        }
        let got = gradient_norm_probe(&params, &shards, &w, &pen).unwrap();
        assert!((got - want.norm()).abs() < 1e-14);
    }

    #[test]
    fn vanishes_near_optimum() {
        let (shards, w) = setup();
        let pen = PenaltyConfig::new(1.0, Regularizer::L2, MetricKind::StatisticalParity);
        let mut params = ModelParams::zeros(5);
        let mut opt = Optimizer::new(OptimizerKind::Sgd, params.len(), 1.0);
        for _ in 0..5000 {
            let g = penalized_gradient(&params, &shards, &w, &pen).unwrap();
            opt.step(&mut params, &g.gradient);
        }
        assert!(gradient_norm_probe(&params, &shards, &w, &pen).unwrap() <= 1e-6);
    }
}
