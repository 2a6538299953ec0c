//! Server-side reductions: aggregation, the FedGFT constant, FairFed weights.

use serde::{Deserialize, Serialize};

use crate::data::{CellProbs, ClientShard};
use crate::engine::client::{client_summary, ClientSummary};
use crate::fairness::{sign_update, MetricKind, PenaltyConfig, StatsMode};
use crate::model::ModelParams;
use crate::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-9;

fn check_probability_vector(weights: &[f64]) -> Result<()> {
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL || weights.iter().any(|w| w.is_nan() || *w < 0.0) {
        return Err(Error::WeightSumMismatch(sum));
    }
    Ok(())
}

/// Weighted average of client models.
pub fn aggregate(params_list: &[ModelParams], weights: &[f64]) -> Result<ModelParams> {
    if params_list.len() != weights.len() {
        return Err(Error::LengthMismatch(params_list.len(), weights.len()));
    }
    check_probability_vector(weights)?;
    let first = params_list.first().ok_or(Error::EmptyBatch)?;
    let mut out = ModelParams::from_flat(vec![0.0; first.len()]);
    for (p, &w) in params_list.iter().zip(weights) {
        if p.len() != first.len() {
            return Err(Error::DimensionMismatch {
                expected: first.len(),
                actual: p.len(),
            });
        }
        out.axpy(w, p);
    }
    Ok(out)
}

/// Renormalizes `weights[i]` over the selected client indices.
pub fn restrict_weights(weights: &[f64], selected: &[usize]) -> Vec<f64> {
    let total: f64 = selected.iter().map(|&k| weights[k]).sum();
    selected.iter().map(|&k| weights[k] / total).collect()
}

/// Model-free pooled denominators `(b, d)` of a proper metric.
pub fn pooled_denominators(
    shards: &[ClientShard],
    weights: &[f64],
    metric: MetricKind,
) -> Result<(f64, f64)> {
    if !metric.is_proper() {
        return Err(Error::ImproperMetric(metric));
    }
    if shards.len() != weights.len() {
        return Err(Error::LengthMismatch(shards.len(), weights.len()));
    }
    let (mut b, mut d) = (0.0, 0.0);
    for (shard, w) in shards.iter().zip(weights) {
        let cells = CellProbs::of_samples(&shard.samples);
        let (bk, dk) = match metric {
            MetricKind::EqualOpportunity => (cells.p[0][1], cells.p[1][1]),
            _ => (cells.group(0), cells.group(1)),
        };
        b += w * bk;
        d += w * dk;
    }
    if !(b > 0.0 && d > 0.0) {
        return Err(Error::ZeroDenominator { b, d });
    }
    Ok((b, d))
}

/// Result of the per-round constant computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstUpdate {
    /// `sign(F) * J'(|F|)`.
    pub c_theta: f64,
    pub pooled_b: f64,
    pub pooled_d: f64,
    /// Signed surrogate fairness `sum_k w_k F_k`.
    pub signed: f64,
}

/// Server step from client summaries alone. `weights` align with
/// `summaries`; `pooled_b`, `pooled_d` come from the full population.
pub fn const_from_summaries(
    summaries: &[ClientSummary],
    weights: &[f64],
    pooled_b: f64,
    pooled_d: f64,
    penalty: &PenaltyConfig,
) -> Result<ConstUpdate> {
    if summaries.len() != weights.len() {
        return Err(Error::LengthMismatch(summaries.len(), weights.len()));
    }
    if !(pooled_b > 0.0 && pooled_d > 0.0) {
        return Err(Error::ZeroDenominator {
            b: pooled_b,
            d: pooled_d,
        });
    }
    let signed: f64 = summaries
        .iter()
        .zip(weights)
        .map(|(s, w)| w * (s.a / pooled_b - s.c / pooled_d))
        .sum();
    Ok(ConstUpdate {
        c_theta: sign_update(signed, penalty),
        pooled_b,
        pooled_d,
        signed,
    })
}

/// FedGFT constant for `params` over all `shards` with surrogate statistics.
pub fn const_update(
    params: &ModelParams,
    shards: &[ClientShard],
    weights: &[f64],
    penalty: &PenaltyConfig,
) -> Result<ConstUpdate> {
    penalty.validate()?;
    let (b, d) = pooled_denominators(shards, weights, penalty.metric)?;
    let summaries = shards
        .iter()
        .map(|s| client_summary(params, s, penalty.metric, StatsMode::Surrogate))
        .collect::<Result<Vec<_>>>()?;
    const_from_summaries(&summaries, weights, b, d, penalty)
}

/// `exp(-beta |F - F_k|) w_k`, normalized. Undefined local values count as
/// no deviation.
pub fn fairfed_weights(
    global_f: f64,
    local_f: &[Option<f64>],
    base_weights: &[f64],
    fairfed_beta: f64,
) -> Vec<f64> {
    let raw: Vec<f64> = local_f
        .iter()
        .zip(base_weights)
        .map(|(f, w)| {
            let gap = f.map_or(0.0, |f| (global_f - f).abs());
            (-fairfed_beta * gap).exp() * w
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 && total.is_finite() {
        raw.into_iter().map(|w| w / total).collect()
    } else {
        let base: f64 = base_weights.iter().sum();
        base_weights.iter().map(|w| w / base).collect()
    }
}
