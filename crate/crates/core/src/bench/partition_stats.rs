use serde::{Deserialize, Serialize};

use crate::data::{CellProbs, ClientShard};
use crate::fairness::{dh_coefficient, FairnessStats, MetricKind};
use crate::{Error, Result};

/// Cell table and heterogeneity ratio of one client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientCells {
    pub client_id: usize,
    pub n: usize,
    pub weight: f64,
    /// Empirical `P(A=a, Y=y)`, indexed `[a][y]`.
    pub cells: [[f64; 2]; 2],
    /// `(d/b)(b_k/d_k)` for the chosen metric; `None` for single-group clients.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub metric: MetricKind,
    pub beta: f64,
    pub clients: Vec<ClientCells>,
}

/// Per-client `(A, Y)` tables and the heterogeneity coefficient of a partition.
pub fn partition_stats(shards: &[ClientShard], metric: MetricKind) -> Result<PartitionStats> {
    if !metric.is_proper() {
        return Err(Error::ImproperMetric(metric));
    }
    let cells: Vec<CellProbs> = shards
        .iter()
        .map(|s| CellProbs::of_samples(&s.samples))
        .collect();
    let stats: Vec<FairnessStats> = cells
        .iter()
        .map(|c| {
            let (b, d) = match metric {
                MetricKind::EqualOpportunity => (c.p[0][1], c.p[1][1]),
                _ => (c.group(0), c.group(1)),
            };
            FairnessStats::new(0.0, b, 0.0, d, metric)
        })
        .collect();
    let weights: Vec<f64> = shards.iter().map(|s| s.weight).collect();
    let h = dh_coefficient(&stats, &weights)?;
    Ok(PartitionStats {
        metric,
        beta: h.beta,
        clients: shards
            .iter()
            .zip(&cells)
            .zip(h.ratios)
            .map(|((s, c), ratio)| ClientCells {
                client_id: s.client_id,
                n: s.len(),
                weight: s.weight,
                cells: c.p,
                ratio,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::fixtures::admission_shards;

    #[test]
    fn admission_partition() {
        let (shards, _) = admission_shards();
        let ps = partition_stats(&shards, MetricKind::StatisticalParity).unwrap();
        assert!((ps.beta - 8.0).abs() < 1e-12);
        assert!((ps.clients[0].cells[0][1] - 0.18).abs() < 1e-12);
        assert_eq!(ps.clients[1].n, 100);
    }
}
