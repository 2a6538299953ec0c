//! Pooled metric, its per-client decomposition, and data heterogeneity.

use serde::{Deserialize, Serialize};

use crate::fairness::stats::{local_fairness, FairnessStats};
use crate::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-9;

pub(crate) fn check_weights(n_stats: usize, weights: &[f64]) -> Result<()> {
    if n_stats != weights.len() {
        return Err(Error::LengthMismatch(n_stats, weights.len()));
    }
    if n_stats == 0 {
        return Err(Error::InvalidConfig("no client statistics".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::WeightSumMismatch(sum));
    }
    Ok(())
}

/// Component-wise weighted sum of client statistics.
pub fn pooled_stats(stats: &[FairnessStats], weights: &[f64]) -> Result<FairnessStats> {
    check_weights(stats.len(), weights)?;
    let first = stats[0];
    if stats
        .iter()
        .any(|s| s.metric != first.metric || s.mode != first.mode)
    {
        return Err(Error::MixedStats);
    }
    let mut pooled = FairnessStats {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        ..first
    };
    for (s, w) in stats.iter().zip(weights) {
        pooled.a += w * s.a;
        pooled.b += w * s.b;
        pooled.c += w * s.c;
        pooled.d += w * s.d;
    }
    Ok(pooled)
}

/// Local values, per-client components and the pooled metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    /// `F(f, D_k)`; `None` for single-group clients.
    pub local: Vec<Option<f64>>,
    /// `F_k = a_k/b - c_k/d` with pooled denominators.
    pub components: Vec<f64>,
    /// `F(f, D)` computed from the pooled quadruple.
    pub pooled: f64,
    /// `sum_k w_k F_k`; `pooled == |signed|`.
    pub signed: f64,
}

/// Pooled fairness computed two ways: directly from the pooled quadruple and
/// as the weighted sum of client components.
pub fn global_fairness(stats: &[FairnessStats], weights: &[f64]) -> Result<FairnessReport> {
    let pooled = pooled_stats(stats, weights)?;
    if pooled.b <= 0.0 || pooled.d <= 0.0 {
        return Err(Error::ZeroDenominator {
            b: pooled.b,
            d: pooled.d,
        });
    }
    let direct = (pooled.a / pooled.b - pooled.c / pooled.d).abs();
    let components: Vec<f64> = stats
        .iter()
        .map(|s| s.a / pooled.b - s.c / pooled.d)
        .collect();
    let signed: f64 = components.iter().zip(weights).map(|(f, w)| w * f).sum();
    debug_assert!(
        (direct - signed.abs()).abs() <= 1e-9,
        "decomposition drifted: {direct} vs {signed}"
    );
    Ok(FairnessReport {
        local: stats.iter().map(local_fairness).collect(),
        components,
        pooled: direct,
        signed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityReport {
    /// `max_k |(d/b)(b_k/d_k) - 1|` over clients with a defined ratio.
    pub beta: f64,
    /// `(d/b)(b_k/d_k)` per client; `None` when `b_k` or `d_k` is zero.
    pub ratios: Vec<Option<f64>>,
}

/// Data-heterogeneity coefficient of a partition with respect to a proper metric.
pub fn dh_coefficient(stats: &[FairnessStats], weights: &[f64]) -> Result<HeterogeneityReport> {
    let pooled = pooled_stats(stats, weights)?;
    if !pooled.metric.is_proper() {
        return Err(Error::ImproperMetric(pooled.metric));
    }
    if pooled.b <= 0.0 || pooled.d <= 0.0 {
        return Err(Error::ZeroDenominator {
            b: pooled.b,
            d: pooled.d,
        });
    }
    let ratios: Vec<Option<f64>> = stats
        .iter()
        .map(|s| (s.b > 0.0 && s.d > 0.0).then(|| (pooled.d / pooled.b) * (s.b / s.d)))
        .collect();
    let undefined = ratios.iter().filter(|r| r.is_none()).count();
    if undefined == ratios.len() {
        return Err(Error::AllRatiosUndefined);
    }
    if undefined > 0 {
        log::warn!("{undefined} client(s) excluded from the heterogeneity coefficient");
    }
    let beta = ratios
        .iter()
        .flatten()
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(HeterogeneityReport { beta, ratios })
}

/// Inputs and outcome of the bound `global <= max_local + beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Check {
    pub alpha: f64,
    pub beta: f64,
    pub global: f64,
    pub holds: bool,
}

pub fn check_theorem3_bound(stats: &[FairnessStats], weights: &[f64]) -> Result<Theorem3Check> {
    let report = global_fairness(stats, weights)?;
    let mut alpha = 0.0f64;
    for (k, local) in report.local.iter().enumerate() {
        alpha = alpha.max(local.ok_or(Error::UndefinedLocalFairness(k))?);
    }
    let beta = dh_coefficient(stats, weights)?.beta;
    Ok(Theorem3Check {
        alpha,
        beta,
        global: report.pooled,
        holds: report.pooled <= alpha + beta + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::fixtures::admission_stats;
    use crate::fairness::MetricKind;
    use proptest::prelude::*;

    const SP: MetricKind = MetricKind::StatisticalParity;

    #[test]
    fn pooling_identical_stats_is_identity() {
        let s = FairnessStats::new(0.1, 0.4, 0.3, 0.6, SP);
        let p = pooled_stats(&[s, s, s], &[0.2, 0.3, 0.5]).unwrap();
        for (x, y) in [(p.a, s.a), (p.b, s.b), (p.c, s.c), (p.d, s.d)] {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(pooled_stats(&[s], &[1.0]).unwrap(), s);
    }

    #[test]
    fn pooling_admission_table() {
        let p = pooled_stats(&admission_stats(), &[0.5, 0.5]).unwrap();
        for (got, want) in [(p.a, 0.13), (p.b, 0.5), (p.c, 0.37), (p.d, 0.5)] {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn pooling_rejects_bad_lengths() {
        let s = FairnessStats::new(0.1, 0.4, 0.3, 0.6, SP);
        assert!(matches!(
            pooled_stats(&[s, s], &[1.0]),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn admission_global_is_biased_while_locals_are_fair() {
        let r = global_fairness(&admission_stats(), &[0.5, 0.5]).unwrap();
        assert!((r.pooled - 0.48).abs() < 1e-12);
        assert!(r.local.iter().all(|l| l.unwrap() < 1e-12));
        // group 1 (male) is favoured, so the signed value is negative
        assert!((r.signed + 0.48).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_clients_global_equals_local() {
        let s = FairnessStats::new(0.12, 0.4, 0.3, 0.6, SP);
        let r = global_fairness(&[s, s], &[0.7, 0.3]).unwrap();
        assert!((r.pooled - local_fairness(&s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn missing_group_everywhere_is_zero_denominator() {
        let s = FairnessStats::new(0.0, 0.0, 0.3, 1.0, SP);
        assert!(matches!(
            global_fairness(&[s], &[1.0]),
            Err(Error::ZeroDenominator { .. })
        ));
    }

    #[test]
    fn heterogeneity_examples() {
        let s = FairnessStats::new(0.1, 0.4, 0.3, 0.6, SP);
        assert_eq!(dh_coefficient(&[s], &[1.0]).unwrap().beta, 0.0);
        let t = FairnessStats::new(0.05, 0.2, 0.1, 0.3, SP);
        // b_k/d_k = 2/3 for both clients
        assert!(dh_coefficient(&[s, t], &[0.5, 0.5]).unwrap().beta < 1e-12);

        let h = dh_coefficient(&admission_stats(), &[0.5, 0.5]).unwrap();
        assert!((h.beta - 8.0).abs() < 1e-12);
        assert!((h.ratios[0].unwrap() - 9.0).abs() < 1e-12);
        assert!((h.ratios[1].unwrap() - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn heterogeneity_excludes_pure_clients() {
        let pure0 = FairnessStats::new(0.3, 1.0, 0.0, 0.0, SP);
        let pure1 = FairnessStats::new(0.0, 0.0, 0.3, 1.0, SP);
        assert!(matches!(
            dh_coefficient(&[pure0, pure1], &[0.5, 0.5]),
            Err(Error::AllRatiosUndefined)
        ));
        let mixed = FairnessStats::new(0.1, 0.5, 0.1, 0.5, SP);
        let h = dh_coefficient(&[pure0, mixed], &[0.5, 0.5]).unwrap();
        assert_eq!(h.ratios[0], None);
        assert!(h.ratios[1].is_some());
    }

    #[test]
    fn improper_metric_has_no_heterogeneity() {
        let s = FairnessStats::new(0.1, 0.4, 0.3, 0.6, MetricKind::WellCalibration);
        assert!(matches!(
            dh_coefficient(&[s], &[1.0]),
            Err(Error::ImproperMetric(_))
        ));
    }

    #[test]
    fn theorem3_examples() {
        let c = check_theorem3_bound(&admission_stats(), &[0.5, 0.5]).unwrap();
        assert!(c.alpha < 1e-12);
        assert!((c.beta - 8.0).abs() < 1e-12);
        assert!((c.global - 0.48).abs() < 1e-12);
        assert!(c.holds);

        let s = FairnessStats::new(0.15, 0.4, 0.3, 0.6, SP);
        let h = check_theorem3_bound(&[s, s, s], &[0.2, 0.3, 0.5]).unwrap();
        assert!(h.beta < 1e-12 && h.global <= h.alpha + 1e-12);
    }

    fn arb_instance() -> impl Strategy<Value = (Vec<FairnessStats>, Vec<f64>)> {
        (1usize..=5).prop_flat_map(|k| {
            (
                prop::collection::vec((0.01f64..1.0, 0.0f64..=1.0, 0.01f64..1.0, 0.0f64..=1.0), k),
                prop::collection::vec(0.01f64..1.0, k),
            )
                .prop_map(|(cells, raw_w)| {
                    let total: f64 = raw_w.iter().sum();
                    let stats = cells
                        .into_iter()
                        .map(|(b, r0, d, r1)| FairnessStats::new(b * r0, b, d * r1, d, SP))
                        .collect();
                    (stats, raw_w.into_iter().map(|w| w / total).collect())
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn decomposition_identity((stats, w) in arb_instance()) {
            let r = global_fairness(&stats, &w).unwrap();
            prop_assert!((r.pooled - r.signed.abs()).abs() <= 1e-12);
        }

        #[test]
        fn global_bounded_by_local_plus_heterogeneity((stats, w) in arb_instance()) {
            let c = check_theorem3_bound(&stats, &w).unwrap();
            prop_assert!(c.holds, "{c:?}");
        }
    }
}
