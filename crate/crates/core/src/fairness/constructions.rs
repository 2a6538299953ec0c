//! Worst-case client configurations relating local and global fairness.

use crate::fairness::stats::{FairnessStats, MetricKind};
use crate::{Error, Result};

/// Slack allowed when testing whether all group rates share one value.
pub const THEOREM2_TOLERANCE: f64 = 1e-10;

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidC(c))
    }
}

fn check_k(k: usize) -> Result<()> {
    if k >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "need at least 2 clients, got {k}"
        )))
    }
}

/// Perfectly fair clients whose pool is at least `c`-unfair.
///
/// Client 0 holds almost all of group 0 and admits everyone; the rest hold
/// almost all of group 1 and admit no one. Returns statistical-parity
/// quadruples and client weights.
pub fn theorem1_forward_construction(
    c: f64,
    k: usize,
    eps: f64,
) -> Result<(Vec<FairnessStats>, Vec<f64>)> {
    check_c(c)?;
    check_k(k)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidConfig(format!(
            "eps must lie in (0, 0.5), got {eps}"
        )));
    }
    let sp = MetricKind::StatisticalParity;
    let w1 = (1.0 + c) / 2.0;
    let mut stats = vec![FairnessStats::new(1.0 - eps, 1.0 - eps, eps, eps, sp)];
    let mut weights = vec![w1];
    for _ in 1..k {
        stats.push(FairnessStats::new(0.0, eps, 0.0, 1.0 - eps, sp));
        weights.push((1.0 - w1) / (k - 1) as f64);
    }
    Ok((stats, weights))
}

/// Clients that are each exactly `c`-unfair while their pool is perfectly fair.
///
/// With 1-based client numbers, even clients favour group 0 and odd clients
/// favour group 1 by `c`; each side carries half of the total weight.
pub fn theorem1_converse_construction(c: f64, k: usize) -> Result<(Vec<FairnessStats>, Vec<f64>)> {
    check_c(c)?;
    check_k(k)?;
    let sp = MetricKind::StatisticalParity;
    let n_even = (k / 2) as f64;
    let n_odd = k.div_ceil(2) as f64;
    let (stats, weights) = (1..=k)
        .map(|i| {
            if i % 2 == 0 {
                (FairnessStats::new(0.5 * c, 0.5, 0.0, 0.5, sp), 0.5 / n_even)
            } else {
                (FairnessStats::new(0.0, 0.5, 0.5 * c, 0.5, sp), 0.5 / n_odd)
            }
        })
        .unzip();
    Ok((stats, weights))
}

/// True iff every group rate `a_k/b_k` and `c_k/d_k` equals one common
/// constant within [`THEOREM2_TOLERANCE`]. Clients missing a group fail.
pub fn check_theorem2_condition(stats: &[FairnessStats]) -> bool {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in stats {
        match s.ratios() {
            (Some(r0), Some(r1)) => {
                lo = lo.min(r0.min(r1));
                hi = hi.max(r0.max(r1));
            }
            _ => return false,
        }
    }
    !stats.is_empty() && hi - lo <= 2.0 * THEOREM2_TOLERANCE
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{global_fairness, local_fairness};
    use proptest::prelude::*;

    #[test]
    fn forward_locals_fair_global_unfair() {
        let (stats, w) = theorem1_forward_construction(0.5, 5, 1e-4).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let r = global_fairness(&stats, &w).unwrap();
        assert!(r.local.iter().all(|l| l.unwrap() == 0.0));
        assert!(r.pooled >= 0.499, "{}", r.pooled);
    }

    #[test]
    fn converse_locals_unfair_global_fair() {
        let (stats, w) = theorem1_converse_construction(0.7, 4).unwrap();
        assert_eq!(w, vec![0.25; 4]);
        let r = global_fairness(&stats, &w).unwrap();
        for l in &r.local {
            assert!((l.unwrap() - 0.7).abs() < 1e-12);
        }
        assert!(r.pooled <= 1e-12);
    }

    #[test]
    fn converse_odd_client_count() {
        let (stats, w) = theorem1_converse_construction(0.3, 3).unwrap();
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
        assert!(global_fairness(&stats, &w).unwrap().pooled <= 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        for c in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                theorem1_converse_construction(c, 4),
                Err(Error::InvalidC(_))
            ));
        }
        assert!(theorem1_forward_construction(0.5, 1, 1e-3).is_err());
        assert!(theorem1_forward_construction(0.5, 3, 0.0).is_err());
    }

    #[test]
    fn equal_rates_condition() {
        let sp = MetricKind::StatisticalParity;
        let fair = [
            FairnessStats::new(0.1, 0.2, 0.4, 0.8, sp),
            FairnessStats::new(0.35, 0.7, 0.15, 0.3, sp),
        ];
        assert!(check_theorem2_condition(&fair));
        let off = [fair[0], FairnessStats::new(0.35, 0.7, 0.1, 0.3, sp)];
        assert!(!check_theorem2_condition(&off));
        let pure = [FairnessStats::new(0.1, 0.2, 0.0, 0.0, sp)];
        assert!(!check_theorem2_condition(&pure));
    }

    proptest! {
        #[test]
        fn shared_rate_implies_fair_pool(
            rate in 0.0f64..1.0,
            groups in prop::collection::vec((0.05f64..1.0, 0.05f64..1.0, 0.05f64..1.0), 1..6),
        ) {
            let total: f64 = groups.iter().map(|g| g.2).sum();
            let sp = MetricKind::StatisticalParity;
            let stats: Vec<_> = groups
                .iter()
                .map(|&(b, d, _)| FairnessStats::new(rate * b, b, rate * d, d, sp))
                .collect();
            let w: Vec<f64> = groups.iter().map(|g| g.2 / total).collect();
            prop_assert!(check_theorem2_condition(&stats));
            prop_assert!(stats.iter().all(|s| local_fairness(s).unwrap() < 1e-12));
            prop_assert!(global_fairness(&stats, &w).unwrap().pooled < 1e-12);
        }

        #[test]
        // eps has to be small next to the weight 1 - w_1 = (1 - c)/2 left for
        // the other clients, so c stays away from 1 here.
        fn forward_global_reaches_c(c in 0.01f64..0.9, k in 2usize..10) {
            let (stats, w) = theorem1_forward_construction(c, k, 1e-4).unwrap();
            let r = global_fairness(&stats, &w).unwrap();
            prop_assert!(r.pooled >= c - 1e-3);
        }
    }
}
