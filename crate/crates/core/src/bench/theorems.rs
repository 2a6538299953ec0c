//! Randomized checks of the fairness identities and constructions, packaged
//! as a JSON report.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::fairness::{
    check_theorem2_condition, check_theorem3_bound, fixtures, global_fairness,
    theorem1_converse_construction, theorem1_forward_construction, FairnessStats, MetricKind,
};
use crate::rng::{rng_from, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub trials: usize,
    /// Largest observed deviation, where the check has a numeric tolerance.
    pub max_error: Option<f64>,
    pub detail: serde_json::Value,
    /// First failing instance, if any.
    pub counterexample: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Random proper-metric instance with 1 to `max_k` clients: positive group
/// masses, rates in `[0, 1]`, and a random probability vector of weights.
pub fn random_instance(rng: &mut SimRng, max_k: usize) -> (Vec<FairnessStats>, Vec<f64>) {
    let k = rng.random_range(1..=max_k);
    let metric = if rng.random::<bool>() {
        MetricKind::StatisticalParity
    } else {
        MetricKind::EqualOpportunity
    };
    let stats = (0..k)
        .map(|_| {
            let b = rng.random_range(0.01..1.0);
            let d = rng.random_range(0.01..1.0);
            let (r0, r1) = (rng.random::<f64>(), rng.random::<f64>());
            FairnessStats::new(r0 * b, b, r1 * d, d, metric)
        })
        .collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    (stats, raw.into_iter().map(|w| w / total).collect())
}

fn instance_json(stats: &[FairnessStats], weights: &[f64]) -> serde_json::Value {
    json!({ "stats": stats, "weights": weights })
}

fn decomposition_check(seed: u64, trials: usize) -> CheckResult {
    let mut rng = rng_from(seed, &[1]);
    let mut max_error = 0.0f64;
    let mut counterexample = None;
    for _ in 0..trials {
        let (stats, w) = random_instance(&mut rng, 8);
        let err = match global_fairness(&stats, &w) {
            Ok(r) => (r.pooled - r.signed.abs()).abs(),
            Err(_) => f64::INFINITY,
        };
        if err > 1e-12 && counterexample.is_none() {
            counterexample = Some(instance_json(&stats, &w));
        }
        max_error = max_error.max(err);
    }
    CheckResult {
        name: "decomposition_identity".into(),
        passed: counterexample.is_none(),
        trials,
        max_error: Some(max_error),
        detail: json!({ "tolerance": 1e-12 }),
        counterexample,
    }
}

fn bound_check(seed: u64, trials: usize) -> CheckResult {
    let mut rng = rng_from(seed, &[2]);
    let mut violations = 0usize;
    let mut worst_slack = f64::INFINITY;
    let mut counterexample = None;
    for _ in 0..trials {
        let (stats, w) = random_instance(&mut rng, 8);
        match check_theorem3_bound(&stats, &w) {
            Ok(c) => {
                worst_slack = worst_slack.min(c.alpha + c.beta - c.global);
                if !c.holds {
                    violations += 1;
                    counterexample.get_or_insert_with(|| instance_json(&stats, &w));
                }
            }
            Err(e) => {
                violations += 1;
                counterexample.get_or_insert_with(|| json!({ "error": e.to_string() }));
            }
        }
    }
    CheckResult {
        name: "heterogeneity_bound".into(),
        passed: violations == 0,
        trials,
        max_error: None,
        detail: json!({ "violations": violations, "min_slack": worst_slack }),
        counterexample,
    }
}

fn equal_rates_check(seed: u64, trials: usize) -> CheckResult {
    let mut rng = rng_from(seed, &[3]);
    let mut max_error = 0.0f64;
    let mut counterexample = None;
    for _ in 0..trials {
        let (raw, w) = random_instance(&mut rng, 8);
        let rate = rng.random::<f64>();
        let stats: Vec<FairnessStats> = raw
            .iter()
            .map(|s| FairnessStats::new(rate * s.b, s.b, rate * s.d, s.d, s.metric))
            .collect();
        let global = global_fairness(&stats, &w).map_or(f64::INFINITY, |r| r.pooled);
        max_error = max_error.max(global);
        if (!check_theorem2_condition(&stats) || global > 1e-12) && counterexample.is_none() {
            counterexample = Some(instance_json(&stats, &w));
        }
    }
    CheckResult {
        name: "shared_rate_is_fair".into(),
        passed: counterexample.is_none(),
        trials,
        max_error: Some(max_error),
        detail: json!({ "tolerance": 1e-12 }),
        counterexample,
    }
}

fn forward_check() -> CheckResult {
    let (c, k, eps) = (0.9, 5, 1e-4);
    let out = theorem1_forward_construction(c, k, eps).and_then(|(s, w)| {
        let r = global_fairness(&s, &w)?;
        Ok((s, w, r))
    });
    match out {
        Ok((stats, w, r)) => {
            let max_local = r
                .local
                .iter()
                .map(|l| l.unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max);
            let passed = max_local == 0.0 && r.pooled >= c - 0.01;
            CheckResult {
                name: "fair_clients_unfair_pool".into(),
                passed,
                trials: 1,
                max_error: Some(max_local),
                detail: json!({ "c": c, "clients": k, "eps": eps, "global": r.pooled, "max_local": max_local,
                                "witness": instance_json(&stats, &w) }),
                counterexample: (!passed).then(|| instance_json(&stats, &w)),
            }
        }
        Err(e) => failed("fair_clients_unfair_pool", e),
    }
}

fn converse_check() -> CheckResult {
    let (c, k) = (0.7, 4);
    let out = theorem1_converse_construction(c, k).and_then(|(s, w)| {
        let r = global_fairness(&s, &w)?;
        Ok((s, w, r))
    });
    match out {
        Ok((stats, w, r)) => {
            let local_err = r
                .local
                .iter()
                .map(|l| l.map_or(f64::INFINITY, |v| (v - c).abs()))
                .fold(0.0, f64::max);
            let passed = local_err <= 1e-12 && r.pooled <= 1e-12;
            CheckResult {
                name: "unfair_clients_fair_pool".into(),
                passed,
                trials: 1,
                max_error: Some(local_err.max(r.pooled)),
                detail: json!({ "c": c, "clients": k, "global": r.pooled,
                                "witness": instance_json(&stats, &w) }),
                counterexample: (!passed).then(|| instance_json(&stats, &w)),
            }
        }
        Err(e) => failed("unfair_clients_fair_pool", e),
    }
}

fn admission_check() -> CheckResult {
    let stats = fixtures::admission_stats();
    let w = [0.5, 0.5];
    match global_fairness(&stats, &w) {
        Ok(r) => {
            let err = (r.pooled - 0.48).abs();
            let locals_fair = r.local.iter().all(|l| l.is_some_and(|v| v < 1e-12));
            CheckResult {
                name: "admission_fixture".into(),
                passed: err <= 1e-12 && locals_fair,
                trials: 1,
                max_error: Some(err),
                detail: json!({ "global": r.pooled, "local": r.local }),
                counterexample: None,
            }
        }
        Err(e) => failed("admission_fixture", e),
    }
}

fn failed(name: &str, e: crate::Error) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: false,
        trials: 1,
        max_error: None,
        detail: json!({ "error": e.to_string() }),
        counterexample: None,
    }
}

/// Runs every check; randomized ones use `trials` instances each.
pub fn theorem_checks(seed: u64, trials: usize) -> TheoremReport {
    let trials = trials.max(1);
    let checks = vec![
        decomposition_check(seed, trials),
        bound_check(seed, trials),
        equal_rates_check(seed, trials),
        forward_check(),
        converse_check(),
        admission_check(),
    ];
    TheoremReport {
        seed,
        trials,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
