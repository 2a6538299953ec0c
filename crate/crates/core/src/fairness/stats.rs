use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::model::ModelParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `|P(Yhat=1 | A=0) - P(Yhat=1 | A=1)|`
    StatisticalParity,
    /// `|P(Yhat=1 | A=0, Y=1) - P(Yhat=1 | A=1, Y=1)|`
    EqualOpportunity,
    /// `|P(Y=1 | A=0, Yhat=1) - P(Y=1 | A=1, Yhat=1)|`
    WellCalibration,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [
        MetricKind::StatisticalParity,
        MetricKind::EqualOpportunity,
        MetricKind::WellCalibration,
    ];

    /// Whether `b` and `d` are free of the model.
    pub fn is_proper(self) -> bool {
        !matches!(self, MetricKind::WellCalibration)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            MetricKind::StatisticalParity => "sp",
            MetricKind::EqualOpportunity => "eop",
            MetricKind::WellCalibration => "calibration",
        }
    }
}

/// How `1{Yhat = 1}` enters the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsMode {
    /// Indicator `1{f(x) > 0.5}`.
    Hard,
    /// Soft score `f(x)`, differentiable in the parameters.
    Surrogate,
}

/// The `(a, b, c, d)` quadruple of one distribution (a client or a pool).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessStats {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub mode: StatsMode,
    pub metric: MetricKind,
}

impl FairnessStats {
    pub fn new(a: f64, b: f64, c: f64, d: f64, metric: MetricKind) -> Self {
        FairnessStats {
            a,
            b,
            c,
            d,
            mode: StatsMode::Hard,
            metric,
        }
    }

    /// `a/b` and `c/d`, or `None` where the denominator vanishes.
    pub fn ratios(&self) -> (Option<f64>, Option<f64>) {
        let r = |num: f64, den: f64| (den > 0.0).then(|| num / den);
        (r(self.a, self.b), r(self.c, self.d))
    }
}

/// Empirical `(a, b, c, d)` of `model` on `samples`.
///
/// In surrogate mode the soft score replaces `1{Yhat = 1}` wherever it
/// appears; true-label indicators stay hard.
pub fn fairness_stats<S: Borrow<Sample>>(
    model: &ModelParams,
    samples: &[S],
    metric: MetricKind,
    mode: StatsMode,
) -> Result<FairnessStats> {
    let first = samples.first().ok_or(Error::EmptyBatch)?;
    model.check_dim(first.borrow())?;
    let mut sums = [0.0f64; 4];
    for s in samples {
        let s = s.borrow();
        let f = model.proba_unchecked(s);
        let pred = match mode {
            StatsMode::Hard => f64::from(u8::from(f > 0.5)),
            StatsMode::Surrogate => f,
        };
        let y = f64::from(s.label);
        let (num, den) = match metric {
            MetricKind::StatisticalParity => (pred, 1.0),
            MetricKind::EqualOpportunity => (pred * y, y),
            MetricKind::WellCalibration => (y * pred, pred),
        };
        let slot = 2 * s.sensitive as usize;
        sums[slot] += num;
        sums[slot + 1] += den;
    }
    let n = samples.len() as f64;
    Ok(FairnessStats {
        a: sums[0] / n,
        b: sums[1] / n,
        c: sums[2] / n,
        d: sums[3] / n,
        mode,
        metric,
    })
}

/// `|a/b - c/d|`, undefined when either group is absent.
pub fn local_fairness(stats: &FairnessStats) -> Option<f64> {
    match stats.ratios() {
        (Some(r0), Some(r1)) => Some((r0 - r1).abs()),
        _ => None,
    }
}
