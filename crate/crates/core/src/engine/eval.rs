use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::fairness::{fairness_stats, local_fairness, MetricKind, StatsMode};
use crate::model::ModelParams;
use crate::{Error, Result};

/// Test metrics in percent. A fairness value is `None` when one of its
/// conditioning events never occurs in the test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub sp: Option<f64>,
    pub eop: Option<f64>,
    pub calibration: Option<f64>,
}

impl Evaluation {
    pub fn metric(&self, metric: MetricKind) -> Option<f64> {
        match metric {
            MetricKind::StatisticalParity => self.sp,
            MetricKind::EqualOpportunity => self.eop,
            MetricKind::WellCalibration => self.calibration,
        }
    }
}

pub fn evaluate(model: &ModelParams, test: &TabularDataset) -> Result<Evaluation> {
    let first = test.samples.first().ok_or(Error::EmptyBatch)?;
    model.check_dim(first)?;
    let correct = test
        .samples
        .iter()
        .filter(|s| u8::from(model.proba_unchecked(s) > 0.5) == s.label)
        .count();
    let bias = |metric| -> Result<Option<f64>> {
        let st = fairness_stats(model, &test.samples, metric, StatsMode::Hard)?;
        Ok(local_fairness(&st).map(|v| 100.0 * v))
    };
    Ok(Evaluation {
        accuracy: 100.0 * correct as f64 / test.len() as f64,
        sp: bias(MetricKind::StatisticalParity)?,
        eop: bias(MetricKind::EqualOpportunity)?,
        calibration: bias(MetricKind::WellCalibration)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureKind, Sample};

    fn dataset(rows: &[(f64, u8, u8)]) -> TabularDataset {
        let samples = rows
            .iter()
            .map(|&(x, a, y)| Sample::new(vec![x], a, y).unwrap())
            .collect();
        TabularDataset::new(samples, vec!["x".into()], vec![FeatureKind::Continuous]).unwrap()
    }

    #[test]
    fn perfect_classifier_on_balanced_data() {
        let ds = dataset(&[(1.0, 0, 1), (-1.0, 0, 0), (1.0, 1, 1), (-1.0, 1, 0)]);
        let e = evaluate(&ModelParams::from_parts(vec![0.0, 30.0], 0.0), &ds).unwrap();
        assert_eq!(e.accuracy, 100.0);
        assert_eq!(e.sp, Some(0.0));
        assert_eq!(e.eop, Some(0.0));
    }

    #[test]
    fn constant_positive_classifier_is_group_blind() {
        let ds = dataset(&[(1.0, 0, 1), (-1.0, 0, 0), (0.3, 1, 1), (2.0, 1, 1)]);
        let e = evaluate(&ModelParams::from_parts(vec![0.0, 0.0], 30.0), &ds).unwrap();
        assert_eq!(e.sp, Some(0.0));
        assert_eq!(e.eop, Some(0.0));
        assert_eq!(e.accuracy, 75.0);
    }

    #[test]
    fn missing_group_gives_none() {
        let ds = dataset(&[(1.0, 0, 1), (-1.0, 0, 0)]);
        let e = evaluate(&ModelParams::zeros(2), &ds).unwrap();
        assert_eq!(e.sp, None);
        // the constant-negative model has no positive predictions
        assert_eq!(e.calibration, None);
        assert_eq!(e.accuracy, 50.0);
    }
}
