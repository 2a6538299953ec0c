use serde::{Deserialize, Serialize};

use crate::fairness::stats::MetricKind;
use crate::{Error, Result};

/// Penalty shape `J` applied to the pooled fairness value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    /// `J(x) = x`
    #[default]
    L1,
    /// `J(x) = x^2`
    L2,
}

impl Regularizer {
    pub fn value(self, x: f64) -> f64 {
        match self {
            Regularizer::L1 => x,
            Regularizer::L2 => x * x,
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Regularizer::L1 => 1.0,
            Regularizer::L2 => 2.0 * x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda: f64,
    #[serde(default)]
    pub regularizer: Regularizer,
    pub metric: MetricKind,
}

impl PenaltyConfig {
    pub fn new(lambda: f64, regularizer: Regularizer, metric: MetricKind) -> Self {
        PenaltyConfig {
            lambda,
            regularizer,
            metric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "penalty lambda must be a nonnegative number, got {}",
                self.lambda
            )));
        }
        if !self.metric.is_proper() {
            return Err(Error::ImproperMetric(self.metric));
        }
        Ok(())
    }
}

/// `sign(F) * J'(|F|)`, the scalar multiplying each client's fairness
/// component in its local objective. Zero at `F = 0`.
pub fn sign_update(signed: f64, penalty: &PenaltyConfig) -> f64 {
    if signed == 0.0 {
        return 0.0;
    }
    signed.signum() * penalty.regularizer.derivative(signed.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pen(j: Regularizer) -> PenaltyConfig {
        PenaltyConfig::new(1.0, j, MetricKind::StatisticalParity)
    }

    #[test]
    fn sign_update_examples() {
        assert_eq!(sign_update(0.3, &pen(Regularizer::L1)), 1.0);
        assert_eq!(sign_update(-0.3, &pen(Regularizer::L1)), -1.0);
        assert_eq!(sign_update(-0.25, &pen(Regularizer::L2)), -0.5);
        assert_eq!(sign_update(0.0, &pen(Regularizer::L1)), 0.0);
        assert_eq!(sign_update(0.0, &pen(Regularizer::L2)), 0.0);
    }

    #[test]
    fn calibration_is_rejected_as_penalty() {
        let p = PenaltyConfig::new(1.0, Regularizer::L1, MetricKind::WellCalibration);
        assert!(matches!(p.validate(), Err(Error::ImproperMetric(_))));
        let neg = PenaltyConfig::new(-1.0, Regularizer::L1, MetricKind::StatisticalParity);
        assert!(neg.validate().is_err());
    }
}
