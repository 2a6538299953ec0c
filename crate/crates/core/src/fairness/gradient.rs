//! Surrogate fairness components and their gradients.

use std::borrow::Borrow;

use crate::data::Sample;
use crate::fairness::stats::MetricKind;
use crate::model::{accumulate_input, ModelParams};
use crate::{Error, Result};

fn check_inputs<S: Borrow<Sample>>(
    params: &ModelParams,
    batch: &[S],
    metric: MetricKind,
    b: f64,
    d: f64,
) -> Result<()> {
    if !metric.is_proper() {
        return Err(Error::ImproperMetric(metric));
    }
    if !(b > 0.0 && d > 0.0) {
        return Err(Error::ZeroDenominator { b, d });
    }
    let first = batch.first().ok_or(Error::EmptyBatch)?;
    params.check_dim(first.borrow())
}

/// Per-sample weight `ev_i (1{a_i=0}/b - 1{a_i=1}/d)`; `ev` is the label
/// indicator for equal opportunity and 1 otherwise.
fn group_scale(sample: &Sample, metric: MetricKind, b: f64, d: f64) -> f64 {
    let ev = match metric {
        MetricKind::EqualOpportunity => f64::from(sample.label),
        _ => 1.0,
    };
    if sample.sensitive == 0 {
        ev / b
    } else {
        -ev / d
    }
}

/// `F_k = a_k/b - c_k/d` on `batch` with soft scores and pooled denominators.
pub fn component_value<S: Borrow<Sample>>(
    params: &ModelParams,
    batch: &[S],
    metric: MetricKind,
    b: f64,
    d: f64,
) -> Result<f64> {
    check_inputs(params, batch, metric, b, d)?;
    let total: f64 = batch
        .iter()
        .map(|s| {
            let s = s.borrow();
            params.proba_unchecked(s) * group_scale(s, metric, b, d)
        })
        .sum();
    Ok(total / batch.len() as f64)
}

/// Gradient of [`component_value`] with respect to the flat parameters.
pub fn fairness_component_gradient<S: Borrow<Sample>>(
    params: &ModelParams,
    batch: &[S],
    metric: MetricKind,
    b: f64,
    d: f64,
) -> Result<ModelParams> {
    check_inputs(params, batch, metric, b, d)?;
    let mut grad = vec![0.0; params.len()];
    let n = batch.len() as f64;
    for s in batch {
        let s = s.borrow();
        let f = params.proba_unchecked(s);
        let scale = f * (1.0 - f) * group_scale(s, metric, b, d) / n;
        if scale != 0.0 {
            accumulate_input(&mut grad, s, scale);
        }
    }
    Ok(ModelParams::from_flat(grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{fairness_stats, StatsMode};
    use crate::model::{finite_diff_gradient, DEFAULT_STEP};
    use proptest::prelude::*;

    const SP: MetricKind = MetricKind::StatisticalParity;
    const EOP: MetricKind = MetricKind::EqualOpportunity;

    fn batch() -> Vec<Sample> {
        vec![
            Sample::new(vec![0.5, -1.0], 0, 1).unwrap(),
            Sample::new(vec![-0.3, 2.0], 0, 0).unwrap(),
            Sample::new(vec![1.2, 0.1], 1, 1).unwrap(),
            Sample::new(vec![0.0, -0.7], 1, 0).unwrap(),
        ]
    }

    #[test]
    fn zero_model_gradient() {
        // f = 1/2 everywhere, so each sample contributes (1/4)(scale)[a, x, 1]/n
        let g =
            fairness_component_gradient(&ModelParams::zeros(3), &batch(), SP, 0.5, 0.5).unwrap();
        let g = g.as_slice();
        let bias: f64 = [2.0, 2.0, -2.0, -2.0].iter().map(|s| 0.25 * s / 4.0).sum();
        assert!((g[3] - bias).abs() < 1e-15);
        assert!((g[0] - 0.25 * (-4.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn component_matches_stats_ratio() {
        let params = ModelParams::from_parts(vec![0.2, -0.4, 0.9], 0.1);
        let s = batch();
        for metric in [SP, EOP] {
            let st = fairness_stats(&params, &s, metric, StatsMode::Surrogate).unwrap();
            let v = component_value(&params, &s, metric, st.b, st.d).unwrap();
            assert!((v - (st.a / st.b - st.c / st.d)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ModelParams::zeros(3);
        assert!(matches!(
            fairness_component_gradient(&p, &batch(), SP, 0.0, 0.5),
            Err(Error::ZeroDenominator { .. })
        ));
        assert!(matches!(
            fairness_component_gradient(&p, &batch(), MetricKind::WellCalibration, 0.5, 0.5),
            Err(Error::ImproperMetric(_))
        ));
        assert!(matches!(
            fairness_component_gradient::<Sample>(&p, &[], SP, 0.5, 0.5),
            Err(Error::EmptyBatch)
        ));
        assert!(matches!(
            fairness_component_gradient(&ModelParams::zeros(5), &batch(), SP, 0.5, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn gradient_matches_central_differences(
            theta in prop::collection::vec(-2.0f64..2.0, 4),
            b in 0.1f64..0.9,
            eop in any::<bool>(),
        ) {
            let metric = if eop { EOP } else { SP };
            let s = batch();
            let params = ModelParams::from_flat(theta);
            let d = 1.0 - b;
            let analytic = fairness_component_gradient(&params, &s, metric, b, d).unwrap();
            let numeric = finite_diff_gradient(
                |p| component_value(p, &s, metric, b, d).unwrap(),
                &params,
                DEFAULT_STEP,
            );
            let (analytic, numeric) = (analytic.as_slice(), numeric.as_slice());
            let scale = numeric.iter().fold(1e-8f64, |m, x| m.max(x.abs()));
            for (x, y) in analytic.iter().zip(numeric) {
                prop_assert!((x - y).abs() / scale <= 1e-4, "{analytic:?} vs {numeric:?}");
            }
        }
    }
}
