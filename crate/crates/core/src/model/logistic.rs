use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::{Error, Result};

/// Floor on the likelihood of the true label inside the loss.
pub const PROB_CLAMP: f64 = 1e-12;

/// Checkpoint name of the input slot holding the sensitive attribute.
pub const SENSITIVE_FEATURE: &str = "sensitive";

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Parameters of `f(x) = sigmoid(w . [a, x] + bias)`.
///
/// Stored flat with the bias last; gradients use the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    theta: Vec<f64>,
}

impl ModelParams {
    /// All-zero parameters for inputs of width `input_dim` (sensitive + features).
    pub fn zeros(input_dim: usize) -> Self {
        ModelParams {
            theta: vec![0.0; input_dim + 1],
        }
    }

    pub fn from_parts(mut weights: Vec<f64>, bias: f64) -> Self {
        weights.push(bias);
        ModelParams { theta: weights }
    }

    pub fn from_flat(theta: Vec<f64>) -> Self {
        assert!(
            !theta.is_empty(),
            "parameter vector holds at least the bias"
        );
        ModelParams { theta }
    }

    pub fn weights(&self) -> &[f64] {
        &self.theta[..self.theta.len() - 1]
    }

    pub fn bias(&self) -> f64 {
        self.theta[self.theta.len() - 1]
    }

    pub fn input_dim(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().all(|x| x.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.theta.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.theta.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &ModelParams) {
        debug_assert_eq!(self.len(), other.len());
        for (t, o) in self.theta.iter_mut().zip(&other.theta) {
            *t += alpha * o;
        }
    }

    pub fn scaled(&self, alpha: f64) -> ModelParams {
        ModelParams {
            theta: self.theta.iter().map(|x| alpha * x).collect(),
        }
    }

    pub(crate) fn check_dim(&self, sample: &Sample) -> Result<()> {
        let expected = self.input_dim();
        let actual = sample.features.len() + 1;
        if expected != actual {
            return Err(Error::DimensionMismatch { expected, actual });
        }
        Ok(())
    }

    /// `w . [a, x] + bias`, without a dimension check.
    pub(crate) fn logit(&self, sample: &Sample) -> f64 {
        let w = &self.theta;
        let mut z = w[0] * f64::from(sample.sensitive) + w[w.len() - 1];
        for (wi, xi) in w[1..w.len() - 1].iter().zip(&sample.features) {
            z += wi * xi;
        }
        z
    }

    pub(crate) fn proba_unchecked(&self, sample: &Sample) -> f64 {
        sigmoid(self.logit(sample))
    }

    pub fn predict_proba(&self, sample: &Sample) -> Result<f64> {
        self.check_dim(sample)?;
        Ok(self.proba_unchecked(sample))
    }

    /// Hard label: 1 iff the probability is strictly above 0.5.
    pub fn predict(&self, sample: &Sample) -> Result<u8> {
        Ok(u8::from(self.predict_proba(sample)? > 0.5))
    }

    pub fn to_checkpoint(&self, feature_names: &[String]) -> Checkpoint {
        let mut names = Vec::with_capacity(feature_names.len() + 1);
        names.push(SENSITIVE_FEATURE.to_string());
        names.extend(feature_names.iter().cloned());
        Checkpoint {
            weights: self.weights().to_vec(),
            bias: self.bias(),
            feature_names: names,
        }
    }
}

/// Adds `scale * [a, x, 1]` into a flat gradient buffer.
pub(crate) fn accumulate_input(grad: &mut [f64], sample: &Sample, scale: f64) {
    let last = grad.len() - 1;
    grad[0] += scale * f64::from(sample.sensitive);
    for (g, x) in grad[1..last].iter_mut().zip(&sample.features) {
        *g += scale * x;
    }
    grad[last] += scale;
}

/// Serialized model: `{weights, bias, feature_names}`. The first weight
/// belongs to the sensitive attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_names: Vec<String>,
}

impl From<&Checkpoint> for ModelParams {
    fn from(c: &Checkpoint) -> Self {
        ModelParams::from_parts(c.weights.clone(), c.bias)
    }
}

fn check_batch<S: Borrow<Sample>>(params: &ModelParams, batch: &[S]) -> Result<()> {
    let first = batch.first().ok_or(Error::EmptyBatch)?;
    params.check_dim(first.borrow())
}

/// Mean cross-entropy over a batch.
pub fn batch_loss<S: Borrow<Sample>>(params: &ModelParams, batch: &[S]) -> Result<f64> {
    check_batch(params, batch)?;
    let total: f64 = batch
        .iter()
        .map(|s| {
            let s = s.borrow();
            let p = params.proba_unchecked(s);
            let likelihood = if s.label == 1 { p } else { 1.0 - p };
            -likelihood.max(PROB_CLAMP).ln()
        })
        .sum();
    Ok(total / batch.len() as f64)
}

/// Gradient of the (optionally sample-weighted) mean cross-entropy:
/// `mean_i w_i (f_i - y_i) [a_i, x_i, 1]`.
pub fn loss_gradient<S: Borrow<Sample>>(
    params: &ModelParams,
    batch: &[S],
    sample_weights: Option<&[f64]>,
) -> Result<ModelParams> {
    check_batch(params, batch)?;
    if let Some(w) = sample_weights {
        if w.len() != batch.len() {
            return Err(Error::DimensionMismatch {
                expected: batch.len(),
                actual: w.len(),
            });
        }
    }
    let mut grad = vec![0.0; params.len()];
    let inv_n = 1.0 / batch.len() as f64;
    for (i, s) in batch.iter().enumerate() {
        let s = s.borrow();
        let w = sample_weights.map_or(1.0, |w| w[i]);
        let residual = params.proba_unchecked(s) - f64::from(s.label);
        accumulate_input(&mut grad, s, w * residual * inv_n);
    }
    Ok(ModelParams::from_flat(grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::finite_diff::finite_diff_gradient;
    use proptest::prelude::*;

    fn sample(x: Vec<f64>, a: u8, y: u8) -> Sample {
        Sample::new(x, a, y).unwrap()
    }

    #[test]
    fn zero_model_predicts_half() {
        let p = ModelParams::zeros(3);
        assert_eq!(
            p.predict_proba(&sample(vec![4.0, -2.0], 1, 0)).unwrap(),
            0.5
        );
        assert_eq!(p.predict(&sample(vec![4.0, -2.0], 1, 0)).unwrap(), 0);
    }

    #[test]
    fn large_bias_saturates() {
        let p = ModelParams::from_parts(vec![0.0, 0.0], 800.0);
        assert_eq!(p.predict_proba(&sample(vec![1.0], 0, 0)).unwrap(), 1.0);
        let q = ModelParams::from_parts(vec![0.0, 0.0], -800.0);
        assert_eq!(q.predict_proba(&sample(vec![1.0], 0, 0)).unwrap(), 0.0);
    }

    #[test]
    fn sigmoid_of_ln3_is_three_quarters() {
        // weight 0 on the sensitive slot, 1 on the single feature
        let p = ModelParams::from_parts(vec![0.0, 1.0], 0.0);
        let f = p.predict_proba(&sample(vec![3f64.ln()], 0, 1)).unwrap();
        assert!((f - 0.75).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = ModelParams::zeros(3);
        assert!(matches!(
            p.predict_proba(&sample(vec![1.0], 0, 0)),
            Err(Error::DimensionMismatch {
                expected: 3,
                actual: 2
            })
        ));
    }

    #[test]
    fn loss_examples() {
        let half = ModelParams::zeros(2);
        let batch = vec![sample(vec![1.0], 0, 1), sample(vec![-1.0], 1, 0)];
        assert!((batch_loss(&half, &batch).unwrap() - 2f64.ln()).abs() < 1e-12);

        let p = ModelParams::from_parts(vec![0.0, 1.0], 0.0);
        let one = vec![sample(vec![3f64.ln()], 0, 1)];
        assert!((batch_loss(&p, &one).unwrap() - 0.287_682_072_451_780_9).abs() < 1e-12);

        let confident = ModelParams::from_parts(vec![0.0, 60.0], 0.0);
        let fit = vec![sample(vec![1.0], 0, 1), sample(vec![-1.0], 0, 0)];
        assert!(batch_loss(&confident, &fit).unwrap() <= 1e-10);
        assert!(matches!(
            batch_loss(&p, &Vec::<Sample>::new()),
            Err(Error::EmptyBatch)
        ));
    }

    #[test]
    fn gradient_vanishes_at_exact_fit() {
        let confident = ModelParams::from_parts(vec![0.0, 60.0], 0.0);
        let fit = vec![sample(vec![1.0], 0, 1), sample(vec![-1.0], 1, 0)];
        let g = loss_gradient(&confident, &fit, None).unwrap();
        assert!(g.max_abs() <= 1e-8);
    }

    #[test]
    fn uniform_weights_match_unweighted() {
        let p = ModelParams::from_parts(vec![0.3, -0.2, 0.5], 0.1);
        let batch = vec![
            sample(vec![1.0, 2.0], 0, 1),
            sample(vec![-1.0, 0.5], 1, 0),
            sample(vec![0.2, -0.7], 1, 1),
        ];
        let g1 = loss_gradient(&p, &batch, None).unwrap();
        let g2 = loss_gradient(&p, &batch, Some(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(g1, g2);
        assert!(loss_gradient(&p, &batch, Some(&[1.0])).is_err());
    }

    #[test]
    fn checkpoint_names_sensitive_slot_first() {
        let p = ModelParams::from_parts(vec![0.1, 0.2], -0.3);
        let c = p.to_checkpoint(&["age".to_string()]);
        assert_eq!(c.feature_names, vec!["sensitive", "age"]);
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["bias"], -0.3);
        assert_eq!(ModelParams::from(&c), p);
    }

    fn weighted_loss(p: &ModelParams, batch: &[Sample], w: &[f64]) -> f64 {
        batch
            .iter()
            .zip(w)
            .map(|(s, wi)| wi * batch_loss(p, std::slice::from_ref(s)).unwrap())
            .sum::<f64>()
            / batch.len() as f64
    }

    proptest! {
        #[test]
        fn loss_is_bounded(theta in prop::collection::vec(-50.0f64..50.0, 3), x in -5.0f64..5.0, a in 0u8..2, y in 0u8..2) {
            let p = ModelParams::from_flat(theta);
            let l = batch_loss(&p, &[sample(vec![x], a, y)]).unwrap();
            prop_assert!((0.0..=-PROB_CLAMP.ln()).contains(&l), "{l}");
        }

        #[test]
        fn weighted_gradient_matches_finite_differences(
            theta in prop::collection::vec(-2.0f64..2.0, 4),
            rows in prop::collection::vec((prop::collection::vec(-2.0f64..2.0, 2), 0u8..2, 0u8..2, 0.0f64..3.0), 1..20),
        ) {
            let p = ModelParams::from_flat(theta);
            let batch: Vec<Sample> = rows.iter().map(|(x, a, y, _)| sample(x.clone(), *a, *y)).collect();
            let w: Vec<f64> = rows.iter().map(|r| r.3).collect();
            let g = loss_gradient(&p, &batch, Some(&w)).unwrap();
            let fd = finite_diff_gradient(|q| weighted_loss(q, &batch, &w), &p, 1e-6);
            let scale = g.max_abs().max(1e-3);
            for (a, b) in g.as_slice().iter().zip(fd.as_slice()) {
                prop_assert!((a - b).abs() / scale <= 1e-5, "{a} vs {b}");
            }
        }
    }
}
