//! Logistic ground-truth data with a tunable dependence between the
//! sensitive group and the label, for tests and quick experiments.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::dataset::{FeatureKind, Sample, TabularDataset};
use crate::rng::rng_from;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_samples: usize,
    pub n_features: usize,
    /// P(A = 1).
    pub group_rate: f64,
    /// Added to the logit for `A = 1` and subtracted for `A = 0`.
    pub label_shift: f64,
    /// Mean shift of the first feature for `A = 1`.
    pub feature_shift: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_samples: 2000,
            n_features: 4,
            group_rate: 0.5,
            label_shift: 0.5,
            feature_shift: 0.5,
            seed: 0,
        }
    }
}

pub fn generate(config: &SyntheticConfig) -> Result<TabularDataset> {
    // Coefficients depend only on the dimension so train and test sets drawn
    // with different seeds share one ground truth.
    let mut coef_rng = rng_from(0xC0EF, &[config.n_features as u64]);
    let coef: Vec<f64> = (0..config.n_features)
        .map(|_| coef_rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut rng = rng_from(config.seed, &[0x5E]);
    let mut samples = Vec::with_capacity(config.n_samples);
    for _ in 0..config.n_samples {
        let a = u8::from(rng.random::<f64>() < config.group_rate);
        let mut x: Vec<f64> = (0..config.n_features)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        if let Some(first) = x.first_mut() {
            *first += config.feature_shift * f64::from(a);
        }
        let logit: f64 = coef.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>()
            + config.label_shift * (2.0 * f64::from(a) - 1.0);
        let y = u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-logit).exp()));
        samples.push(Sample::new(x, a, y)?);
    }
    TabularDataset::new(
        samples,
        (0..config.n_features).map(|j| format!("x{j}")).collect(),
        vec![FeatureKind::Continuous; config.n_features],
    )
}
