use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One encoded observation. The sensitive attribute is kept apart from the
/// other predictors; the model still sees it as its first input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub sensitive: u8,
    pub label: u8,
}

impl Sample {
    pub fn new(features: Vec<f64>, sensitive: u8, label: u8) -> Result<Self> {
        if sensitive > 1 || label > 1 {
            return Err(Error::InvalidConfig(format!(
                "sensitive ({sensitive}) and label ({label}) must be 0 or 1"
            )));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite feature value".into()));
        }
        Ok(Sample {
            features,
            sensitive,
            label,
        })
    }

    /// Index into a 2x2 `(A, Y)` table.
    pub fn cell(&self) -> (usize, usize) {
        (self.sensitive as usize, self.label as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Standardized numeric column.
    Continuous,
    /// 0/1 dummy from a one-hot encoded categorical column.
    Indicator,
}

/// Encoded samples plus the names of their feature columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularDataset {
    pub samples: Vec<Sample>,
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<FeatureKind>,
}

impl TabularDataset {
    pub fn new(
        samples: Vec<Sample>,
        feature_names: Vec<String>,
        feature_kinds: Vec<FeatureKind>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let p = feature_names.len();
        if feature_kinds.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: feature_kinds.len(),
            });
        }
        if let Some(s) = samples.iter().find(|s| s.features.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: s.features.len(),
            });
        }
        let ds = TabularDataset {
            samples,
            feature_names,
            feature_kinds,
        };
        if ds.is_degenerate() {
            log::warn!("dataset leaves at least one (A, Y) cell empty");
        }
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Model input width: the sensitive indicator plus every feature.
    pub fn input_dim(&self) -> usize {
        self.n_features() + 1
    }

    /// Counts of samples in each `(A, Y)` cell.
    pub fn cell_counts(&self) -> [[usize; 2]; 2] {
        let mut counts = [[0; 2]; 2];
        for s in &self.samples {
            let (a, y) = s.cell();
            counts[a][y] += 1;
        }
        counts
    }

    /// True when some `(A, Y)` cell has no samples.
    pub fn is_degenerate(&self) -> bool {
        self.cell_counts().iter().flatten().any(|&c| c == 0)
    }

    pub fn subset(&self, indices: &[usize]) -> Result<TabularDataset> {
        TabularDataset::new(
            indices.iter().map(|&i| self.samples[i].clone()).collect(),
            self.feature_names.clone(),
            self.feature_kinds.clone(),
        )
    }

    /// Re-standardizes continuous features with this dataset's own mean and
    /// variance. Indicators are left alone, so on an already standardized
    /// dataset this is the identity up to rounding.
    pub fn standardized(&self) -> TabularDataset {
        let n = self.len() as f64;
        let mut out = self.clone();
        for (j, kind) in self.feature_kinds.iter().enumerate() {
            if *kind != FeatureKind::Continuous {
                continue;
            }
            let mean = self.samples.iter().map(|s| s.features[j]).sum::<f64>() / n;
            let var = self
                .samples
                .iter()
                .map(|s| (s.features[j] - mean).powi(2))
                .sum::<f64>()
                / n;
            let sd = var.sqrt();
            if sd == 0.0 {
                continue;
            }
            for s in &mut out.samples {
                s.features[j] = (s.features[j] - mean) / sd;
            }
        }
        out
    }
}
