//! One-hot encoding and standardization fitted on a training table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::dataset::{FeatureKind, Sample, TabularDataset};
use crate::data::schema::ColumnKind;
use crate::data::table::{RawTable, RawValue};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
enum ColumnEncoder {
    Numeric {
        name: String,
        index: usize,
        mean: f64,
        sd: f64,
    },
    /// Levels after the first (reference) level, each one an indicator.
    Categorical {
        name: String,
        index: usize,
        reference: String,
        levels: Vec<String>,
    },
}

/// Encoding statistics learned from a training table and reused, unchanged,
/// on any other table with the same schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Preprocessor {
    encoders: Vec<ColumnEncoder>,
    sensitive_index: usize,
    sensitive_positive: String,
    label_index: usize,
    label_positive: String,
    /// Zero-variance numeric columns dropped at fit time.
    pub dropped_constant: Vec<String>,
}

fn text_of(value: &RawValue) -> String {
    value.as_text()
}

impl Preprocessor {
    pub fn fit(table: &RawTable) -> Result<Self> {
        let schema = &table.schema;
        let index_of = |name: &str| table.column_index(name).expect("schema column is loaded");
        let mut encoders = Vec::new();
        let mut dropped_constant = Vec::new();
        for spec in schema.features() {
            let index = index_of(&spec.name);
            match spec.kind {
                ColumnKind::Numeric => {
                    let xs: Vec<f64> = table
                        .rows
                        .iter()
                        .map(|r| match &r[index] {
                            RawValue::Number(x) => *x,
                            RawValue::Text(_) => unreachable!("numeric columns parse to numbers"),
                        })
                        .collect();
                    let n = xs.len() as f64;
                    let mean = xs.iter().sum::<f64>() / n;
                    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                    if var == 0.0 {
                        log::warn!("dropping constant column `{}`", spec.name);
                        dropped_constant.push(spec.name.clone());
                        continue;
                    }
                    encoders.push(ColumnEncoder::Numeric {
                        name: spec.name.clone(),
                        index,
                        mean,
                        sd: var.sqrt(),
                    });
                }
                ColumnKind::Categorical => {
                    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                    for r in &table.rows {
                        *counts.entry(text_of(&r[index])).or_default() += 1;
                    }
                    let mut levels: Vec<String> = counts.into_keys().collect();
                    if levels.len() < 2 {
                        log::warn!("dropping constant column `{}`", spec.name);
                        dropped_constant.push(spec.name.clone());
                        continue;
                    }
                    let reference = levels.remove(0);
                    encoders.push(ColumnEncoder::Categorical {
                        name: spec.name.clone(),
                        index,
                        reference,
                        levels,
                    });
                }
            }
        }
        let sensitive = schema.sensitive();
        let label = schema.label();
        Ok(Preprocessor {
            encoders,
            sensitive_index: index_of(&sensitive.name),
            sensitive_positive: sensitive.positive_value.clone().unwrap_or_default(),
            label_index: index_of(&label.name),
            label_positive: label.positive_value.clone().unwrap_or_default(),
            dropped_constant,
        })
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for enc in &self.encoders {
            match enc {
                ColumnEncoder::Numeric { name, .. } => names.push(name.clone()),
                ColumnEncoder::Categorical { name, levels, .. } => {
                    names.extend(levels.iter().map(|l| format!("{name}={l}")))
                }
            }
        }
        names
    }

    fn feature_kinds(&self) -> Vec<FeatureKind> {
        self.encoders
            .iter()
            .flat_map(|enc| match enc {
                ColumnEncoder::Numeric { .. } => vec![FeatureKind::Continuous],
                ColumnEncoder::Categorical { levels, .. } => {
                    vec![FeatureKind::Indicator; levels.len()]
                }
            })
            .collect()
    }

    /// Encodes a table with the fitted statistics.
    pub fn transform(&self, table: &RawTable) -> Result<TabularDataset> {
        let mut samples = Vec::with_capacity(table.len());
        for row in &table.rows {
            let mut features = Vec::new();
            for enc in &self.encoders {
                match enc {
                    ColumnEncoder::Numeric {
                        index, mean, sd, ..
                    } => {
                        let x = match &row[*index] {
                            RawValue::Number(x) => *x,
                            RawValue::Text(_) => unreachable!("numeric columns parse to numbers"),
                        };
                        features.push((x - mean) / sd);
                    }
                    ColumnEncoder::Categorical {
                        name,
                        index,
                        reference,
                        levels,
                    } => {
                        let value = text_of(&row[*index]);
                        let hit = levels.iter().position(|l| *l == value);
                        if hit.is_none() && value != *reference {
                            return Err(Error::UnknownCategory {
                                column: name.clone(),
                                value,
                            });
                        }
                        features.extend((0..levels.len()).map(|j| {
                            if Some(j) == hit {
                                1.0
                            } else {
                                0.0
                            }
                        }));
                    }
                }
            }
            let sensitive =
                u8::from(text_of(&row[self.sensitive_index]) == self.sensitive_positive);
            let label = u8::from(text_of(&row[self.label_index]) == self.label_positive);
            samples.push(Sample::new(features, sensitive, label)?);
        }
        TabularDataset::new(samples, self.feature_names(), self.feature_kinds())
    }
}

/// Fits on `table` and encodes it.
pub fn preprocess(table: &RawTable) -> Result<(Preprocessor, TabularDataset)> {
    let pre = Preprocessor::fit(table)?;
    let ds = pre.transform(table)?;
    Ok((pre, ds))
}
