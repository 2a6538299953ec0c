//! Train/test splits of the bundled benchmark datasets.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::synthetic::{generate, SyntheticConfig};
use crate::data::{load_dataset, Preprocessor, Schema, TabularDataset};
use crate::rng::rng_from;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Adult,
    Compas,
    Synthetic,
}

/// Share of the COMPAS records held out for testing.
pub const COMPAS_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct Splits {
    pub train: TabularDataset,
    pub test: TabularDataset,
    /// Rows dropped for missing or ragged fields, across all files read.
    pub dropped_rows: usize,
}

fn file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn encode(
    train: &crate::data::RawTable,
    test: &crate::data::RawTable,
) -> Result<(TabularDataset, TabularDataset)> {
    let pre = Preprocessor::fit(train)?;
    Ok((pre.transform(train)?, pre.transform(test)?))
}

/// Loads `kind` from `data_dir`.
///
/// Adult ships with its own test file. COMPAS is split once, by
/// `split_seed`, into 80% train and 20% test. Synthetic data draws train
/// and test sets from one ground truth with seeds derived from `split_seed`.
pub fn load_splits(
    kind: DatasetKind,
    data_dir: &Path,
    split_seed: u64,
    synthetic: &SyntheticConfig,
) -> Result<Splits> {
    match kind {
        DatasetKind::Adult => {
            let schema = Schema::from_json_file(file(data_dir, "adult.schema.json"))?;
            let train = load_dataset(file(data_dir, "adult_train.csv"), &schema)?;
            let test = load_dataset(file(data_dir, "adult_test.csv"), &schema)?;
            let (tr, te) = encode(&train, &test)?;
            Ok(Splits {
                train: tr,
                test: te,
                dropped_rows: train.dropped + test.dropped,
            })
        }
        DatasetKind::Compas => {
            let schema = Schema::from_json_file(file(data_dir, "compas.schema.json"))?;
            let table = load_dataset(file(data_dir, "compas.csv"), &schema)?;
            let mut order: Vec<usize> = (0..table.len()).collect();
            order.shuffle(&mut rng_from(split_seed, &[0x5B117]));
            let n_test = (COMPAS_TEST_FRACTION * table.len() as f64).round() as usize;
            let (test_idx, train_idx) = order.split_at(n_test);
            let (tr, te) = encode(&table.select(train_idx), &table.select(test_idx))?;
            Ok(Splits {
                train: tr,
                test: te,
                dropped_rows: table.dropped,
            })
        }
        DatasetKind::Synthetic => {
            let train = generate(&SyntheticConfig {
                seed: split_seed.wrapping_mul(2),
                ..synthetic.clone()
            })?;
            let test = generate(&SyntheticConfig {
                seed: split_seed.wrapping_mul(2) + 1,
                n_samples: (synthetic.n_samples / 2).max(1),
                ..synthetic.clone()
            })?;
            Ok(Splits {
                train,
                test,
                dropped_rows: 0,
            })
        }
    }
}
