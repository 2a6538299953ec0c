//! Tabular data: ingestion, encoding and federated partitioning.

mod dataset;
mod partition;
mod preprocess;
mod schema;
pub mod synthetic;
mod table;

pub use dataset::{FeatureKind, Sample, TabularDataset};
pub use partition::{
    cell_probs, dirichlet_partition, partition, pure_group_partition, CellProbs, ClientShard,
    PartitionConfig, PartitionMode, MAX_DIRICHLET_DRAWS,
};
pub use preprocess::{preprocess, Preprocessor};
pub use schema::{ColumnKind, ColumnRole, ColumnSpec, Schema};
pub use table::{load_dataset, RawTable, RawValue};
