//! Experiment orchestration: dataset splits, replicated runs, summary
//! tables, sweeps and the randomized identity checks.

mod ablation;
mod datasets;
mod experiment;
mod io;
mod partition_stats;
mod results;
mod theorems;

pub use ablation::{ablation, parse_sweep, AblationOutcome, AblationRow, SweepParam};
pub use datasets::{load_splits, DatasetKind, Splits, COMPAS_TEST_FRACTION};
pub use experiment::{
    run_experiment, run_experiment_on, select_fairfed_beta, select_fedgft_lambda,
    select_on_validation, summarize, ExperimentConfig, ExperimentOutcome, GridSelection,
    ReplicationResult, SELECTION_ACCURACY_SLACK, SELECTION_VALIDATION_FRACTION,
};
pub use io::{write_atomic, write_json_atomic};
pub use partition_stats::{partition_stats, ClientCells, PartitionStats};
pub use results::{mean_stderr, ResultRow, ResultsTable};
pub use theorems::{random_instance, theorem_checks, CheckResult, TheoremReport};

pub use crate::engine::{evaluate, Evaluation};
