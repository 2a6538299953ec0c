//! Federated simulation: client updates, server reductions, and the
//! training loop shared by FedAvg, LRW, FairFed and FedGFT.

mod client;
mod config;
mod eval;
mod probe;
mod server;
mod trace;
mod train;

pub use client::{
    client_summary, client_update, lrw_weights, ClientExtras, ClientSummary, FairnessTerm,
};
pub use config::{Algorithm, TrainConfig};
pub use eval::{evaluate, Evaluation};
pub use probe::{gradient_norm_probe, penalized_gradient, penalized_objective, GradientProbe};
pub use server::{
    aggregate, const_from_summaries, const_update, fairfed_weights, pooled_denominators,
    restrict_weights, ConstUpdate,
};
pub use trace::{RoundRecord, TrainTrace};
pub use train::{run_training, RoundState, TrainOutcome};
