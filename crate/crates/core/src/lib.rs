//! Federated learning simulator for group-fair training of logistic models.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`] loads tabular CSV data, encodes it, and splits it across clients
//!   (Dirichlet or pure-group partitions).
//! * [`model`] is a logistic regression with analytic gradients, Adam and a
//!   finite-difference oracle.
//! * [`fairness`] holds the `(a, b, c, d)` statistics behind statistical
//!   parity, equal opportunity and well-calibration, the decomposition of the
//!   pooled metric into per-client components, the heterogeneity coefficient
//!   and the constructions used by the property checks.
//! * [`engine`] runs the federated loop for FedAvg, LRW, FairFed and FedGFT.
//! * [`bench`] evaluates models, replicates experiments, runs ablations and
//!   the randomized property suite.

pub mod bench;
pub mod data;
pub mod engine;
mod error;
pub mod fairness;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
