//! Structural evasion attacks against LinLBP collective classification.
//!
//! The crate covers the whole pipeline: loading and synthesizing labeled
//! graphs, LinLBP propagation, cost models, target selection, the
//! alternating projected-gradient attack, the Random and Del-Add baselines,
//! partial-knowledge wrappers, and an experiment harness that writes CSV
//! reports.
//!
//! Data-parallel loops use rayon when the `parallel` feature is enabled
//! (the default). Every entry point produces the same output with or
//! without it.

pub mod attack;
pub mod baselines;
pub mod cost;
pub mod error;
pub mod exec;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod propagation;
pub mod rng;
pub mod scenarios;
pub mod targets;

pub use attack::{run_attack, AttackConfig, AttackResult};
pub use cost::{CostModel, GraphCosts, PairCosts};
pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{FlipSet, Graph, Label, NodeId, TrainingSet};
pub use propagation::{LinLbpParams, PosteriorState};
