//! Schedulability analysis, simulation and evaluation of parallel DAG tasks
//! sharing spin-lock protected resources under federated scheduling.

pub mod analysis_fifo;
pub mod analysis_priority;
pub mod analysis_unordered;
pub mod framework;
pub mod harness;
pub mod model;
pub mod simulator;
pub mod workload;

pub use framework::{AnalysisError, Bound, Verdict};
pub use model::{DagTask, ModelError, ResourceUsage, TaskSet, Time};
