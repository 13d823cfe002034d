//! Replica-coupled solvers for binary-weight networks and K-SAT, plus an
//! experiment harness.

pub mod fbp;
pub mod harness;
pub mod ksat;
pub mod model;
pub mod rsa;
pub mod rsgd;

pub use harness::{RunRecord, RunStatus};
pub use model::{NetworkKind, Pattern, PatternCache, PatternSet, Topology, WeightConfig};
