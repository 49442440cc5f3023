//! Simulation and steady-state theory for the BFW(α) explosive-percolation
//! process on the complete graph.

pub mod cli;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod observables;
pub mod partition;
pub mod theory;

pub use engine::{cap_increments, Engine, EngineConfig, RunOutput, StageCap, StepCase, StepOutcome};
pub use ensemble::{run_ensemble, EnsembleConfig, EnsembleSummary, InstanceResult};
pub use error::{BfwError, Result};
pub use observables::{SteadyCriteria, SteadyStateReport, TraceRecord};
pub use partition::ComponentPartition;
pub use theory::{predict, TheoryOptions, TheoryPrediction};
