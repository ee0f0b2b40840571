//! Drum-Buffer-Rope flow shop simulation and simulation budget management.
//!
//! * [`model`]: domain types and seeded stochastic primitives.
//! * [`scheduler`]: forward bottleneck scheduling with deviation-driven rescheduling.
//! * [`sim`]: the five-station flow shop as a discrete-event simulation.
//! * [`cost`]: time-weighted WIP/FGI/backorder levels and overall cost.
//! * [`sbm`]: percentile-based skipping of unpromising replications.
//! * [`experiment`]: full factorial and budget-managed parameter sweeps.

pub mod cost;
pub mod error;
pub mod experiment;
pub mod model;
pub mod sbm;
pub mod scheduler;
pub mod sim;

pub use cost::{overall_cost, CostRates, LevelIntegrator};
pub use error::{Error, Result};
pub use experiment::{
    find_optimum, replication_seed, run_environment, run_sweep, savings_deltas, ExecutionMode,
    ExperimentPlan, IterationResult, Method, Optimum, ReplicationCache, SeedScheme, SimEvaluator,
};
pub use model::{Environment, ModelConstants, PlanningParameters, ReleaseRule, Time};
pub use sbm::{SbmPreset, SbmSettings};
pub use scheduler::BottleneckSchedule;
pub use sim::{ShopModel, SimulationResult};
