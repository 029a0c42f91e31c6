//! Pairwise comparison matrices, EV/GM prioritization, CI/KI inconsistency
//! indices, and a Monte Carlo study of how often individual order-preservation
//! conditions (POP and POIP) hold.

pub mod cli;
pub mod cop;
pub mod inconsistency;
pub mod pcm;
pub mod priority;
pub mod reference;
pub mod simulator;

pub use cop::{CopReport, ConditionCount};
pub use inconsistency::{koczkodaj_ki, saaty_ci, InconsistencyReport};
pub use pcm::{generate_consistent, perturb, DeltaScheme, DisturbanceSpec, GroundTruthWeights, PcMatrix, PcmError};
pub use priority::{ev_weights, gm_weights, EigenResult, Method, PriorityError, PriorityVector};
pub use simulator::{aggregate_tables, bin_by_ki, run_experiment, AggregateRow, ExperimentConfig, MatrixRecord};
