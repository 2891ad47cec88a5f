//! Particle swarm estimation of the physical parameters under sixteen
//! matrix cost functions.

mod aggregate;
mod cost;
mod pso;

pub use aggregate::{median, pso_aggregate, AggregateResult, DISCARD_FACTOR};
pub use cost::{cost, error_matrix, matrix_cost, relative_error_matrix, CostFunction, CostId};
pub use pso::{
    move_particle, pso_run, pso_step, run_swarm, Bounds, Particle, PsoConfig, SearchBox, Swarm,
    SwarmRunResult,
};
