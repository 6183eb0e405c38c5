//! Exponential integrators for the forced active scalar equation.

mod config;
mod linear;
mod solver;

pub use config::{Integrator, SimulationState, SolverConfig, Strictness, TimeStep, CFL_REFRESH_STEPS, DT_MAX};
pub use linear::linear_propagator;
pub use solver::{cfl_dt, Observer, RunOptions, Solver, BLOWUP_GROWTH, CFL_VELOCITY_FLOOR};

pub(crate) use solver::{linear_response, physical_stage};
