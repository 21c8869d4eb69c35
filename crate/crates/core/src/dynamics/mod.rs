//! Kuramoto dynamics: simulation, equilibria and their stability.

pub mod equilibrium;
pub mod experiment;
pub mod simulate;

pub use equilibrium::{
    check_stability, edge_residual, find_equilibrium, newton_multistart, nodal_residual,
    solve_acyclic, solve_fixed_point, solve_newton, EquilibriumResult, SolverTag, Stability,
};
pub use experiment::{embedded_distance, equivalence_experiment, EquivalenceReport, ExperimentConfig};
pub use simulate::{detect_frequency_sync, simulate, SimConfig, Trajectory};
