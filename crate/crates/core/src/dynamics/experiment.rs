//! Empirical check that frequency synchronization from an open set of initial
//! conditions goes together with the existence of a stable synchronization
//! manifold.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed;
use crate::sync_tests::OscillatorSystem;
use crate::torus::{embed, PhaseState};

use super::equilibrium::{find_equilibrium, newton_multistart, solve_newton, EquilibriumResult, SOLVER_TOL};
use super::simulate::{detect_frequency_sync, simulate, SimConfig};

/// Largest system the experiment accepts.
pub const EXPERIMENT_MAX_NODES: usize = 10;

/// `‖embed(a) − embed(b)‖_∞`: distance between two torus points up to a
/// common rotation.
pub fn embedded_distance(sys: &OscillatorSystem, a: &PhaseState, b: &PhaseState) -> Result<f64> {
    let xa = embed(a, sys.graph())?;
    let xb = embed(b, sys.graph())?;
    Ok((xa.as_vector() - xb.as_vector()).amax())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub seed: u64,
    /// Half-width of the uniform perturbation around a stable equilibrium.
    pub perturbation: f64,
    pub newton_starts: usize,
    /// Frequency tolerance of the sync detector.
    pub sync_tol: f64,
    /// Distance below which a limit point is identified with `x*`.
    pub match_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: 10,
            seed: seed::DEFAULT_SEED,
            perturbation: 0.1,
            newton_starts: 50,
            sync_tol: 1e-6,
            match_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    /// Synchronized and the limit matches the stable equilibrium.
    SyncedMatched,
    /// Synchronized to a different manifold.
    SyncedOther,
    /// Did not synchronize.
    NotSynced,
    /// Synchronized although no stable equilibrium was found beforehand;
    /// polishing the limit did produce a stable equilibrium, so the search
    /// missed it.
    Inconclusive,
    /// Behavior incompatible with the equivalence.
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub stable_equilibrium_found: bool,
    pub x_star: Option<Vec<f64>>,
    pub t_end: f64,
    pub dt: f64,
    pub outcomes: Vec<TrialOutcome>,
    pub synced: usize,
    pub matched: usize,
    pub inconclusive: usize,
    pub contradictions: usize,
}

fn first_stable(sys: &OscillatorSystem, config: &ExperimentConfig) -> Option<EquilibriumResult> {
    if let Ok(r) = find_equilibrium(sys, 64) {
        if r.stable {
            return Some(r);
        }
    }
    newton_multistart(sys, config.newton_starts, None, config.seed)
        .into_iter()
        .find(|r| r.stable)
}

/// Simulation settings for the experiment: RK4 at `dt = min(0.01, 0.25/rate)`
/// and a horizon long enough for a perturbation to decay below the sync
/// tolerance at rate `decay`.
fn experiment_sim(sys: &OscillatorSystem, decay: Option<f64>) -> SimConfig {
    let rate = sys.omega_raw().amax() + 2.0 * sys.graph().max_weighted_degree();
    let dt = (0.25 / rate.max(1e-12)).min(0.01);
    let t_end = match decay {
        Some(l) if l > 0.0 => (30.0 / l).clamp(100.0, 3000.0),
        _ => 100.0,
    };
    SimConfig {
        dt,
        t_end,
        stride: ((0.1 / dt).ceil() as usize).max(1),
    }
}

pub fn equivalence_experiment(sys: &OscillatorSystem, config: &ExperimentConfig) -> Result<EquivalenceReport> {
    let n = sys.n();
    if n > EXPERIMENT_MAX_NODES {
        return Err(Error::TooLarge {
            n,
            max: EXPERIMENT_MAX_NODES,
        });
    }
    let stable = first_stable(sys, config);
    let sim = experiment_sim(sys, stable.as_ref().map(|r| r.jacobian_lambda2));
    let window = 0.1 * sim.t_end;

    let outcomes: Vec<Result<TrialOutcome>> = (0..config.trials)
        .into_par_iter()
        .map(|idx| {
            let mut rng = seed::job_stream(config.seed, "equivalence_trial", idx);
            let theta0: Vec<f64> = match &stable {
                Some(r) => r
                    .x_star
                    .as_vector()
                    .iter()
                    .map(|x| x + rng.gen_range(-config.perturbation..config.perturbation))
                    .collect(),
                None => (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect(),
            };
            let traj = simulate(sys, &theta0, &sim)?;
            let (synced, _) = detect_frequency_sync(&traj, window, config.sync_tol)?;
            Ok(match (&stable, synced) {
                (Some(r), true) => {
                    let d = embedded_distance(sys, traj.final_state(), &r.x_star.to_phase())?;
                    if d < config.match_tol {
                        TrialOutcome::SyncedMatched
                    } else {
                        TrialOutcome::SyncedOther
                    }
                }
                (Some(_), false) => TrialOutcome::Contradiction,
                (None, false) => TrialOutcome::NotSynced,
                (None, true) => {
                    let limit: Vec<f64> = centered(traj.final_unwrapped());
                    match solve_newton(sys, &limit, 100, SOLVER_TOL) {
                        Ok(r) if r.stable => TrialOutcome::Inconclusive,
                        _ => TrialOutcome::Contradiction,
                    }
                }
            })
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let count = |f: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
    Ok(EquivalenceReport {
        stable_equilibrium_found: stable.is_some(),
        x_star: stable.map(|r| r.x_star.as_vector().iter().copied().collect()),
        t_end: sim.t_end,
        dt: sim.dt,
        synced: count(&|o| {
            matches!(
                o,
                TrialOutcome::SyncedMatched | TrialOutcome::SyncedOther | TrialOutcome::Inconclusive
            )
        }),
        matched: count(&|o| *o == TrialOutcome::SyncedMatched),
        inconclusive: count(&|o| *o == TrialOutcome::Inconclusive),
        contradictions: count(&|o| *o == TrialOutcome::Contradiction),
        outcomes,
    })
}

fn centered(x: &DVector<f64>) -> Vec<f64> {
    let mean = x.mean();
    x.iter().map(|v| v - mean).collect()
}
