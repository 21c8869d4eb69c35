#![allow(dead_code)]

use cutset_sync::dynamics::{find_equilibrium, newton_multistart, solve_fixed_point, EquilibriumResult};
use cutset_sync::sync_tests::OscillatorSystem;
use cutset_sync::torus::in_embedded_cohesive;
use cutset_sync::PNorm;

/// Slack on `‖Bᵀx‖_∞ ≤ γ` when checking a computed manifold.
pub const DOMAIN_TOL: f64 = 1e-9;

fn inside(sys: &OscillatorSystem, r: &EquilibriumResult, gamma: f64) -> bool {
    r.stable
        && r.residual < 1e-9
        && in_embedded_cohesive(&r.x_star.to_phase(), sys.graph(), gamma).unwrap_or(false)
        && r.max_edge_difference <= gamma + DOMAIN_TOL
}

/// A stable manifold in `S^G(gamma)`, searched with the fixed-point iteration
/// in the given norm, then Newton with continuation, then Newton multistart
/// from points inside the domain.
pub fn stable_manifold_in(
    sys: &OscillatorSystem,
    p: PNorm,
    gamma: f64,
    seed: u64,
) -> Option<EquilibriumResult> {
    if let Ok(r) = solve_fixed_point(sys, p, gamma, 2000, 1e-12) {
        if inside(sys, &r, gamma) {
            return Some(r);
        }
    }
    if let Ok(r) = find_equilibrium(sys, 64) {
        if inside(sys, &r, gamma) {
            return Some(r);
        }
    }
    newton_multistart(sys, 50, Some(gamma), seed)
        .into_iter()
        .find(|r| inside(sys, r, gamma))
}
