//! Equilibria of the Kuramoto model: solutions of `ω = B𝒜 sin(Bᵀx)`, their
//! stability, and solvers (fixed-point iteration in edge coordinates, damped
//! Newton on `1ₙ⊥`, and the explicit tree formula).

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, PNorm};
use crate::maf::sinc;
use crate::seed;
use crate::sync_tests::{self, OscillatorSystem};
use crate::torus::EmbeddedState;

/// `λ₂(−J)` must exceed this for an equilibrium to count as stable.
pub const STABILITY_THRESHOLD: f64 = 1e-9;
/// Residual above which `check_stability` refuses a point.
pub const EQUILIBRIUM_TOL: f64 = 1e-6;
/// Default nodal residual tolerance of the solvers.
pub const SOLVER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    FixedPoint,
    Newton,
    ExplicitAcyclic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub x_star: EmbeddedState,
    /// `‖ω − B𝒜 sin(Bᵀx*)‖_∞`.
    pub residual: f64,
    pub stable: bool,
    /// Smallest eigenvalue of `−J = L_{cos(Bᵀx*)}` on `1ₙ⊥`.
    pub jacobian_lambda2: f64,
    pub solver: SolverTag,
    pub iterations: usize,
    /// `‖Bᵀx*‖_∞`.
    pub max_edge_difference: f64,
}

/// `B𝒜 sin(Bᵀx) − ω`.
pub fn balance_map(sys: &OscillatorSystem, x: &[f64]) -> DVector<f64> {
    let g = sys.graph();
    let sines: Vec<f64> = g.edge_differences(x).iter().map(|d| d.sin()).collect();
    g.weighted_divergence(&sines) - sys.omega()
}

/// Nodal balance residual `‖ω − B𝒜 sin(Bᵀx)‖_∞`.
pub fn nodal_residual(sys: &OscillatorSystem, x: &[f64]) -> f64 {
    balance_map(sys, x).amax()
}

/// Edge balance residual `‖BᵀL†ω − P sin(Bᵀx)‖_∞`.
pub fn edge_residual(sys: &OscillatorSystem, x: &[f64]) -> Result<f64> {
    let g = sys.graph();
    let sines = g.edge_differences(x).map(f64::sin);
    let p = sys.projection()?.matrix();
    Ok((sys.edge_flow() - p * sines).amax())
}

/// Eigen-decomposition of `Uᵀ L_{cos(Bᵀx)} U` with `U` an orthonormal basis
/// of `1ₙ⊥`.
fn reduced_jacobian(sys: &OscillatorSystem, x: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let g = sys.graph();
    let cosines: Vec<f64> = g.edge_differences(x).iter().map(|d| d.cos()).collect();
    let l = g.scaled_laplacian(&cosines)?;
    let u = linalg::ones_complement_basis(g.n());
    let reduced = u.transpose() * l * &u;
    let (values, vectors) = linalg::sym_eigen_sorted(&reduced)?;
    Ok((u, values, vectors))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stability {
    pub stable: bool,
    /// Smallest eigenvalue of `−J` on `1ₙ⊥`.
    pub jacobian_lambda2: f64,
    /// Largest eigenvalue of `−J` on `1ₙ⊥`.
    pub jacobian_lambda_max: f64,
}

/// Linear stability of an equilibrium: `J = −B𝒜 diag(cos(Bᵀx))Bᵀ` must be
/// negative definite on `1ₙ⊥`.
pub fn check_stability(sys: &OscillatorSystem, x: &[f64]) -> Result<Stability> {
    if x.len() != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: sys.n(),
            found: x.len(),
        });
    }
    let residual = nodal_residual(sys, x);
    if !(residual < EQUILIBRIUM_TOL) {
        return Err(Error::NotAnEquilibrium { residual });
    }
    if sys.n() == 1 {
        return Ok(Stability {
            stable: true,
            jacobian_lambda2: f64::INFINITY,
            jacobian_lambda_max: f64::INFINITY,
        });
    }
    let (_, values, _) = reduced_jacobian(sys, x)?;
    let lambda2 = values[0];
    Ok(Stability {
        stable: lambda2 > STABILITY_THRESHOLD,
        jacobian_lambda2: lambda2,
        jacobian_lambda_max: values[values.len() - 1],
    })
}

fn finish(
    sys: &OscillatorSystem,
    x: DVector<f64>,
    solver: SolverTag,
    iterations: usize,
) -> Result<EquilibriumResult> {
    let x_star = EmbeddedState::new(x);
    let xs = x_star.as_vector().as_slice();
    let residual = nodal_residual(sys, xs);
    let stability = check_stability(sys, xs)?;
    let max_edge_difference = x_star.max_edge_difference(sys.graph());
    Ok(EquilibriumResult {
        residual,
        stable: stability.stable,
        jacobian_lambda2: stability.jacobian_lambda2,
        solver,
        iterations,
        max_edge_difference,
        x_star,
    })
}

/// Damped Newton on `F(x) = B𝒜 sin(Bᵀx) − ω` restricted to `1ₙ⊥`, with
/// backtracking on `‖F‖₂`. Converged when `‖F‖_∞ < tol`.
pub fn solve_newton(
    sys: &OscillatorSystem,
    x_init: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<EquilibriumResult> {
    let n = sys.n();
    if x_init.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x_init.len(),
        });
    }
    let mut x = DVector::from_column_slice(x_init);
    linalg::center(&mut x);
    let mut f = balance_map(sys, x.as_slice());
    for iteration in 0..=max_iter {
        if f.amax() < tol {
            return finish(sys, x, SolverTag::Newton, iteration);
        }
        if iteration == max_iter {
            break;
        }
        let (u, values, vectors) = reduced_jacobian(sys, x.as_slice())?;
        let scale = values.amax().max(1.0);
        let smallest = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        if smallest < 1e-13 * scale {
            return Err(Error::SingularJacobian { lambda: smallest });
        }
        // Solve (UᵀJU) δ = −UᵀF through the eigenbasis.
        let rhs = vectors.transpose() * (u.transpose() * &f);
        let coeffs = DVector::from_iterator(rhs.len(), rhs.iter().zip(values.iter()).map(|(r, v)| -r / v));
        let dx = &u * (&vectors * coeffs);

        let merit = f.norm();
        let mut t = 1.0;
        loop {
            let trial = &x + &dx * t;
            let f_trial = balance_map(sys, trial.as_slice());
            if f_trial.norm() <= (1.0 - 1e-4 * t) * merit {
                x = trial;
                f = f_trial;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::NoConvergence {
                    iterations: iteration,
                    residual: f.amax(),
                });
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: f.amax(),
    })
}

/// Iterates `y_{k+1} = BᵀL†_{sinc(y_k)}ω` from `y₀ = 0` while checking that
/// every iterate stays in `‖y‖_p ≤ γ`. The limit `y` is lifted by least
/// squares on `Bᵀx = y` and polished with Newton.
pub fn solve_fixed_point(
    sys: &OscillatorSystem,
    p: PNorm,
    gamma: f64,
    max_iter: usize,
    tol: f64,
) -> Result<EquilibriumResult> {
    let g = sys.graph();
    let m = g.m();
    let mut y = DVector::zeros(m);
    let mut converged_at = None;
    for iteration in 1..=max_iter {
        let s: Vec<f64> = y.iter().map(|&v| sinc(v)).collect();
        let pinv = linalg::pinv_sym(&g.scaled_laplacian(&s)?)?;
        let potentials = pinv * sys.omega();
        let next = g.edge_differences(potentials.as_slice());
        let norm = p.vector_norm(&next);
        if norm > gamma * (1.0 + 1e-12) {
            return Err(Error::IterateLeftDomain {
                iteration,
                norm,
                gamma,
            });
        }
        let step = (&next - &y).amax();
        y = next;
        if step < tol {
            converged_at = Some(iteration);
            break;
        }
    }
    let Some(iterations) = converged_at else {
        return Err(Error::NoConvergence {
            iterations: max_iter,
            residual: nodal_residual(sys, lift_edge_vector(sys, &y)?.as_slice()),
        });
    };
    let x = lift_edge_vector(sys, &y)?;
    let polished = solve_newton(sys, x.as_slice(), 50, SOLVER_TOL.max(tol))?;
    Ok(EquilibriumResult {
        solver: SolverTag::FixedPoint,
        iterations,
        ..polished
    })
}

/// Least-squares solution of `Bᵀx = y` in `1ₙ⊥`: `x = (BBᵀ)†By`.
pub fn lift_edge_vector(sys: &OscillatorSystem, y: &DVector<f64>) -> Result<DVector<f64>> {
    let g = sys.graph();
    let b = g.incidence_matrix();
    let pinv = linalg::pinv_sym(&(&b * b.transpose()))?;
    Ok(pinv * (b * y))
}

/// The explicit manifold of a tree, when one exists in `S^G(γ)`.
pub fn solve_acyclic(sys: &OscillatorSystem, gamma: f64) -> Result<EquilibriumResult> {
    let res = sync_tests::acyclic_characterization(sys, gamma)?;
    match res.x_star {
        Some(x) => finish(sys, x.into_vector(), SolverTag::ExplicitAcyclic, 0),
        None => Err(Error::DomainError(format!(
            "no synchronization manifold in S^G({gamma}): edge flow {} exceeds sin(gamma)",
            res.record.lhs.unwrap_or(f64::NAN)
        ))),
    }
}

/// Newton from `x = 0`; when that fails, continuation in the frequency
/// scale `K ∈ (0, 1]` over `steps` points, warm-starting each solve.
pub fn find_equilibrium(sys: &OscillatorSystem, steps: usize) -> Result<EquilibriumResult> {
    let zero = vec![0.0; sys.n()];
    match solve_newton(sys, &zero, 100, SOLVER_TOL) {
        Ok(r) => return Ok(r),
        Err(Error::NoConvergence { .. } | Error::SingularJacobian { .. }) => {}
        Err(e) => return Err(e),
    }
    let steps = steps.max(1);
    let mut x = zero;
    let mut last = None;
    for k in 1..=steps {
        let scaled = sys.scaled(k as f64 / steps as f64);
        let r = solve_newton(&scaled, &x, 100, SOLVER_TOL)?;
        x = r.x_star.as_vector().iter().copied().collect();
        last = Some(r);
    }
    let r = last.expect("at least one continuation step");
    finish(sys, r.x_star.into_vector(), SolverTag::Newton, r.iterations)
}

/// Random initial point with `‖Bᵀx‖_∞ ≤ γ` when `gamma` is given, or uniform
/// on the torus otherwise.
pub fn random_start<R: Rng>(sys: &OscillatorSystem, gamma: Option<f64>, rng: &mut R) -> Vec<f64> {
    let n = sys.n();
    match gamma {
        None => (0..n).map(|_| rng.gen_range(0.0..TAU)).collect(),
        Some(gamma) => {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let spread = sys.graph().edge_differences(&u).amax();
            let target = gamma * rng.gen_range(0.0..1.0);
            let scale = if spread > 0.0 { target / spread } else { 0.0 };
            u.iter().map(|v| v * scale).collect()
        }
    }
}

/// Newton from `starts` seeded random points. Returns the converged results
/// (failed starts are dropped), in start order.
pub fn newton_multistart(
    sys: &OscillatorSystem,
    starts: usize,
    gamma: Option<f64>,
    seed_value: u64,
) -> Vec<EquilibriumResult> {
    (0..starts)
        .into_par_iter()
        .filter_map(|idx| {
            let mut rng = seed::job_stream(seed_value, "newton_multistart", idx);
            let x0 = random_start(sys, gamma, &mut rng);
            solve_newton(sys, &x0, 100, SOLVER_TOL).ok()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p2(w: f64) -> OscillatorSystem {
        OscillatorSystem::new(Graph::path(2).unwrap(), &[w, -w]).unwrap()
    }

    #[test]
    fn newton_at_a_solution_takes_no_steps() {
        let sys = p2(0.5);
        let x = [PI / 12.0, -PI / 12.0];
        let r = solve_newton(&sys, &x, 20, 1e-12).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.stable);
    }

    #[test]
    fn newton_on_triangle() {
        let sys = OscillatorSystem::new(Graph::complete(3).unwrap(), &[0.3, -0.15, -0.15]).unwrap();
        let r = solve_newton(&sys, &[0.0; 3], 50, 1e-12).unwrap();
        assert!(r.residual < 1e-10);
        assert!(r.stable);
        assert!(edge_residual(&sys, r.x_star.as_vector().as_slice()).unwrap() < 1e-8);
    }

    #[test]
    fn newton_fails_without_a_solution() {
        let err = solve_newton(&p2(1.1), &[0.0, 0.0], 100, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }), "{err:?}");
    }

    #[test]
    fn fixed_point_examples() {
        let zero = OscillatorSystem::new(Graph::ring(4).unwrap(), &[0.0; 4]).unwrap();
        let r = solve_fixed_point(&zero, PNorm::Two, 1.0, 100, 1e-12).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.x_star.as_vector().amax() < 1e-15);

        let r = solve_fixed_point(&p2(0.5), PNorm::Inf, FRAC_PI_2 - 1e-9, 500, 1e-13).unwrap();
        let x = r.x_star.as_vector();
        assert!((x[0] - PI / 12.0).abs() < 1e-10 && (x[1] + PI / 12.0).abs() < 1e-10);
    }

    #[test]
    fn fixed_point_on_tree_matches_formula() {
        let sys = OscillatorSystem::new(Graph::star(4).unwrap(), &[0.9, -0.2, -0.3, -0.4]).unwrap();
        let gamma = 1.2;
        let fp = solve_fixed_point(&sys, PNorm::Inf, gamma, 1000, 1e-13).unwrap();
        let exact = solve_acyclic(&sys, gamma).unwrap();
        let diff = (fp.x_star.as_vector() - exact.x_star.as_vector()).amax();
        assert!(diff < 1e-9, "{diff}");
        assert!(exact.residual < 1e-12);
    }

    #[test]
    fn fixed_point_reports_leaving_the_domain() {
        let err = solve_fixed_point(&p2(0.9), PNorm::Inf, 0.5, 100, 1e-12).unwrap_err();
        assert!(matches!(err, Error::IterateLeftDomain { iteration: 1, .. }));
    }

    #[test]
    fn stability_examples() {
        let k4 = OscillatorSystem::new(Graph::complete(4).unwrap(), &[0.0; 4]).unwrap();
        let s = check_stability(&k4, &[0.0; 4]).unwrap();
        assert!(s.stable && (s.jacobian_lambda2 - 4.0).abs() < 1e-12);

        let marginal = p2(1.0);
        let s = check_stability(&marginal, &[PI / 4.0, -PI / 4.0]).unwrap();
        assert!(!s.stable && s.jacobian_lambda2.abs() < 1e-12);

        let d = PI - 0.5f64.asin();
        let s = check_stability(&p2(0.5), &[d / 2.0, -d / 2.0]).unwrap();
        assert!(!s.stable && s.jacobian_lambda2 < 0.0);

        assert!(matches!(
            check_stability(&p2(0.5), &[0.0, 0.0]),
            Err(Error::NotAnEquilibrium { .. })
        ));
    }

    #[test]
    fn continuation_reaches_hard_instances() {
        let g = Graph::ring(6).unwrap();
        let mut omega = vec![0.0; 6];
        omega[0] = 0.55;
        omega[3] = -0.55;
        let sys = OscillatorSystem::new(g, &omega).unwrap();
        let r = find_equilibrium(&sys, 64).unwrap();
        assert!(r.residual < 1e-9);
    }
}
