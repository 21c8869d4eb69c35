use std::f64::consts::{FRAC_PI_2, TAU};

use cutset_sync::dynamics::{
    edge_residual, nodal_residual, simulate, solve_acyclic, solve_newton, SimConfig,
};
use cutset_sync::generators::{random_connected, random_frequencies, random_tree, Weights};
use cutset_sync::maf::{self, MafConfig};
use cutset_sync::projection::CutsetProjection;
use cutset_sync::sync_tests::{
    g_function, h_n, test_at0, test_t0, test_t2, test_t3, OscillatorSystem,
};
use cutset_sync::torus::{embed, PhaseState};
use cutset_sync::{linalg, Graph, PNorm};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_from(seed: u64, n: usize, weighted: bool) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = if weighted {
        Weights::Uniform(0.2, 3.0)
    } else {
        Weights::Unit
    };
    random_connected(&mut rng, n, 0.35, w)
}

fn system_from(seed: u64, n: usize, weighted: bool) -> OscillatorSystem {
    let g = graph_from(seed, n, weighted);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let w = random_frequencies(&mut rng, n);
    OscillatorSystem::new(g, w.as_slice()).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn edge_flow_bounded_by_fiedler_ratio_unweighted(seed in any::<u64>(), n in 2usize..12) {
        let sys = system_from(seed, n, false);
        let flow = sys.edge_flow().norm();
        let bound = sys.graph().edge_differences(sys.omega().as_slice()).norm() / sys.lambda2();
        prop_assert!(flow <= bound + 1e-9, "{flow} > {bound}");
    }

    #[test]
    fn t0_implies_t2_at_quarter_turn(seed in any::<u64>(), n in 2usize..12, scale in 0.01f64..3.0) {
        let sys = system_from(seed, n, false).scaled(scale);
        if test_t0(&sys).passed() {
            prop_assert!(test_t2(&sys, FRAC_PI_2).unwrap().passed());
        }
    }

    #[test]
    fn test_sides_are_homogeneous(seed in any::<u64>(), n in 2usize..10, k in 0.01f64..50.0) {
        let sys = system_from(seed, n, true);
        let scaled = sys.scaled(k);
        let pairs = [
            (test_t0(&sys), test_t0(&scaled)),
            (test_at0(&sys), test_at0(&scaled)),
            (test_t3(&sys, PNorm::One).unwrap(), test_t3(&scaled, PNorm::One).unwrap()),
            (test_t3(&sys, PNorm::Inf).unwrap(), test_t3(&scaled, PNorm::Inf).unwrap()),
        ];
        for (a, b) in pairs {
            let (la, lb) = (a.lhs.unwrap(), b.lhs.unwrap());
            prop_assert!((lb - k * la).abs() <= 1e-10 * (1.0 + k * la));
            prop_assert_eq!(a.threshold, b.threshold);
        }
    }

    #[test]
    fn margin_matches_sides(seed in any::<u64>(), n in 2usize..10) {
        let sys = system_from(seed, n, true);
        for r in [test_t0(&sys), test_at0(&sys), test_t3(&sys, PNorm::Two).unwrap()] {
            let (l, t) = (r.lhs.unwrap(), r.threshold.unwrap());
            prop_assert!((r.margin.unwrap() - (t - l)).abs() <= 1e-12);
            let expected = if r.strict { l < t } else { l <= t };
            prop_assert_eq!(r.passed(), expected);
        }
    }

    #[test]
    fn projection_is_oblique_projector_onto_cutset(seed in any::<u64>(), n in 2usize..12, weighted in any::<bool>()) {
        let g = graph_from(seed, n, weighted);
        let cp = CutsetProjection::new(&g).unwrap();
        let p = cp.matrix();
        prop_assert!((p * p - p).amax() < 1e-9);
        let bt = g.incidence_matrix().transpose();
        prop_assert!((p * &bt - &bt).amax() < 1e-9);
        let ba = g.incidence_matrix() * DMatrix::from_diagonal(&g.weights());
        // Cycle-space vectors (kernel of B𝒜) are annihilated.
        let cycles = linalg::null_space(&ba).unwrap();
        prop_assert_eq!(cycles.ncols(), g.m() + 1 - g.n());
        if cycles.ncols() > 0 {
            prop_assert!((p * cycles).amax() < 1e-9);
        }
        let norms = cp.norms();
        prop_assert!(norms.two >= 1.0 - 1e-9);
        if !weighted {
            prop_assert!((norms.two - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn g_is_decreasing(a in 1.0f64..100.0, d in 1e-6f64..10.0) {
        prop_assert!(g_function(a + d).unwrap() < g_function(a).unwrap());
    }

    #[test]
    fn h_n_ordering(gamma in 0.0f64..FRAC_PI_2, n in 2u32..200, k in 1u32..50) {
        let (n, m) = (n as f64, (n + k) as f64);
        prop_assert!(h_n(m, gamma) <= h_n(n, gamma) + 1e-15);
        prop_assert!(h_n(n, gamma) <= gamma.sin() + 1e-15);
    }

    #[test]
    fn embedding_is_rotation_invariant(seed in any::<u64>(), n in 2usize..10, s in 0.0f64..TAU) {
        let g = graph_from(seed, n, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = PhaseState::new((0..n).map(|_| rng.gen_range(0.0..TAU)).collect());
        let a = embed(&theta, &g).unwrap();
        let b = embed(&theta.rotate(s), &g).unwrap();
        prop_assert!((a.as_vector() - b.as_vector()).amax() < 1e-9);
        prop_assert!(a.as_vector().sum().abs() < 1e-9);
        // exp(i·x) recovers θ up to a common rotation.
        let shift = theta.angles()[0] - a.as_vector()[0];
        for (t, x) in theta.angles().iter().zip(a.as_vector().iter()) {
            let d = (t - x - shift).rem_euclid(TAU);
            prop_assert!(d.min(TAU - d) < 1e-9);
        }
    }

    #[test]
    fn simulation_commutes_with_rotation(seed in any::<u64>(), n in 2usize..7, s in 0.0f64..TAU) {
        let sys = system_from(seed, n, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        let shifted: Vec<f64> = theta0.iter().map(|t| t + s).collect();
        let cfg = SimConfig { dt: 0.01, t_end: 2.0, stride: 50 };
        let a = simulate(&sys, &theta0, &cfg).unwrap();
        let b = simulate(&sys, &shifted, &cfg).unwrap();
        let diff = b.final_unwrapped() - a.final_unwrapped();
        prop_assert!(diff.iter().all(|d| (d - s).abs() < 1e-9));
        // The mean phase drifts at exactly the synchronous frequency.
        let mean0 = theta0.iter().sum::<f64>() / n as f64;
        let drift = a.final_unwrapped().mean() - mean0;
        prop_assert!((drift - sys.omega_syn() * cfg.t_end).abs() < 1e-9);
    }

    #[test]
    fn newton_equilibria_balance(seed in any::<u64>(), n in 2usize..9, weighted in any::<bool>()) {
        let sys = system_from(seed, n, weighted).scaled(0.3);
        let r = solve_newton(&sys, &vec![0.0; n], 100, 1e-12).unwrap();
        let x: Vec<f64> = r.x_star.as_vector().iter().copied().collect();
        prop_assert!(nodal_residual(&sys, &x) < 1e-10);
        prop_assert!(edge_residual(&sys, &x).unwrap() < 1e-9);
        prop_assert!(r.stable);
    }

    #[test]
    fn tree_manifold_is_unique_in_domain(seed in any::<u64>(), n in 2usize..10, gamma in 0.2f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_tree(&mut rng, n, Weights::Uniform(0.5, 2.0));
        let w = random_frequencies(&mut rng, n);
        let sys = OscillatorSystem::new(g, w.as_slice()).unwrap();
        let flow = sys.edge_flow().amax();
        prop_assume!(flow > 1e-9);
        // Place the flow strictly inside the feasible region.
        let sys = sys.scaled(0.9 * gamma.sin() / flow);
        let explicit = solve_acyclic(&sys, gamma).unwrap();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let newton = solve_newton(&sys, &x0, 100, 1e-12).unwrap();
        if newton.max_edge_difference <= gamma {
            prop_assert!((newton.x_star.as_vector() - explicit.x_star.as_vector()).amax() < 1e-8);
        }
    }

    #[test]
    fn alpha_lower_bound_below_estimate(seed in any::<u64>(), n in 2usize..6, gamma in 0.1f64..1.5) {
        let g = graph_from(seed, n, true);
        let cfg = MafConfig { starts: 8, iters: 120, seed };
        for p in [PNorm::Two, PNorm::Inf] {
            let est = maf::estimate_alpha(&g, p, gamma, &cfg).unwrap();
            prop_assert!(est.lower_bound <= est.numeric_estimate.unwrap() + 1e-9);
            prop_assert!(est.numeric_estimate.unwrap() > 0.0);
        }
    }

    #[test]
    fn alpha_path_is_nonincreasing(seed in any::<u64>(), n in 2usize..5) {
        let g = graph_from(seed, n, false);
        let cfg = MafConfig { starts: 6, iters: 100, seed };
        let gammas = [0.2, 0.5, 0.9, 1.3];
        let path = maf::estimate_alpha_path(&g, PNorm::Inf, &gammas, &cfg).unwrap();
        for w in path.windows(2) {
            prop_assert!(w[1].numeric_estimate.unwrap() <= w[0].numeric_estimate.unwrap() + 1e-12);
        }
    }
}

/// With nonuniform weights the eigenvectors of `B𝒜Bᵀ` are no longer left
/// singular vectors of `B`, and the Fiedler-ratio bound can fail.
#[test]
fn fiedler_ratio_bound_fails_on_weighted_path() {
    let g = Graph::new(3, &[(0, 1, 0.20582458), (1, 2, 2.54024811)]).unwrap();
    let sys = OscillatorSystem::new(g, &[1.13375021, -0.2439545, -0.8897957]).unwrap();
    let flow = sys.edge_flow().norm();
    let bound = sys.graph().edge_differences(sys.omega().as_slice()).norm() / sys.lambda2();
    assert!(flow > 1.09 * bound, "{flow} vs {bound}");
}

#[test]
fn fiedler_ratio_bound_is_tight_on_fiedler_vectors() {
    for seed in 0..20 {
        let g = graph_from(seed, 7, true);
        let v = g.laplacian_bundle().unwrap().fiedler_vector().unwrap();
        let sys = OscillatorSystem::new(g, v.as_slice()).unwrap();
        let flow = sys.edge_flow().norm();
        let bound = sys.graph().edge_differences(sys.omega().as_slice()).norm() / sys.lambda2();
        assert!((flow - bound).abs() < 1e-9 * bound.max(1.0), "{flow} vs {bound}");
    }
}

#[test]
fn sinc_series_matches_closed_form() {
    for &x in &[0.0, 1e-6, 5e-5, 9.9e-5, 1e-4, 1e-3, 0.5, 1.5] {
        let direct = if x == 0.0 { 1.0 } else { f64::sin(x) / x };
        assert!((maf::sinc(x) - direct).abs() < 1e-15, "{x}");
    }
}

#[test]
fn tree_alpha_matches_sinc() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_tree(&mut rng, 5, Weights::Uniform(0.5, 2.0));
    let cfg = MafConfig { starts: 16, iters: 300, seed: 1 };
    for gamma in [0.3, 0.8, 1.4] {
        let est = maf::estimate_alpha(&g, PNorm::Inf, gamma, &cfg).unwrap();
        assert!((est.lower_bound - maf::sinc(gamma)).abs() < 1e-12);
        assert!((est.numeric_estimate.unwrap() - maf::sinc(gamma)).abs() < 1e-4);
    }
}
