//! Critical coupling `K_c` and per-test critical ratios `K_T / K_c`.
//!
//! Injections are scaled uniformly, `ω = K·ω_nom`. `K_c` is the supremum of
//! `K` for which a synchronization manifold exists in `S^G(π/2)`; it is
//! bracketed by warm-started Newton continuation and refined by bisection.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::dynamics::solve_newton;
use crate::error::{Error, Result};
use crate::linalg::PNorm;
use crate::maf::{self, MafConfig};
use crate::sync_tests::{g_function, OscillatorSystem};
use crate::torus::in_embedded_cohesive;

use super::{PowerCase, VOLTAGE_PROVENANCE};

/// Residual below which a Newton solution counts as an equilibrium.
pub const EXISTENCE_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalConfig {
    /// Relative width of the final bracket.
    pub bisect_tol: f64,
    /// Initial upper end of the continuation; defaults to `2·K_AT0`.
    pub k_hi_init: Option<f64>,
    pub continuation_points: usize,
    /// How many times the upper end may double before giving up.
    pub max_doublings: usize,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        CriticalConfig {
            bisect_tol: 1e-4,
            k_hi_init: None,
            continuation_points: 64,
            max_doublings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalCoupling {
    /// `None` when no finite `K_c` exists (zero injections).
    pub k_c: Option<f64>,
    /// `[K with a manifold, K without one]`.
    pub bracket: Option<[f64; 2]>,
    /// Equilibrium at the lower end of the bracket.
    pub x_at_k_c: Option<Vec<f64>>,
}

/// Newton from `warm` at scale `k`; returns the solution when it lies in
/// `S^G(π/2)`.
pub fn exists_in_half_pi(sys: &OscillatorSystem, k: f64, warm: &[f64]) -> Option<Vec<f64>> {
    let scaled = sys.scaled(k);
    let r = solve_newton(&scaled, warm, 60, EXISTENCE_RESIDUAL * 0.1).ok()?;
    let inside = in_embedded_cohesive(&r.x_star.to_phase(), sys.graph(), FRAC_PI_2).ok()?;
    (r.residual < EXISTENCE_RESIDUAL && inside).then(|| r.x_star.as_vector().iter().copied().collect())
}

pub fn critical_coupling(sys: &OscillatorSystem, config: &CriticalConfig) -> Result<CriticalCoupling> {
    if !(config.bisect_tol > 0.0) || config.continuation_points == 0 {
        return Err(Error::ConfigInvalid(
            "bisect_tol must be positive and continuation_points >= 1".into(),
        ));
    }
    let flow = sys.edge_flow().amax();
    if flow == 0.0 {
        return Ok(CriticalCoupling {
            k_c: None,
            bracket: None,
            x_at_k_c: None,
        });
    }
    let mut k_hi = config.k_hi_init.unwrap_or(2.0 / flow);
    if !(k_hi > 0.0) {
        return Err(Error::ConfigInvalid("k_hi_init must be positive".into()));
    }
    let mut k_lo = 0.0;
    let mut x_lo = vec![0.0; sys.n()];
    let mut failed_at = None;
    'search: for _ in 0..=config.max_doublings {
        let points = config.continuation_points;
        let start = k_lo;
        for j in 1..=points {
            let k = start + (k_hi - start) * j as f64 / points as f64;
            match exists_in_half_pi(sys, k, &x_lo) {
                Some(x) => {
                    k_lo = k;
                    x_lo = x;
                }
                None => {
                    failed_at = Some(k);
                    break 'search;
                }
            }
        }
        k_hi *= 2.0;
    }
    let Some(mut hi) = failed_at else {
        return Err(Error::BracketNotFound { k_hi: k_lo });
    };
    let mut lo = k_lo;
    while hi - lo > config.bisect_tol * hi {
        let mid = 0.5 * (lo + hi);
        match exists_in_half_pi(sys, mid, &x_lo) {
            Some(x) => {
                lo = mid;
                x_lo = x;
            }
            None => hi = mid,
        }
    }
    Ok(CriticalCoupling {
        k_c: Some(lo),
        bracket: Some([lo, hi]),
        x_at_k_c: Some(x_lo),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEntry {
    pub test: String,
    pub rigorous: bool,
    pub norm: PNorm,
    pub threshold: f64,
    /// Left-hand side of the test at `K = 1`.
    pub lhs_nominal: f64,
    /// `threshold / lhs_nominal`; `None` when the left-hand side vanishes.
    pub k_t: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalRatioReport {
    pub case: String,
    pub n: usize,
    pub m: usize,
    pub k_c: Option<f64>,
    pub k_c_bracket: Option<[f64; 2]>,
    pub bisect_tol: f64,
    pub gamma_domain: f64,
    pub voltage_provenance: String,
    pub ignored: Vec<String>,
    pub alpha_star: Option<f64>,
    pub tests: Vec<RatioEntry>,
}

impl CriticalRatioReport {
    pub fn ratio(&self, test: &str) -> Option<f64> {
        self.tests.iter().find(|t| t.test == test).and_then(|t| t.ratio)
    }
}

fn entry(test: &str, rigorous: bool, norm: PNorm, threshold: f64, lhs: f64, k_c: Option<f64>) -> RatioEntry {
    let k_t = (lhs > 0.0).then(|| threshold / lhs);
    RatioEntry {
        test: test.to_string(),
        rigorous,
        norm,
        threshold,
        lhs_nominal: lhs,
        k_t,
        ratio: match (k_t, k_c) {
            (Some(t), Some(c)) => Some(t / c),
            _ => None,
        },
    }
}

/// Critical ratios of T0, T3 (`p = ∞`), AT0 and, when `alpha` is given, AT1.
/// Every left-hand side is homogeneous in `K`, so `K_T = threshold / lhs(ω_nom)`.
pub fn test_thresholds(
    case: &PowerCase,
    config: &CriticalConfig,
    alpha: Option<&MafConfig>,
) -> Result<CriticalRatioReport> {
    let sys = super::lower_to_oscillators(case)?;
    let critical = critical_coupling(&sys, config)?;
    let k_c = critical.k_c;
    let flow = sys.edge_flow();
    let flow_inf = flow.amax();
    let t0_lhs = sys.graph().edge_differences(sys.omega().as_slice()).norm();
    let p_inf = sys.projection()?.norm(PNorm::Inf);

    let mut tests = vec![
        entry("T0", true, PNorm::Two, sys.lambda2(), t0_lhs, k_c),
        entry("T3", true, PNorm::Inf, g_function(p_inf.max(1.0))?, flow_inf, k_c),
        entry("AT0", false, PNorm::Inf, 1.0, flow_inf, k_c),
    ];
    let mut alpha_star = None;
    if let Some(cfg) = alpha {
        let est = maf::estimate_alpha(sys.graph(), PNorm::Inf, FRAC_PI_2, cfg)?;
        let a = est.numeric_estimate.expect("estimate requested");
        alpha_star = Some(a);
        tests.push(entry("AT1", false, PNorm::Inf, FRAC_PI_2 * a, flow_inf, k_c));
    }
    Ok(CriticalRatioReport {
        case: case.name.clone(),
        n: sys.n(),
        m: sys.graph().m(),
        k_c,
        k_c_bracket: critical.bracket,
        bisect_tol: config.bisect_tol,
        gamma_domain: FRAC_PI_2,
        voltage_provenance: VOLTAGE_PROVENANCE.to_string(),
        ignored: case.ignored.clone(),
        alpha_star,
        tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::power::{parse_json_case, parse_matpower};

    #[test]
    fn two_bus_critical_coupling_is_one() {
        let sys = OscillatorSystem::new(Graph::path(2).unwrap(), &[1.0, -1.0]).unwrap();
        let kc = critical_coupling(&sys, &CriticalConfig::default()).unwrap();
        let k = kc.k_c.unwrap();
        assert!((k - 1.0).abs() < 2e-4, "{k}");
    }

    #[test]
    fn star_critical_coupling_is_inverse_flow() {
        let sys = OscillatorSystem::new(Graph::star(3).unwrap(), &[2.0, -1.0, -1.0]).unwrap();
        let k = critical_coupling(&sys, &CriticalConfig::default()).unwrap().k_c.unwrap();
        assert!((k - 1.0).abs() < 2e-4, "{k}");
    }

    #[test]
    fn zero_injections_are_unbounded() {
        let sys = OscillatorSystem::new(Graph::ring(4).unwrap(), &[0.0; 4]).unwrap();
        let kc = critical_coupling(&sys, &CriticalConfig::default()).unwrap();
        assert_eq!(kc.k_c, None);
    }

    #[test]
    fn tree_case_makes_at0_exact() {
        let case = parse_json_case(include_str!("../../data/toy3.json")).unwrap();
        let rep = test_thresholds(&case, &CriticalConfig::default(), None).unwrap();
        let r = rep.ratio("AT0").unwrap();
        assert!((r - 1.0).abs() < 2e-4, "{r}");
        assert_eq!(rep.voltage_provenance, "case_file");
    }

    #[test]
    fn case9_ordering() {
        let case = parse_matpower(include_str!("../../data/case9.m"), "case9").unwrap();
        let rep = test_thresholds(&case, &CriticalConfig::default(), None).unwrap();
        let (t0, t3, at0) = (
            rep.ratio("T0").unwrap(),
            rep.ratio("T3").unwrap(),
            rep.ratio("AT0").unwrap(),
        );
        assert!(t0 < t3 && t3 < at0, "{t0} {t3} {at0}");
    }
}
