//! Minimum amplification factor `α_p(γ)` of the scaled cutset projection
//!
//! ```text
//! α_p(γ) = min_{y ∈ D_p(γ)} min_{z ∈ Img(Bᵀ), ‖z‖_p = 1} ‖P diag(sinc(y)) z‖_p
//! D_p(γ) = { y ∈ Img(Bᵀ) : ‖y‖_p ≤ γ }
//! ```
//!
//! Two kinds of numbers come out of this module and they are never mixed:
//! rigorous lower bounds (closed forms) and numerical estimates, which are
//! objective values at feasible points and therefore only upper bounds.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, PNorm};
use crate::projection::CutsetProjection;
use crate::seed;

/// Largest grid search the brute-force oracle accepts.
pub const BRUTE_FORCE_MAX_NODES: usize = 4;

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `α₂(γ) ≥ sinc(γ)`, valid on unweighted graphs.
pub fn alpha_lower_bound_2(gamma: f64) -> f64 {
    sinc(gamma)
}

/// `α_p(γ) ≥ (1 + sinc γ)/2 − ‖P‖_p (1 − sinc γ)/2`. May be nonpositive,
/// in which case the bound is vacuous.
pub fn alpha_lower_bound_general(gamma: f64, p_norm_of_projection: f64) -> f64 {
    let s = sinc(gamma);
    0.5 * (1.0 + s) - p_norm_of_projection * 0.5 * (1.0 - s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MafMethod {
    #[serde(rename = "theorem_2norm")]
    Theorem2norm,
    TheoremGeneral,
    Multistart,
    Bruteforce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MafConfig {
    pub starts: usize,
    /// Sweeps per local search.
    pub iters: usize,
    pub seed: u64,
}

impl Default for MafConfig {
    fn default() -> Self {
        MafConfig {
            starts: 100,
            iters: 500,
            seed: seed::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MafEstimate {
    pub p: PNorm,
    pub gamma: f64,
    /// Best applicable closed-form lower bound.
    pub lower_bound: f64,
    pub lower_bound_method: MafMethod,
    /// `true` when the lower bound is nonpositive and therefore says nothing.
    pub vacuous: bool,
    /// Smallest objective value found (an upper bound on `α_p(γ)`).
    pub numeric_estimate: Option<f64>,
    pub estimate_method: Option<MafMethod>,
    /// `‖P‖_p`.
    pub projection_norm: f64,
}

/// A point of the search space: node potentials `u` (giving `y = Bᵀu`) and
/// `w` (giving the direction `z = Bᵀw / ‖Bᵀw‖_p`).
#[derive(Debug, Clone, PartialEq)]
pub struct SearchPoint {
    pub u: DVector<f64>,
    pub w: DVector<f64>,
}

/// Evaluation context for one `(graph, p, γ)` triple.
pub struct AlphaProblem<'g> {
    graph: &'g Graph,
    projection: CutsetProjection,
    p: PNorm,
    gamma: f64,
}

impl<'g> AlphaProblem<'g> {
    /// `γ` may be anywhere in `[0, π/2]`; the closed end is what the
    /// approximate test at `π/2` needs.
    pub fn new(graph: &'g Graph, p: PNorm, gamma: f64) -> Result<Self> {
        let projection = CutsetProjection::new(graph)?;
        Self::with_projection(graph, projection, p, gamma)
    }

    pub fn with_projection(
        graph: &'g Graph,
        projection: CutsetProjection,
        p: PNorm,
        gamma: f64,
    ) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&gamma) {
            return Err(Error::DomainError(format!(
                "gamma = {gamma} outside [0, pi/2]"
            )));
        }
        if graph.m() == 0 {
            return Err(Error::DomainError(
                "amplification factor needs at least one edge".into(),
            ));
        }
        Ok(AlphaProblem {
            graph,
            projection,
            p,
            gamma,
        })
    }

    pub fn projection(&self) -> &CutsetProjection {
        &self.projection
    }

    pub fn lower_bound(&self) -> (f64, MafMethod) {
        let general =
            alpha_lower_bound_general(self.gamma, self.projection.norm(self.p));
        if self.p == PNorm::Two && self.graph.is_unweighted() {
            let two = alpha_lower_bound_2(self.gamma);
            if two >= general {
                return (two, MafMethod::Theorem2norm);
            }
        }
        (general, MafMethod::TheoremGeneral)
    }

    /// `y = Bᵀu`, pulled radially back onto `‖y‖_p = γ` when outside.
    fn feasible_y(&self, u: &[f64]) -> DVector<f64> {
        let mut y = self.graph.edge_differences(u);
        let norm = self.p.vector_norm(&y);
        if norm > self.gamma {
            if norm > 0.0 {
                y *= self.gamma / norm;
            } else {
                y.fill(0.0);
            }
        }
        y
    }

    /// `‖P diag(sinc(y)) z‖_p` for explicit `y` and `z`.
    pub fn objective_yz(&self, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
        let scaled = DVector::from_iterator(y.len(), y.iter().zip(z.iter()).map(|(a, b)| sinc(*a) * b));
        self.p.vector_norm(&(self.projection.matrix() * scaled))
    }

    fn objective_sz(&self, s: &[f64], z: &DVector<f64>) -> f64 {
        let scaled = DVector::from_iterator(s.len(), s.iter().zip(z.iter()).map(|(a, b)| a * b));
        self.p.vector_norm(&(self.projection.matrix() * scaled))
    }

    fn direction(&self, w: &[f64]) -> Option<DVector<f64>> {
        let z = self.graph.edge_differences(w);
        let norm = self.p.vector_norm(&z);
        (norm > 1e-300).then(|| z / norm)
    }

    pub fn objective(&self, point: &SearchPoint) -> f64 {
        match self.direction(point.w.as_slice()) {
            Some(z) => self.objective_yz(&self.feasible_y(point.u.as_slice()), &z),
            None => f64::INFINITY,
        }
    }

    fn random_point<R: Rng>(&self, rng: &mut R) -> SearchPoint {
        let n = self.graph.n();
        let spread = (2.0 * self.gamma).max(1e-3);
        SearchPoint {
            u: DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-spread..spread))),
            w: DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0))),
        }
    }

    /// Compass search with a shrinking step, plus a couple of random
    /// directions per sweep so that kinks of the max-norm do not stall it.
    fn local_search<R: Rng>(&self, mut point: SearchPoint, iters: usize, rng: &mut R) -> (f64, SearchPoint) {
        let n = self.graph.n();
        let mut best = self.objective(&point);
        let mut step = 0.5;
        for _ in 0..iters {
            let mut improved = false;
            for coord in 0..2 * n {
                for sign in [1.0, -1.0] {
                    let mut trial = point.clone();
                    if coord < n {
                        trial.u[coord] += sign * step;
                    } else {
                        trial.w[coord - n] += sign * step;
                    }
                    let f = self.objective(&trial);
                    if f < best {
                        best = f;
                        point = trial;
                        improved = true;
                        break;
                    }
                }
            }
            for _ in 0..2 {
                let du = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0)));
                let dw = DVector::from_iterator(n, (0..n).map(|_| rng.gen_range(-1.0..1.0)));
                let trial = SearchPoint {
                    u: &point.u + du * step,
                    w: &point.w + dw * step,
                };
                let f = self.objective(&trial);
                if f < best {
                    best = f;
                    point = trial;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        (best, point)
    }

    /// Multistart minimization. `warm` points are searched in addition to
    /// the random starts.
    pub fn multistart(&self, config: &MafConfig, warm: &[SearchPoint]) -> Result<(f64, SearchPoint)> {
        if config.starts == 0 {
            return Err(Error::ConfigInvalid("starts must be positive".into()));
        }
        let total = config.starts + warm.len();
        let results: Vec<(f64, SearchPoint)> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut rng = seed::job_stream(config.seed, "alpha", idx);
                let start = if idx < config.starts {
                    self.random_point(&mut rng)
                } else {
                    warm[idx - config.starts].clone()
                };
                self.local_search(start, config.iters, &mut rng)
            })
            .collect();
        let best = results
            .into_iter()
            .reduce(|a, b| if b.0 < a.0 { b } else { a })
            .expect("at least one start");
        Ok(best)
    }

    pub fn estimate(&self, config: &MafConfig) -> Result<MafEstimate> {
        let (value, _) = self.multistart(config, &[])?;
        Ok(self.report(Some((value, MafMethod::Multistart))))
    }

    fn report(&self, estimate: Option<(f64, MafMethod)>) -> MafEstimate {
        let (lower_bound, lower_bound_method) = self.lower_bound();
        MafEstimate {
            p: self.p,
            gamma: self.gamma,
            lower_bound,
            lower_bound_method,
            vacuous: lower_bound <= 0.0,
            numeric_estimate: estimate.map(|e| e.0),
            estimate_method: estimate.map(|e| e.1),
            projection_norm: self.projection.norm(self.p),
        }
    }

    pub fn bounds_only(&self) -> MafEstimate {
        self.report(None)
    }

    /// Exhaustive grid over `u, w` with node 0 pinned to zero. Every grid `y`
    /// is evaluated as is (when feasible) and pushed radially onto the
    /// boundary `‖y‖_p = γ`, so the result is the objective at a feasible point.
    pub fn brute_force(&self, resolution: usize) -> Result<f64> {
        let n = self.graph.n();
        if n > BRUTE_FORCE_MAX_NODES {
            return Err(Error::TooLarge {
                n,
                max: BRUTE_FORCE_MAX_NODES,
            });
        }
        if resolution < 2 {
            return Err(Error::ConfigInvalid("grid resolution must be >= 2".into()));
        }
        let dims = n - 1;
        // |u_k| ≤ (graph distance to node 0)·γ ≤ (n − 1)γ on D_p(γ).
        let reach = (n - 1) as f64 * self.gamma;
        let axis = |half: f64| -> Vec<f64> {
            (0..resolution)
                .map(|i| -half + 2.0 * half * i as f64 / (resolution - 1) as f64)
                .collect()
        };
        let u_axis = axis(reach);
        let w_axis = axis(1.0);

        let mut scalings: Vec<Vec<f64>> = Vec::new();
        for u in grid_points(&u_axis, dims) {
            let y = self.graph.edge_differences(&u);
            let norm = self.p.vector_norm(&y);
            if norm <= self.gamma + 1e-15 {
                scalings.push(y.iter().map(|&v| sinc(v)).collect());
            }
            if norm > 0.0 {
                let factor = self.gamma / norm;
                scalings.push(y.iter().map(|&v| sinc(v * factor)).collect());
            }
        }
        let directions: Vec<DVector<f64>> = grid_points(&w_axis, dims)
            .filter_map(|w| self.direction(&w))
            .collect();

        let best = scalings
            .par_iter()
            .map(|s| {
                directions
                    .iter()
                    .map(|z| self.objective_sz(s, z))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
        Ok(best)
    }
}

/// All points of `axis^dims`, each with a leading 0 for the pinned node.
fn grid_points(axis: &[f64], dims: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    let total = axis.len().pow(dims as u32);
    (0..total).map(move |mut idx| {
        let mut point = vec![0.0; dims + 1];
        for slot in point.iter_mut().skip(1) {
            *slot = axis[idx % axis.len()];
            idx /= axis.len();
        }
        point
    })
}

pub fn estimate_alpha(g: &Graph, p: PNorm, gamma: f64, config: &MafConfig) -> Result<MafEstimate> {
    AlphaProblem::new(g, p, gamma)?.estimate(config)
}

/// Estimates along an increasing `γ` grid, seeding each search with the best
/// point of the previous one. Feasible points for smaller `γ` stay feasible,
/// so the returned estimates are nonincreasing.
pub fn estimate_alpha_path(
    g: &Graph,
    p: PNorm,
    gammas: &[f64],
    config: &MafConfig,
) -> Result<Vec<MafEstimate>> {
    let projection = CutsetProjection::new(g)?;
    let mut order: Vec<usize> = (0..gammas.len()).collect();
    order.sort_by(|&a, &b| gammas[a].total_cmp(&gammas[b]));
    let mut out = vec![None; gammas.len()];
    let mut warm: Vec<SearchPoint> = Vec::new();
    for idx in order {
        let problem = AlphaProblem::with_projection(g, projection.clone(), p, gammas[idx])?;
        let (value, point) = problem.multistart(config, &warm)?;
        warm = vec![point];
        out[idx] = Some(problem.report(Some((value, MafMethod::Multistart))));
    }
    Ok(out.into_iter().map(|e| e.expect("every index visited")).collect())
}

pub fn brute_force_alpha(g: &Graph, p: PNorm, gamma: f64, resolution: usize) -> Result<f64> {
    if g.n() > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge {
            n: g.n(),
            max: BRUTE_FORCE_MAX_NODES,
        });
    }
    AlphaProblem::new(g, p, gamma)?.brute_force(resolution)
}

/// `(Q(y))⁻¹ = Bᵀ L†_{sinc(y)} B𝒜` as an `m × m` matrix.
pub fn inverse_scaled_projection(g: &Graph, y: &[f64]) -> Result<DMatrix<f64>> {
    let s: Vec<f64> = y.iter().map(|&v| sinc(v)).collect();
    let ls = g.scaled_laplacian(&s)?;
    let pinv = linalg::pinv_sym(&ls)?;
    let b = g.incidence_matrix();
    Ok(b.transpose() * pinv * &b * DMatrix::from_diagonal(&g.weights()))
}

/// For a fixed `y`, the 2-norm minimum gain of `Q(y) = P diag(sinc(y))` on
/// `Img(Bᵀ)` and the 2-norm of `Q(y)⁻¹` on the same subspace.
pub fn scaled_projection_gains_2(g: &Graph, y: &[f64]) -> Result<(f64, f64)> {
    let cp = CutsetProjection::new(g)?;
    let s = DVector::from_iterator(y.len(), y.iter().map(|&v| sinc(v)));
    let q = cp.matrix() * DMatrix::from_diagonal(&s);
    let inv = inverse_scaled_projection(g, y)?;
    let basis = linalg::orth_range(&g.incidence_matrix().transpose())?;
    let q_restricted = basis.transpose() * q * &basis;
    let inv_restricted = basis.transpose() * inv * &basis;
    let min_gain = q_restricted
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok((min_gain, linalg::induced_norm_2(&inv_restricted)))
}
