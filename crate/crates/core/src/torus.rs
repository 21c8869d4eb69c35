//! Geometry on the n-torus: geodesic distance, the embedding of a phase
//! vector into `1ₙ⊥`, and membership in arc, cohesive and embedded-cohesive
//! subsets.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Absolute slack on every membership boundary comparison.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point of the torus; angles are kept in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhaseState {
    theta: Vec<f64>,
}

impl From<Vec<f64>> for PhaseState {
    fn from(v: Vec<f64>) -> Self {
        PhaseState::new(v)
    }
}

impl From<PhaseState> for Vec<f64> {
    fn from(p: PhaseState) -> Self {
        p.theta
    }
}

impl PhaseState {
    pub fn new(angles: Vec<f64>) -> Self {
        PhaseState {
            theta: angles.into_iter().map(wrap_angle).collect(),
        }
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// `rot_s`: adds `s` to every angle.
    pub fn rotate(&self, s: f64) -> Self {
        PhaseState::new(self.theta.iter().map(|a| a + s).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcDirection {
    Counterclockwise,
    Clockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geodesic {
    pub distance: f64,
    /// Direction of the shorter arc from `a` to `b`; ties go counterclockwise.
    pub direction: ArcDirection,
}

pub fn geodesic_distance(a: f64, b: f64) -> Geodesic {
    let ccw = (b - a).rem_euclid(TAU);
    let cw = TAU - ccw;
    if ccw <= cw {
        Geodesic {
            distance: ccw,
            direction: ArcDirection::Counterclockwise,
        }
    } else {
        Geodesic {
            distance: cw,
            direction: ArcDirection::Clockwise,
        }
    }
}

/// Zero-mean lift `xᶿ ∈ 1ₙ⊥` of a torus point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<f64>")]
pub struct EmbeddedState {
    x: DVector<f64>,
}

impl From<EmbeddedState> for Vec<f64> {
    fn from(e: EmbeddedState) -> Self {
        e.x.iter().copied().collect()
    }
}

impl EmbeddedState {
    /// Re-centers `x` so that its entries sum to zero.
    pub fn new(mut x: DVector<f64>) -> Self {
        crate::linalg::center(&mut x);
        EmbeddedState { x }
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.x
    }

    /// `exp(i·x)` as a torus point.
    pub fn to_phase(&self) -> PhaseState {
        PhaseState::new(self.x.iter().copied().collect())
    }

    /// `‖Bᵀx‖_∞`.
    pub fn max_edge_difference(&self, g: &Graph) -> f64 {
        g.edge_differences(self.x.as_slice()).amax()
    }
}

fn check_len(theta: &PhaseState, g: &Graph) -> Result<()> {
    if theta.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: theta.len(),
        });
    }
    Ok(())
}

/// Embedding by spanning-tree traversal from node 0.
///
/// At each step the lowest-index visited node with an unvisited neighbor is
/// expanded through its lowest-index unvisited neighbor `k`, and `x_k` is set
/// to `x_j ± |θ_j − θ_k|` with `+` when the shorter arc from `θ_j` to `θ_k`
/// runs counterclockwise.
pub fn embed(theta: &PhaseState, g: &Graph) -> Result<EmbeddedState> {
    check_len(theta, g)?;
    let n = g.n();
    let angles = theta.angles();
    let mut x = vec![0.0; n];
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut open = BTreeSet::from([0usize]);
    let mut count = 1;
    while count < n {
        let Some(&j) = open.iter().next() else {
            return Err(Error::Disconnected);
        };
        match g.neighbors(j).iter().find(|&&(k, _)| !visited[k]) {
            Some(&(k, _)) => {
                let geo = geodesic_distance(angles[j], angles[k]);
                x[k] = match geo.direction {
                    ArcDirection::Counterclockwise => x[j] + geo.distance,
                    ArcDirection::Clockwise => x[j] - geo.distance,
                };
                visited[k] = true;
                open.insert(k);
                count += 1;
            }
            None => {
                open.remove(&j);
            }
        }
    }
    Ok(EmbeddedState::new(DVector::from_vec(x)))
}

/// Is there an arc of length `gamma` containing every angle?
pub fn in_arc_subset(theta: &PhaseState, gamma: f64) -> bool {
    let mut sorted = theta.angles().to_vec();
    if sorted.len() <= 1 {
        return true;
    }
    sorted.sort_by(f64::total_cmp);
    let wrap_gap = sorted[0] + TAU - sorted[sorted.len() - 1];
    let max_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::max);
    TAU - max_gap <= gamma + MEMBERSHIP_TOL
}

/// `|θᵢ − θⱼ| ≤ γ` on every edge.
pub fn in_cohesive(theta: &PhaseState, g: &Graph, gamma: f64) -> Result<bool> {
    check_len(theta, g)?;
    let a = theta.angles();
    Ok(g.edges()
        .iter()
        .all(|e| geodesic_distance(a[e.source], a[e.sink]).distance <= gamma + MEMBERSHIP_TOL))
}

/// Membership in `S^G(γ)`, decided by `‖Bᵀxᶿ‖_∞ ≤ γ`.
pub fn in_embedded_cohesive(theta: &PhaseState, g: &Graph, gamma: f64) -> Result<bool> {
    let x = embed(theta, g)?;
    Ok(x.max_edge_difference(g) <= gamma + MEMBERSHIP_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub arc: bool,
    pub cohesive: bool,
    pub embedded_cohesive: bool,
}

pub fn classify(theta: &PhaseState, g: &Graph, gamma: f64) -> Result<Membership> {
    Ok(Membership {
        arc: in_arc_subset(theta, gamma),
        cohesive: in_cohesive(theta, g, gamma)?,
        embedded_cohesive: in_embedded_cohesive(theta, g, gamma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn pentagon() -> PhaseState {
        PhaseState::new((0..5).map(|k| 2.0 * PI * k as f64 / 5.0).collect())
    }

    #[test]
    fn geodesic_examples() {
        let g = geodesic_distance(0.0, FRAC_PI_2);
        assert!((g.distance - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(g.direction, ArcDirection::Counterclockwise);

        let g = geodesic_distance(0.1, 6.2);
        assert!((g.distance - (TAU - 6.1)).abs() < 1e-12);
        assert_eq!(g.direction, ArcDirection::Clockwise);
        let back = geodesic_distance(6.2, 0.1);
        assert_eq!(back.direction, ArcDirection::Counterclockwise);

        for x in [0.0, 1.3, 6.0] {
            assert_eq!(geodesic_distance(x, x).distance, 0.0);
        }
        // Antipodal tie resolves counterclockwise.
        assert_eq!(
            geodesic_distance(0.0, PI).direction,
            ArcDirection::Counterclockwise
        );
    }

    #[test]
    fn embed_path_of_five() {
        let g = Graph::path(5).unwrap();
        let x = embed(&pentagon(), &g).unwrap();
        let expected = [-4.0, -2.0, 0.0, 2.0, 4.0].map(|k| k * PI / 5.0);
        for (a, b) in x.as_vector().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_equal_angles_is_zero() {
        let g = Graph::complete(4).unwrap();
        let x = embed(&PhaseState::new(vec![2.5; 4]), &g).unwrap();
        assert!(x.as_vector().amax() < 1e-15);
    }

    #[test]
    fn embed_two_nodes_by_hand() {
        let g = Graph::path(2).unwrap();
        let x = embed(&PhaseState::new(vec![0.0, PI / 3.0]), &g).unwrap();
        assert!((x.as_vector()[0] + PI / 6.0).abs() < 1e-15);
        assert!((x.as_vector()[1] - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn arc_subset_examples() {
        assert!(!in_arc_subset(&pentagon(), 2.0 * PI / 5.0));
        assert!(in_arc_subset(&PhaseState::new(vec![0.0, 0.1, 0.2]), 0.3));
        assert!(in_arc_subset(&PhaseState::new(vec![4.0]), 0.0));
        // Wrapping arc across 0.
        assert!(in_arc_subset(&PhaseState::new(vec![6.2, 0.05]), 0.2));
    }

    #[test]
    fn cohesive_examples() {
        let ring = Graph::ring(5).unwrap();
        assert!(in_cohesive(&pentagon(), &ring, 2.0 * PI / 5.0).unwrap());
        let p2 = Graph::path(2).unwrap();
        assert!(!in_cohesive(&PhaseState::new(vec![0.0, 0.9 * PI]), &p2, FRAC_PI_2).unwrap());
        let k4 = Graph::complete(4).unwrap();
        let theta = PhaseState::new(vec![0.0, 0.4, 0.8, 1.2]);
        assert!(in_cohesive(&theta, &k4, 3.0).unwrap());
    }

    #[test]
    fn embedded_cohesive_examples() {
        let gamma = 2.0 * PI / 5.0;
        assert!(!in_embedded_cohesive(&pentagon(), &Graph::ring(5).unwrap(), gamma).unwrap());
        assert!(in_embedded_cohesive(&pentagon(), &Graph::path(5).unwrap(), gamma).unwrap());
        assert!(
            in_embedded_cohesive(&PhaseState::new(vec![1.0; 3]), &Graph::complete(3).unwrap(), 0.0)
                .unwrap()
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = Graph::path(3).unwrap();
        assert!(matches!(
            embed(&PhaseState::new(vec![0.0; 2]), &g),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }
}
