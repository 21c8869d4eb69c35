//! The cutset projection `P = BᵀL†B𝒜`: the oblique projection of edge space
//! onto the cutset space `Img(Bᵀ)` parallel to the weighted cycle space
//! `Ker(B𝒜)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, PNorm};

/// Eigenvalues within this distance of 0 or 1 are counted as such.
pub const MULTIPLICITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumCheck {
    /// Multiplicity of eigenvalue 1 (expected `n − 1`).
    pub ones: usize,
    /// Multiplicity of eigenvalue 0 (expected `m − n + 1`).
    pub zeros: usize,
    /// Eigenvalues further than the tolerance from both 0 and 1.
    pub stray: usize,
    /// `‖P² − P‖₂`.
    pub idempotency_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionNorms {
    #[serde(rename = "1")]
    pub one: f64,
    #[serde(rename = "2")]
    pub two: f64,
    #[serde(rename = "inf")]
    pub inf: f64,
}

impl ProjectionNorms {
    pub fn get(&self, p: PNorm) -> f64 {
        match p {
            PNorm::One => self.one,
            PNorm::Two => self.two,
            PNorm::Inf => self.inf,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CutsetProjection {
    matrix: DMatrix<f64>,
    norms: ProjectionNorms,
    spectrum: SpectrumCheck,
}

impl CutsetProjection {
    pub fn new(g: &Graph) -> Result<Self> {
        let bundle = g.laplacian_bundle()?;
        let b = g.incidence_matrix();
        let weights = g.weights();
        let matrix = b.transpose() * &bundle.pinv * &b * DMatrix::from_diagonal(&weights);
        Self::from_matrix(matrix, &weights)
    }

    /// Builds `P` for an arbitrary incidence matrix (any orientation).
    pub fn from_incidence(b: &DMatrix<f64>, weights: &DVector<f64>) -> Result<Self> {
        if b.ncols() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: b.ncols(),
                found: weights.len(),
            });
        }
        let a = DMatrix::from_diagonal(weights);
        let l = b * &a * b.transpose();
        let pinv = linalg::pinv_sym(&l)?;
        let matrix = b.transpose() * pinv * b * a;
        Self::from_matrix(matrix, weights)
    }

    fn from_matrix(matrix: DMatrix<f64>, weights: &DVector<f64>) -> Result<Self> {
        let norms = ProjectionNorms {
            one: linalg::induced_norm_1(&matrix),
            two: linalg::induced_norm_2(&matrix),
            inf: linalg::induced_norm_inf(&matrix),
        };
        let spectrum = spectrum_check(&matrix, weights)?;
        Ok(CutsetProjection {
            matrix,
            norms,
            spectrum,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn norms(&self) -> ProjectionNorms {
        self.norms
    }

    pub fn norm(&self, p: PNorm) -> f64 {
        self.norms.get(p)
    }

    pub fn spectrum(&self) -> SpectrumCheck {
        self.spectrum
    }
}

/// `P` is similar to the symmetric `𝒜^{1/2} P 𝒜^{-1/2}`, so its spectrum is
/// computed with a symmetric eigensolver.
fn spectrum_check(p: &DMatrix<f64>, weights: &DVector<f64>) -> Result<SpectrumCheck> {
    let m = p.nrows();
    let idempotency_error = if m == 0 {
        0.0
    } else {
        linalg::induced_norm_2(&(p * p - p))
    };
    let sqrt_w = weights.map(f64::sqrt);
    let mut sym = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            sym[(i, j)] = sqrt_w[i] * p[(i, j)] / sqrt_w[j];
        }
    }
    let sym = (&sym + sym.transpose()) * 0.5;
    let (values, _) = linalg::sym_eigen_sorted(&sym)?;
    let ones = values
        .iter()
        .filter(|&&v| (v - 1.0).abs() <= MULTIPLICITY_TOL)
        .count();
    let zeros = values.iter().filter(|&&v| v.abs() <= MULTIPLICITY_TOL).count();
    Ok(SpectrumCheck {
        ones,
        zeros,
        stray: m - ones - zeros,
        idempotency_error,
    })
}

/// Max entrywise deviation between `P` and `−½ Bᵀ R_eff B 𝒜`.
pub fn effective_resistance_check(g: &Graph) -> Result<f64> {
    let bundle = g.laplacian_bundle()?;
    let ldag = &bundle.pinv;
    let n = g.n();
    let r_eff = DMatrix::from_fn(n, n, |i, j| ldag[(i, i)] + ldag[(j, j)] - 2.0 * ldag[(i, j)]);
    let b = g.incidence_matrix();
    let via_resistance =
        b.transpose() * r_eff * &b * DMatrix::from_diagonal(&g.weights()) * -0.5;
    let cp = CutsetProjection::new(g)?;
    Ok(linalg::max_abs(&(via_resistance - cp.matrix())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalAngle {
    /// Minimal angle between the cutset space and the weighted cycle space.
    pub angle: f64,
    /// `|sin(angle) − 1/‖P‖₂|`.
    pub deviation: f64,
}

pub fn minimal_angle_check(g: &Graph) -> Result<MinimalAngle> {
    if g.is_acyclic() {
        return Err(Error::TrivialCycleSpace);
    }
    let b = g.incidence_matrix();
    let ba = &b * DMatrix::from_diagonal(&g.weights());
    let cutset = linalg::orth_range(&b.transpose())?;
    let cycles = linalg::null_space(&ba)?;
    let cos = linalg::max_principal_cosine(&cutset, &cycles);
    let angle = cos.acos();
    let cp = CutsetProjection::new(g)?;
    Ok(MinimalAngle {
        angle,
        deviation: (angle.sin() - 1.0 / cp.norm(PNorm::Two)).abs(),
    })
}
