//! Dense linear-algebra helpers shared by the graph, projection and solver modules.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
pub const ZERO_EIG_REL: f64 = 1e-9;

/// The vector/induced norms supported throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PNorm {
    One,
    Two,
    Inf,
}

impl PNorm {
    pub const ALL: [PNorm; 3] = [PNorm::One, PNorm::Two, PNorm::Inf];

    /// Accepts 1, 2 and +inf; anything else is `UnsupportedNorm`.
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(PNorm::One)
        } else if p == 2.0 {
            Ok(PNorm::Two)
        } else if p == f64::INFINITY {
            Ok(PNorm::Inf)
        } else {
            Err(Error::UnsupportedNorm(p.to_string()))
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PNorm::One => "1",
            PNorm::Two => "2",
            PNorm::Inf => "inf",
        }
    }

    pub fn vector_norm(self, v: &DVector<f64>) -> f64 {
        vector_norm(v.as_slice(), self)
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(PNorm::One),
            "2" => Ok(PNorm::Two),
            "inf" | "infinity" | "∞" => Ok(PNorm::Inf),
            other => Err(Error::UnsupportedNorm(other.to_string())),
        }
    }
}

impl Serialize for PNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn vector_norm(v: &[f64], p: PNorm) -> f64 {
    match p {
        PNorm::One => v.iter().map(|x| x.abs()).sum(),
        PNorm::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        PNorm::Inf => v.iter().fold(0.0, |acc, x| acc.max(x.abs())),
    }
}

/// Max column abs-sum.
pub fn induced_norm_1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Max row abs-sum.
pub fn induced_norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn induced_norm_2(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn induced_norm(m: &DMatrix<f64>, p: PNorm) -> f64 {
    match p {
        PNorm::One => induced_norm_1(m),
        PNorm::Two => induced_norm_2(m),
        PNorm::Inf => induced_norm_inf(m),
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigSolveFailure("non-finite matrix entry".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigSolveFailure("non-finite eigenvalue".into()));
    }
    Ok((values, vectors))
}

/// Zero threshold used for the pseudoinverse: `1e-9 * max(|λ|_max, 1)`.
pub fn zero_threshold(values: &DVector<f64>) -> f64 {
    let scale = values.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    ZERO_EIG_REL * scale.max(1.0)
}

/// Moore–Penrose pseudoinverse of a symmetric matrix from a sorted eigendecomposition.
pub fn pinv_from_eigen(values: &DVector<f64>, vectors: &DMatrix<f64>) -> DMatrix<f64> {
    let n = values.len();
    let tol = zero_threshold(values);
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        if lambda.abs() > tol {
            let v = vectors.column(k);
            out += (v * v.transpose()) / lambda;
        }
    }
    out
}

pub fn pinv_sym(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (values, vectors) = sym_eigen_sorted(m)?;
    Ok(pinv_from_eigen(&values, &vectors))
}

/// Numerical rank from singular values.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let tol = ZERO_EIG_REL * smax.max(1.0);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis (columns) of the column space of `m`.
pub fn orth_range(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r = rank(m);
    let gram = m * m.transpose();
    let (_, vectors) = sym_eigen_sorted(&gram)?;
    let rows = m.nrows();
    Ok(vectors.columns(rows - r, r).into_owned())
}

/// Orthonormal basis (columns) of the null space of `m`.
pub fn null_space(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r = rank(m);
    let gram = m.transpose() * m;
    let (_, vectors) = sym_eigen_sorted(&gram)?;
    let cols = m.ncols();
    Ok(vectors.columns(0, cols - r).into_owned())
}

/// Orthonormal basis of `1ₙ⊥` (Helmert contrasts), an `n × (n-1)` matrix.
pub fn ones_complement_basis(n: usize) -> DMatrix<f64> {
    let mut basis = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            basis[(i, k - 1)] = scale;
        }
        basis[(k, k - 1)] = -(k as f64) * scale;
    }
    basis
}

/// Largest cosine of the principal angles between two subspaces given by
/// orthonormal bases. Returns 0 when either subspace is trivial.
pub fn max_principal_cosine(q1: &DMatrix<f64>, q2: &DMatrix<f64>) -> f64 {
    if q1.ncols() == 0 || q2.ncols() == 0 {
        return 0.0;
    }
    let c = q1.transpose() * q2;
    induced_norm_2(&c).min(1.0)
}

pub fn center(v: &mut DVector<f64>) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let mean = v.sum() / n as f64;
    v.add_scalar_mut(-mean);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_small_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 4.0]);
        assert_eq!(induced_norm_1(&m), 6.0);
        assert_eq!(induced_norm_inf(&m), 7.0);
        let two = induced_norm_2(&m);
        // σ_max² is the largest eigenvalue of mᵀm = [[10, 10], [10, 20]].
        let expected = (15.0 + 125.0_f64.sqrt()).sqrt();
        assert!((two - expected).abs() < 1e-12);
    }

    #[test]
    fn helmert_basis_is_orthonormal_and_centered() {
        for n in 1..8 {
            let u = ones_complement_basis(n);
            let gram = u.transpose() * &u;
            assert!((gram - DMatrix::identity(n - 1, n - 1)).abs().max() < 1e-14);
            for c in u.column_iter() {
                assert!(c.sum().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pnorm_parsing() {
        assert_eq!("inf".parse::<PNorm>().unwrap(), PNorm::Inf);
        assert_eq!("2".parse::<PNorm>().unwrap(), PNorm::Two);
        assert!(matches!(
            "3".parse::<PNorm>(),
            Err(Error::UnsupportedNorm(_))
        ));
        assert!(PNorm::from_f64(1.5).is_err());
        assert_eq!(PNorm::from_f64(f64::INFINITY).unwrap(), PNorm::Inf);
    }

    #[test]
    fn null_space_and_range_are_complementary() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0]);
        let r = orth_range(&m.transpose()).unwrap();
        let k = null_space(&m).unwrap();
        assert_eq!(r.ncols(), 2);
        assert_eq!(k.ncols(), 1);
        assert!((&m * &k).abs().max() < 1e-12);
        assert!(max_principal_cosine(&r, &k) < 1e-12);
    }
}
