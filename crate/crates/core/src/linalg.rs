//! Dense symmetric matrices with eigenvalue-based definiteness tests and
//! linear solves.
//!
//! Everything downstream (dual Hessians, shifted matrices A + σC, branch
//! membership) funnels through [`SymMatrix`], which enforces symmetry at
//! construction by averaging mirrored entries. Eigendecompositions are
//! delegated to nalgebra's symmetric solver; solves go through the spectral
//! factorization so singularity detection and solving share one code path.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative factor for the default definiteness tolerance:
/// `tol = 1e-9 * max(1, max |entry|)`.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Relative factor for the singularity cutoff used by [`SymMatrix::solve`]
/// and [`SymMatrix::inverse`].
const SOLVE_SINGULARITY_TOL: f64 = 1e-12;

/// Definiteness classes of a symmetric matrix, judged against a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefinitenessClass {
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
    SingularOrSemidefinite,
}

impl std::fmt::Display for DefinitenessClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            DefinitenessClass::PositiveDefinite => "PositiveDefinite",
            DefinitenessClass::NegativeDefinite => "NegativeDefinite",
            DefinitenessClass::Indefinite => "Indefinite",
            DefinitenessClass::SingularOrSemidefinite => "SingularOrSemidefinite",
        };
        f.write_str(name)
    }
}

/// Outcome of a definiteness test: the class plus the extreme eigenvalues and
/// the tolerance they were judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Definiteness {
    pub class: DefinitenessClass,
    pub min_eig: f64,
    pub max_eig: f64,
    pub tolerance_used: f64,
}

/// Dense symmetric matrix, row-major storage.
///
/// Construction symmetrizes by averaging, so `get(i, j) == get(j, i)` holds
/// exactly for every instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a symmetric matrix from row-major rows, averaging `(a_ij + a_ji)/2`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidProblem("matrix has zero rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidProblem(format!(
                    "row {i} has {} entries, expected {dim} (matrix must be square)",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidProblem(format!(
                    "non-finite entry {bad} in row {i}"
                )));
            }
        }
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (i, v) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets entry (i, j) and its mirror (j, i).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SymMatrix, s: f64) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + s * b)
            .collect();
        SymMatrix {
            dim: self.dim,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Quadratic form xᵀ M x.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.to_dmatrix().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    /// Classifies definiteness. `tol = None` uses
    /// `1e-9 * max(1, max |entry|)`; eigenvalues within `±tol` of zero are
    /// treated as zero, which sends the matrix to `SingularOrSemidefinite`.
    pub fn classify(&self, tol: Option<f64>) -> Definiteness {
        let tol = tol.unwrap_or(DEFAULT_CLASSIFY_TOL * self.max_abs().max(1.0));
        let vals = self.eigenvalues();
        let min_eig = vals[0];
        let max_eig = vals[vals.len() - 1];
        let class = if min_eig > tol {
            DefinitenessClass::PositiveDefinite
        } else if max_eig < -tol {
            DefinitenessClass::NegativeDefinite
        } else if min_eig < -tol && max_eig > tol {
            DefinitenessClass::Indefinite
        } else {
            DefinitenessClass::SingularOrSemidefinite
        };
        Definiteness {
            class,
            min_eig,
            max_eig,
            tolerance_used: tol,
        }
    }

    /// Smallest singular value (= smallest |eigenvalue| for symmetric input).
    pub fn smallest_singular_value(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(f64::INFINITY, |acc, v| acc.min(v.abs()))
    }

    /// True when the smallest singular value clears the given tolerance
    /// (default: the classification tolerance).
    pub fn is_invertible(&self, tol: Option<f64>) -> bool {
        let tol = tol.unwrap_or(DEFAULT_CLASSIFY_TOL * self.max_abs().max(1.0));
        self.smallest_singular_value() > tol
    }

    /// Solves M x = b through the spectral factorization. Errors with
    /// [`Error::SingularMatrix`] when the smallest singular value falls below
    /// `1e-12 * max(1, max |entry|)`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.dim, "dimension mismatch");
        let eig = self.to_dmatrix().symmetric_eigen();
        let tol = SOLVE_SINGULARITY_TOL * self.max_abs().max(1.0);
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if !(smallest > tol) {
            return Err(Error::SingularMatrix { smallest, tol });
        }
        let vt_b = eig.eigenvectors.transpose() * DMatrix::from_column_slice(self.dim, 1, b);
        let mut scaled = vt_b;
        for i in 0..self.dim {
            scaled[(i, 0)] /= eig.eigenvalues[i];
        }
        let x = eig.eigenvectors * scaled;
        Ok(x.column(0).iter().copied().collect())
    }

    /// Inverse square root M^(-1/2) of a positive definite matrix, via the
    /// spectral factorization. Errors with [`Error::SingularMatrix`] when any
    /// eigenvalue falls below `1e-12 * max(1, max |entry|)`; callers must
    /// ensure positive definiteness (negative eigenvalues are rejected the
    /// same way since their square root is undefined here).
    pub fn inv_sqrt(&self) -> Result<SymMatrix> {
        let eig = self.to_dmatrix().symmetric_eigen();
        let tol = SOLVE_SINGULARITY_TOL * self.max_abs().max(1.0);
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(*v));
        if !(smallest > tol) {
            return Err(Error::SingularMatrix { smallest, tol });
        }
        let mut lam_vt = eig.eigenvectors.transpose();
        for i in 0..self.dim {
            let inv = 1.0 / eig.eigenvalues[i].sqrt();
            for j in 0..self.dim {
                lam_vt[(i, j)] *= inv;
            }
        }
        let m = eig.eigenvectors * lam_vt;
        let rows: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| m[(i, j)]).collect())
            .collect();
        SymMatrix::from_rows(&rows)
    }

    /// Congruence product S·M·S (self = S); symmetric whenever both inputs are.
    pub fn sandwich(&self, inner: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, inner.dim, "dimension mismatch");
        let s = self.to_dmatrix();
        let product = &s * inner.to_dmatrix() * &s;
        let rows: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| product[(i, j)]).collect())
            .collect();
        SymMatrix::from_rows(&rows).expect("product of finite matrices is finite")
    }

    /// Full inverse through the spectral factorization; same singularity
    /// cutoff as [`SymMatrix::solve`].
    pub fn inverse(&self) -> Result<SymMatrix> {
        let eig = self.to_dmatrix().symmetric_eigen();
        let tol = SOLVE_SINGULARITY_TOL * self.max_abs().max(1.0);
        let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if !(smallest > tol) {
            return Err(Error::SingularMatrix { smallest, tol });
        }
        let mut lam_inv_vt = eig.eigenvectors.transpose();
        for i in 0..self.dim {
            let inv = 1.0 / eig.eigenvalues[i];
            for j in 0..self.dim {
                lam_inv_vt[(i, j)] *= inv;
            }
        }
        let inv = eig.eigenvectors * lam_inv_vt;
        // Rounding can leave the product asymmetric in the last bits; re-symmetrize.
        let rows: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| inv[(i, j)]).collect())
            .collect();
        SymMatrix::from_rows(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_is_positive_definite() {
        let d = SymMatrix::identity(2).classify(None);
        assert_eq!(d.class, DefinitenessClass::PositiveDefinite);
        assert!((d.min_eig - 1.0).abs() < 1e-12);
        assert!((d.max_eig - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_counterexample_matrix_is_negative_definite() {
        // A + 1*C for the quadratically constrained counterexample instance.
        let m = sym(&[&[-1.0, -1.0], &[-1.0, -2.0]]);
        let d = m.classify(None);
        assert_eq!(d.class, DefinitenessClass::NegativeDefinite);
        // Eigenvalues of [[-1,-1],[-1,-2]]: (-3 ± √5)/2.
        assert!((d.min_eig - (-3.0 - 5.0f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((d.max_eig - (-3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_diagonal_is_indefinite() {
        let d = SymMatrix::from_diag(&[1.0, -1.0]).classify(None);
        assert_eq!(d.class, DefinitenessClass::Indefinite);
    }

    #[test]
    fn semidefinite_and_zero_matrices_are_flagged() {
        let d = SymMatrix::from_diag(&[1.0, 0.0]).classify(None);
        assert_eq!(d.class, DefinitenessClass::SingularOrSemidefinite);
        let z = SymMatrix::zeros(3).classify(None);
        assert_eq!(z.class, DefinitenessClass::SingularOrSemidefinite);
    }

    #[test]
    fn near_zero_eigenvalue_respects_explicit_tolerance() {
        let m = SymMatrix::from_diag(&[1.0, 1e-12]);
        assert_eq!(
            m.classify(None).class,
            DefinitenessClass::SingularOrSemidefinite
        );
        assert_eq!(
            m.classify(Some(1e-15)).class,
            DefinitenessClass::PositiveDefinite
        );
    }

    #[test]
    fn construction_symmetrizes_by_averaging() {
        let m = sym(&[&[1.0, 2.0], &[4.0, 3.0]]);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn rejects_ragged_and_non_finite_input() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(SymMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let x = SymMatrix::identity(2).solve(&[3.0, 4.0]).unwrap();
        assert_eq!(x, vec![3.0, 4.0]);
    }

    #[test]
    fn solve_recovers_counterexample_candidate() {
        // (A + C) x = f for the constrained counterexample data recovers x = (1, 0).
        let m = sym(&[&[-1.0, -1.0], &[-1.0, -2.0]]);
        let x = m.solve(&[-1.0, -1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!(x[1].abs() < 1e-12);
    }

    #[test]
    fn solve_negated_identity() {
        let m = SymMatrix::identity(2).scale(-1.0);
        let x = m.solve(&[-2.0, -2.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn solve_rejects_singular_matrix() {
        let m = SymMatrix::from_diag(&[1.0, 0.0]);
        match m.solve(&[1.0, 1.0]) {
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn solve_residual_stays_small() {
        // Deterministic ill-ish conditioned instance; residual bound
        // ‖Mx − b‖∞ ≤ 1e-10 · max(1, ‖b‖∞).
        let m = sym(&[
            &[4.0, 1.0, -2.0],
            &[1.0, 0.5, 0.3],
            &[-2.0, 0.3, 7.0],
        ]);
        let b = [1.0, -2.0, 0.25];
        let x = m.solve(&b).unwrap();
        let r = m.matvec(&x);
        let resid = r
            .iter()
            .zip(&b)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0f64, f64::max);
        assert!(resid <= 1e-10 * 2.0, "residual {resid}");
    }

    #[test]
    fn inverse_matches_solve_columnwise() {
        let m = sym(&[&[3.0, 1.0], &[1.0, 2.0]]);
        let inv = m.inverse().unwrap();
        for j in 0..2 {
            let mut e = vec![0.0; 2];
            e[j] = 1.0;
            let col = m.solve(&e).unwrap();
            for (i, &ci) in col.iter().enumerate() {
                assert!((inv.get(i, j) - ci).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inv_sqrt_squares_back_to_inverse() {
        let m = sym(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let s = m.inv_sqrt().unwrap();
        let ss = s.sandwich(&SymMatrix::identity(2)); // S·I·S = S²
        let inv = m.inverse().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((ss.get(i, j) - inv.get(i, j)).abs() < 1e-12);
            }
        }
        // S·M·S = I as well.
        let whitened = s.sandwich(&m);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((whitened.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inv_sqrt_rejects_non_positive_matrices() {
        assert!(SymMatrix::from_diag(&[1.0, -1.0]).inv_sqrt().is_err());
        assert!(SymMatrix::from_diag(&[1.0, 0.0]).inv_sqrt().is_err());
    }

    #[test]
    fn positive_definite_quadratic_form_is_positive() {
        // Definiteness classification must agree with the quadratic form on
        // a deterministic sweep of directions.
        let m = sym(&[&[2.0, 0.4, 0.0], &[0.4, 1.0, -0.3], &[0.0, -0.3, 3.0]]);
        assert_eq!(m.classify(None).class, DefinitenessClass::PositiveDefinite);
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..1000 {
            let mut v = [0.0f64; 3];
            for entry in v.iter_mut() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *entry = ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
            }
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            let v: Vec<f64> = v.iter().map(|a| a / norm).collect();
            assert!(m.quad_form(&v) > 0.0);
        }
    }
}
