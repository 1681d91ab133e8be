//! Solvers for the symmetric PSD systems that appear throughout.
//!
//! Gram matrices are positive semidefinite and frequently well conditioned,
//! so the default path is a Cholesky factorization. When that fails (rank
//! deficiency from duplicated points, or severe ill-conditioning) we fall
//! back to a symmetric eigendecomposition pseudo-inverse that drops
//! eigenvalues below `1e-12·λ_max`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Relative eigenvalue cutoff for the pseudo-inverse.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

pub enum SymmetricSolver {
    Cholesky(Cholesky<f64, Dyn>),
    /// Eigendecomposition `Q·diag(vals)·Qᵀ` with reciprocals of the kept
    /// eigenvalues already applied.
    Pinv {
        basis: DMatrix<f64>,
        inv_vals: DVector<f64>,
    },
}

impl SymmetricSolver {
    /// Factor a symmetric PSD matrix, consuming it.
    pub fn factor(matrix: DMatrix<f64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        match matrix.clone().cholesky() {
            Some(ch) => SymmetricSolver::Cholesky(ch),
            None => Self::eig_pinv(matrix),
        }
    }

    /// Always use the eigendecomposition pseudo-inverse.
    pub fn eig_pinv(matrix: DMatrix<f64>) -> Self {
        let eig = matrix.symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let cutoff = PINV_RELATIVE_CUTOFF * max;
        let inv_vals = eig
            .eigenvalues
            .map(|v| if v > cutoff { 1.0 / v } else { 0.0 });
        SymmetricSolver::Pinv {
            basis: eig.eigenvectors,
            inv_vals,
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        matches!(self, SymmetricSolver::Cholesky(_))
    }

    /// `K⁻¹ v` (or `K⁺ v` on the fallback path).
    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            SymmetricSolver::Cholesky(ch) => ch.solve(v),
            SymmetricSolver::Pinv { basis, inv_vals } => {
                let mut proj = basis.tr_mul(v);
                proj.component_mul_assign(inv_vals);
                basis * proj
            }
        }
    }

    /// Column-wise solve: `K⁻¹ M`.
    pub fn solve_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            SymmetricSolver::Cholesky(ch) => ch.solve(m),
            SymmetricSolver::Pinv { basis, inv_vals } => {
                let mut proj = basis.tr_mul(m);
                for mut col in proj.column_iter_mut() {
                    col.component_mul_assign(inv_vals);
                }
                basis * proj
            }
        }
    }
}

/// Eigenvalues of a symmetric matrix in descending order.
pub fn symmetric_eigenvalues_desc(matrix: DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = matrix.symmetric_eigenvalues().iter().cloned().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}
