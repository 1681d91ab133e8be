//! Kernels, Gram matrices, and finite kernel expansions.
//!
//! A regressor is always a finite expansion `f = Σ_l coeffs[l]·k(·, centers[l])`.
//! Empirical-risk gradients in this codebase are taken with respect to the
//! scaled norm `(1/n)Σ v_i²`, which puts a `1/n` on every adjoint-sampling
//! term; we fold those factors into the coefficient updates themselves, so a
//! stored coefficient vector always multiplies raw kernel sections. Under
//! that convention minimum-norm interpolation of values `y` on points `Z` is
//! exactly `coeffs = K_ZZ⁺ · y`: if `f = Σ c_j k_{z_j}` matches `y` on `Z`
//! then `K_ZZ c = y`, and among all interpolants the RKHS norm
//! `cᵀ K_ZZ c` is minimized by the pseudo-inverse solution, which has no
//! component in the null space of `K_ZZ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::SymmetricSolver;

/// A named positive-definite kernel with its sup bound `kappa = sup √k(x,x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `k(x,y) = min(x,y)` on `[0,1]`. First-order Sobolev kernel.
    MinKernel,
    /// Compactly supported `k(x,y) = (1-‖x-y‖)₊²` on `[0,1]³`.
    Wendland0,
    /// Compactly supported `k(x,y) = (1-‖x-y‖)₊⁶(35‖x-y‖²+18‖x-y‖+3)`,
    /// `k(x,x) = 3`.
    Wendland2,
    /// `k(x,y) = exp(-‖x-y‖²/(2σ²))`.
    Gaussian { bandwidth: f64 },
}

impl KernelSpec {
    /// `sup_x √k(x,x)` over the kernel's documented domain.
    pub fn kappa(&self) -> f64 {
        match self {
            KernelSpec::MinKernel => 1.0,
            KernelSpec::Wendland0 => 1.0,
            KernelSpec::Wendland2 => 3f64.sqrt(),
            KernelSpec::Gaussian { .. } => 1.0,
        }
    }

    /// Check that points of dimension `dim` are acceptable.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let ok = match self {
            KernelSpec::MinKernel => dim == 1,
            KernelSpec::Wendland0 | KernelSpec::Wendland2 => (1..=3).contains(&dim),
            KernelSpec::Gaussian { .. } => dim >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "kernel {self:?} does not accept {dim}-dimensional inputs"
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelSpec::Gaussian { bandwidth } = self {
            if !(*bandwidth > 0.0) {
                return Err(Error::Config(format!(
                    "gaussian bandwidth must be positive, got {bandwidth}"
                )));
            }
        }
        Ok(())
    }

    /// Evaluate `k(x, y)` on raw coordinate slices.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelSpec::MinKernel => x[0].min(y[0]),
            KernelSpec::Wendland0 => {
                let r = dist(x, y);
                let u = (1.0 - r).max(0.0);
                u * u
            }
            KernelSpec::Wendland2 => {
                let r = dist(x, y);
                let u = (1.0 - r).max(0.0);
                u.powi(6) * (35.0 * r * r + 18.0 * r + 3.0)
            }
            KernelSpec::Gaussian { bandwidth } => {
                let mut sq = 0.0;
                for (a, b) in x.iter().zip(y) {
                    sq += (a - b) * (a - b);
                }
                (-sq / (2.0 * bandwidth * bandwidth)).exp()
            }
        }
    }
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    let mut sq = 0.0;
    for (a, b) in x.iter().zip(y) {
        sq += (a - b) * (a - b);
    }
    sq.sqrt()
}

fn row(points: &DMatrix<f64>, i: usize, buf: &mut Vec<f64>) {
    buf.clear();
    for j in 0..points.ncols() {
        buf.push(points[(i, j)]);
    }
}

/// Pairwise kernel matrix: entry `(i,j) = k(a_i, b_j)` for row-points.
pub fn gram(kernel: KernelSpec, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    kernel.validate()?;
    if a.ncols() != b.ncols() {
        return Err(Error::Config(format!(
            "point sets have mismatched dimensions {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    if a.nrows() > 0 || b.nrows() > 0 {
        kernel.check_dim(a.ncols())?;
    }
    let (p, q) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(p, q);
    let (mut ra, mut rb) = (Vec::new(), Vec::new());
    for i in 0..p {
        row(a, i, &mut ra);
        for j in 0..q {
            row(b, j, &mut rb);
            out[(i, j)] = kernel.eval(&ra, &rb);
        }
    }
    Ok(out)
}

/// A regressor as a kernel expansion over fixed centers.
#[derive(Debug, Clone)]
pub struct RkhsFunction {
    pub kernel: KernelSpec,
    /// p×d matrix of expansion points.
    pub centers: DMatrix<f64>,
    /// One coefficient per center.
    pub coeffs: DVector<f64>,
}

impl RkhsFunction {
    pub fn new(kernel: KernelSpec, centers: DMatrix<f64>, coeffs: DVector<f64>) -> Result<Self> {
        if centers.nrows() != coeffs.len() {
            return Err(Error::Config(format!(
                "{} centers with {} coefficients",
                centers.nrows(),
                coeffs.len()
            )));
        }
        Ok(Self { kernel, centers, coeffs })
    }

    /// The zero function (no centers) for `dim`-dimensional inputs.
    pub fn zero(kernel: KernelSpec, dim: usize) -> Self {
        Self {
            kernel,
            centers: DMatrix::zeros(0, dim),
            coeffs: DVector::zeros(0),
        }
    }

    /// Evaluate at each row of `points`: `out_j = Σ_l coeffs[l]·k(x_j, c_l)`.
    pub fn evaluate(&self, points: &DMatrix<f64>) -> Result<DVector<f64>> {
        if self.centers.nrows() == 0 {
            return Ok(DVector::zeros(points.nrows()));
        }
        let k = gram(self.kernel, points, &self.centers)?;
        Ok(&k * &self.coeffs)
    }
}

/// The minimum-norm interpolant of `targets` on `points`: the expansion
/// over `points` with `coeffs = K⁺·targets`. Rank-deficient Gram matrices
/// are handled by the pseudo-inverse (eigenvalues below `1e-12·λ_max` are
/// dropped).
pub fn min_norm_interpolant(
    kernel: KernelSpec,
    points: &DMatrix<f64>,
    targets: &DVector<f64>,
) -> Result<RkhsFunction> {
    if points.nrows() == 0 {
        return Err(Error::Config("interpolation needs at least one point".into()));
    }
    if points.nrows() != targets.len() {
        return Err(Error::Config(format!(
            "{} points with {} targets",
            points.nrows(),
            targets.len()
        )));
    }
    let k = gram(kernel, points, points)?;
    let solver = SymmetricSolver::factor(k);
    RkhsFunction::new(kernel, points.clone(), solver.solve(targets))
}

/// Orthogonal projection of `f` onto the span of the kernel sections at
/// `points`: interpolate the values of `f` there with minimum norm.
pub fn nystrom_project(f: &RkhsFunction, points: &DMatrix<f64>) -> Result<RkhsFunction> {
    if f.centers.nrows() > 0 && f.centers.ncols() != points.ncols() {
        return Err(Error::Config(format!(
            "function over {}-dimensional inputs projected onto {}-dimensional points",
            f.centers.ncols(),
            points.ncols()
        )));
    }
    let values = f.evaluate(points)?;
    min_norm_interpolant(f.kernel, points, &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn min_kernel_gram_hand_values() {
        let a = pts(&[0.25, 0.5, 1.0]);
        let k = gram(KernelSpec::MinKernel, &a, &a).unwrap();
        let expect = [
            [0.25, 0.25, 0.25],
            [0.25, 0.5, 0.5],
            [0.25, 0.5, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k[(i, j)], expect[i][j]);
            }
        }
    }

    #[test]
    fn wendland_support_and_diagonal() {
        let x = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 0.0]);
        let y = DMatrix::from_row_slice(1, 3, &[1.0, 0.3, 0.0]);
        let k0 = gram(KernelSpec::Wendland0, &x, &y).unwrap();
        assert_eq!(k0[(0, 0)], 0.0);
        let k2 = gram(KernelSpec::Wendland2, &x, &x).unwrap();
        assert_eq!(k2[(0, 0)], 3.0);
    }

    #[test]
    fn gram_dimension_mismatch_is_config_error() {
        let a = pts(&[0.1]);
        let b = DMatrix::from_row_slice(1, 3, &[0.1, 0.2, 0.3]);
        assert!(matches!(
            gram(KernelSpec::MinKernel, &a, &b),
            Err(Error::Config(_))
        ));
        // min kernel is 1-d only
        assert!(matches!(
            gram(KernelSpec::MinKernel, &b, &b),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn evaluate_single_center_is_kernel_section() {
        let f = RkhsFunction::new(KernelSpec::MinKernel, pts(&[0.5]), DVector::from_vec(vec![2.0]))
            .unwrap();
        let out = f.evaluate(&pts(&[0.25, 1.0])).unwrap();
        assert_eq!(out[0], 0.5);
        assert_eq!(out[1], 1.0);
    }

    #[test]
    fn evaluate_zero_coeffs_is_zero() {
        let f = RkhsFunction::new(
            KernelSpec::MinKernel,
            pts(&[0.3, 0.6]),
            DVector::zeros(2),
        )
        .unwrap();
        let out = f.evaluate(&pts(&[0.1, 0.9])).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn min_norm_hand_solved_two_point_system() {
        // [[0.5,0.5],[0.5,1.0]] c = (1,1) has c = (2,0)
        let f = min_norm_interpolant(
            KernelSpec::MinKernel,
            &pts(&[0.5, 1.0]),
            &DVector::from_vec(vec![1.0, 1.0]),
        )
        .unwrap();
        assert!((f.coeffs[0] - 2.0).abs() < 1e-12);
        assert!(f.coeffs[1].abs() < 1e-12);
    }

    #[test]
    fn min_norm_zero_targets_gives_zero_function() {
        let f = min_norm_interpolant(
            KernelSpec::MinKernel,
            &pts(&[0.2, 0.7]),
            &DVector::zeros(2),
        )
        .unwrap();
        assert!(f.coeffs.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn projection_matches_values_and_is_idempotent() {
        let f = RkhsFunction::new(
            KernelSpec::MinKernel,
            pts(&[0.15, 0.4, 0.85]),
            DVector::from_vec(vec![1.0, -0.5, 2.0]),
        )
        .unwrap();
        let z = pts(&[0.3, 0.6, 0.9]);
        let p = nystrom_project(&f, &z).unwrap();
        let want = f.evaluate(&z).unwrap();
        let got = p.evaluate(&z).unwrap();
        assert!((want - got).amax() < 1e-8);
        // projecting a span-Z function returns the same coefficients
        let pp = nystrom_project(&p, &z).unwrap();
        assert!((&pp.coeffs - &p.coeffs).amax() < 1e-8);
    }

    #[test]
    fn projection_kernel_domain_mismatch_errors() {
        let f = RkhsFunction::new(
            KernelSpec::Gaussian { bandwidth: 1.0 },
            DMatrix::from_row_slice(1, 2, &[0.1, 0.2]),
            DVector::from_vec(vec![1.0]),
        )
        .unwrap();
        assert!(nystrom_project(&f, &pts(&[0.5])).is_err());
    }
}
