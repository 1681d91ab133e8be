//! Single-machine kernel regressors: the building blocks the multi-party
//! protocols compose.

use nalgebra::{DMatrix, DVector};

use crate::data::PartyDataset;
use crate::error::{Error, Result};
use crate::kernel::{gram, KernelSpec, RkhsFunction};
use crate::linalg::SymmetricSolver;

fn check_learning_rate(kernel: KernelSpec, eta: f64) -> Result<()> {
    let cap = 1.0 / (kernel.kappa() * kernel.kappa());
    if eta > 0.0 && eta < cap {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "learning rate {eta} outside (0, {cap}) for kernel {kernel:?}"
        )))
    }
}

/// Precomputed Gram blocks for one party against a fixed public set, used
/// by the protocol loop so blocks are built once per run instead of once
/// per round.
pub(crate) struct LocalGramCache {
    /// n_i × n0
    pub cross: DMatrix<f64>,
    /// n_i × n_i
    pub own: DMatrix<f64>,
}

impl LocalGramCache {
    pub fn build(kernel: KernelSpec, party: &PartyDataset, public: &DMatrix<f64>) -> Result<Self> {
        Ok(Self {
            cross: gram(kernel, &party.inputs, public)?,
            own: gram(kernel, &party.inputs, &party.inputs)?,
        })
    }
}

/// Core of the local update: run `steps` gradient-descent iterations of the
/// party-local empirical risk, starting from the shared model given by
/// span-public coefficients `shared`. The correction `a` lives on the
/// party's own inputs and starts at zero:
///
/// `a ← a − (η/nᵢ)(K_XZ·shared + K_XX·a − y)`
///
/// Returns the correction; the party's predictions on the public set are
/// then `K_ZZ·shared + K_ZX·a`.
pub(crate) fn local_correction(
    cache: &LocalGramCache,
    shared: &DVector<f64>,
    labels: &DVector<f64>,
    eta: f64,
    steps: u32,
) -> DVector<f64> {
    let n = labels.len();
    let scale = eta / n as f64;
    let base = &cache.cross * shared; // constant across the inner steps
    let mut a = DVector::zeros(n);
    for _ in 0..steps {
        let mut grad = &cache.own * &a;
        grad += &base;
        grad -= labels;
        a.axpy(-scale, &grad, 1.0);
    }
    a
}

/// One party's block of local iterations inside a communication round.
///
/// From the shared span-public model with coefficients `shared` over
/// `public`, run `steps` gradient-descent updates on the party's empirical
/// risk and report the updated predictions on the public inputs together
/// with the local correction coefficients.
pub fn local_gd_update(
    shared: &DVector<f64>,
    public: &DMatrix<f64>,
    party: &PartyDataset,
    kernel: KernelSpec,
    eta: f64,
    steps: u32,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_learning_rate(kernel, eta)?;
    if party.is_empty() {
        return Err(Error::Config("party dataset is empty".into()));
    }
    if shared.len() != public.nrows() {
        return Err(Error::Config(format!(
            "{} shared coefficients for {} public inputs",
            shared.len(),
            public.nrows()
        )));
    }
    let cache = LocalGramCache::build(kernel, party, public)?;
    let a = local_correction(&cache, shared, &party.labels, eta, steps);
    let mut preds = if public.nrows() > 0 {
        let kzz = gram(kernel, public, public)?;
        &kzz * shared
    } else {
        DVector::zeros(0)
    };
    preds.gemv_tr(1.0, &cache.cross, &a, 1.0); // += K_ZX · a
    Ok((preds, a))
}

/// Kernel gradient descent on one dataset: coefficients over the inputs
/// follow `b ← b − (η/n)(K·b − y)` from zero for `iterations` steps.
pub fn kernel_gd(
    kernel: KernelSpec,
    data: &PartyDataset,
    eta: f64,
    iterations: u32,
) -> Result<RkhsFunction> {
    check_learning_rate(kernel, eta)?;
    if data.is_empty() {
        return Err(Error::Config("dataset is empty".into()));
    }
    let n = data.len();
    let k = gram(kernel, &data.inputs, &data.inputs)?;
    let scale = eta / n as f64;
    let mut b = DVector::zeros(n);
    for _ in 0..iterations {
        let mut grad = &k * &b;
        grad -= &data.labels;
        b.axpy(-scale, &grad, 1.0);
    }
    RkhsFunction::new(kernel, data.inputs.clone(), b)
}

/// Kernel ridge regression in closed form: `coeffs = (K + nλI)⁻¹ y`.
pub fn krr_closed_form(kernel: KernelSpec, data: &PartyDataset, lambda: f64) -> Result<RkhsFunction> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("ridge lambda must be positive, got {lambda}")));
    }
    if data.is_empty() {
        return Err(Error::Config("dataset is empty".into()));
    }
    let n = data.len();
    let mut k = gram(kernel, &data.inputs, &data.inputs)?;
    for i in 0..n {
        k[(i, i)] += n as f64 * lambda;
    }
    let coeffs = SymmetricSolver::factor(k).solve(&data.labels);
    RkhsFunction::new(kernel, data.inputs.clone(), coeffs)
}

/// Nyström ridge regression with fixed centers: minimize
/// `‖K_XZ c − y‖² + nλ·cᵀK_ZZ c`, solved through the normal equations
/// `(K_ZX K_XZ + nλ K_ZZ) c = K_ZX y`.
pub fn nystrom_krr(
    kernel: KernelSpec,
    data: &PartyDataset,
    centers: &DMatrix<f64>,
    lambda: f64,
) -> Result<RkhsFunction> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("ridge lambda must be positive, got {lambda}")));
    }
    if data.is_empty() {
        return Err(Error::Config("dataset is empty".into()));
    }
    let kxz = gram(kernel, &data.inputs, centers)?;
    let kzz = gram(kernel, centers, centers)?;
    let n = data.len() as f64;
    let mut normal = kxz.tr_mul(&kxz);
    normal.zip_apply(&kzz, |o, v| *o += n * lambda * v);
    let rhs = kxz.tr_mul(&data.labels);
    let coeffs = SymmetricSolver::factor(normal).solve(&rhs);
    RkhsFunction::new(kernel, centers.clone(), coeffs)
}
