//! Multi-party orchestration: the prediction-sharing protocol, a dense
//! closed-form recurrence oracle for it, and two decentralized baselines.
//!
//! Parties never exchange data or models. Each round every party refines
//! the shared model with a fixed number of local gradient-descent steps,
//! uploads its predictions on the public inputs, and the server replaces
//! the shared model with the minimum-norm interpolant of the
//! size-weighted consensus of those predictions. The whole round state is
//! one shared coefficient vector over the public inputs; aggregation
//! always reduces in ascending party index so results are bit-reproducible
//! regardless of how the per-party work is scheduled.

use nalgebra::{DMatrix, DVector};

use crate::data::PartyDataset;
use crate::error::{Error, Result};
use crate::kernel::{gram, KernelSpec, RkhsFunction};
use crate::linalg::SymmetricSolver;
use crate::solvers::{local_correction, nystrom_krr, LocalGramCache};

/// Protocol parameters shared by every party.
#[derive(Debug, Clone)]
pub struct FederationConfig {
    pub kernel: KernelSpec,
    /// Public inputs (n0 × d), the only coordinates parties communicate in.
    pub public_inputs: DMatrix<f64>,
    /// Local gradient-descent steps per communication round.
    pub local_steps: u32,
    /// Communication rounds.
    pub rounds: u32,
    pub learning_rate: f64,
    /// Aggregation weights, one per party, summing to one.
    pub weights: Vec<f64>,
    /// Carried along for record keeping; the protocol itself is
    /// deterministic and draws no randomness.
    pub seed: u64,
}

impl FederationConfig {
    /// Standard configuration with weights `n_i/n` from the party sizes.
    pub fn for_parties(
        kernel: KernelSpec,
        public_inputs: DMatrix<f64>,
        parties: &[PartyDataset],
        local_steps: u32,
        rounds: u32,
        learning_rate: f64,
        seed: u64,
    ) -> Self {
        let n: usize = parties.iter().map(|p| p.len()).sum();
        let weights = parties.iter().map(|p| p.len() as f64 / n as f64).collect();
        Self {
            kernel,
            public_inputs,
            local_steps,
            rounds,
            learning_rate,
            weights,
            seed,
        }
    }

    fn validate_common(&self, parties: &[PartyDataset]) -> Result<()> {
        self.kernel.validate()?;
        if parties.is_empty() {
            return Err(Error::Config("no parties".into()));
        }
        if parties.iter().any(|p| p.is_empty()) {
            return Err(Error::Config("every party needs at least one data point".into()));
        }
        if self.public_inputs.nrows() == 0 {
            return Err(Error::Config("no public inputs".into()));
        }
        if self.weights.len() != parties.len() {
            return Err(Error::Config(format!(
                "{} weights for {} parties",
                self.weights.len(),
                parties.len()
            )));
        }
        if self.weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::Config("weights must be positive".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("weights sum to {sum}, expected 1")));
        }
        let cap = 1.0 / (self.kernel.kappa() * self.kernel.kappa());
        if !(self.learning_rate > 0.0 && self.learning_rate < cap) {
            return Err(Error::Config(format!(
                "learning rate {} outside (0, {cap})",
                self.learning_rate
            )));
        }
        Ok(())
    }

    pub fn validate(&self, parties: &[PartyDataset]) -> Result<()> {
        self.validate_common(parties)?;
        if self.local_steps == 0 {
            return Err(Error::Config("local_steps must be at least 1".into()));
        }
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-round observables of a protocol run.
#[derive(Debug, Clone, Default)]
pub struct RoundTrace {
    /// Consensus prediction vector over the public inputs, one per round.
    pub consensus: Vec<DVector<f64>>,
    /// Shared-model RMSE on the held-out set after each round, when a
    /// held-out set was supplied.
    pub heldout_rmse: Vec<f64>,
}

/// Run the collaborative protocol and return the final shared model with
/// its round trace.
///
/// Starting from the zero model, each round runs every party's local
/// update from the shared span-public coefficients, reduces the uploaded
/// predictions into the consensus `y_p = Σ_i w_i·preds_i` in ascending
/// party order, and re-interpolates: the new shared coefficients are
/// `K_ZZ⁺·y_p` (the minimum-norm interpolant of the consensus, which is
/// the infinite-iteration limit of gradient descent on the public inputs
/// regardless of the span-public initialization, so it is computed in
/// closed form).
pub fn dcl_kr(
    parties: &[PartyDataset],
    cfg: &FederationConfig,
    heldout: Option<&PartyDataset>,
) -> Result<(RkhsFunction, RoundTrace)> {
    cfg.validate(parties)?;
    let z = &cfg.public_inputs;
    let n0 = z.nrows();
    let kzz = gram(cfg.kernel, z, z)?;
    let solver = SymmetricSolver::factor(kzz.clone());
    let caches: Vec<LocalGramCache> = parties
        .iter()
        .map(|p| LocalGramCache::build(cfg.kernel, p, z))
        .collect::<Result<_>>()?;
    let heldout_cross = match heldout {
        Some(h) => {
            if h.is_empty() {
                return Err(Error::Config("held-out set is empty".into()));
            }
            Some(gram(cfg.kernel, &h.inputs, z)?)
        }
        None => None,
    };

    let mut shared = DVector::zeros(n0);
    let mut trace = RoundTrace::default();
    for _ in 0..cfg.rounds {
        let shared_on_z = &kzz * &shared;
        let mut consensus = DVector::zeros(n0);
        for (i, cache) in caches.iter().enumerate() {
            let a = local_correction(
                cache,
                &shared,
                &parties[i].labels,
                cfg.learning_rate,
                cfg.local_steps,
            );
            let mut preds = shared_on_z.clone();
            preds.gemv_tr(1.0, &cache.cross, &a, 1.0);
            consensus.axpy(cfg.weights[i], &preds, 1.0);
        }
        shared = solver.solve(&consensus);
        if let (Some(cross), Some(h)) = (&heldout_cross, heldout) {
            let resid = cross * &shared - &h.labels;
            trace
                .heldout_rmse
                .push((resid.norm_squared() / h.len() as f64).sqrt());
        }
        trace.consensus.push(consensus);
    }
    let f = RkhsFunction::new(cfg.kernel, z.clone(), shared)?;
    Ok((f, trace))
}

/// Size cap for the dense recurrence oracle.
pub const ORACLE_POINT_CAP: usize = 2000;

/// Closed-form recurrence oracle for [`dcl_kr`], evaluated with explicit
/// dense operator matrices over the joint point set `X ∪ Z`.
///
/// The shared model satisfies
/// `f_t = P(Σ_i w_i(A_i^E f_{t-1} + η Σ_{s<E} A_i^s S_i^⊤ y_i))` where
/// `A_i = I - η T_i`, `T_i` is the party-i empirical covariance operator,
/// `S_i^⊤` the adjoint sampling operator, and `P` the projection onto the
/// public span. Everything here is built from scratch on the joint set so
/// the computation shares no code path with the iterative protocol beyond
/// kernel evaluation. Returns the final model's values on the public
/// inputs. Accepts `rounds = 0` (the zero model).
pub fn dcl_kr_recurrence_oracle(
    parties: &[PartyDataset],
    cfg: &FederationConfig,
) -> Result<DVector<f64>> {
    cfg.validate_common(parties)?;
    let n: usize = parties.iter().map(|p| p.len()).sum();
    let n0 = cfg.public_inputs.nrows();
    let total = n + n0;
    if total > ORACLE_POINT_CAP {
        return Err(Error::OracleTooLarge {
            size: total,
            cap: ORACLE_POINT_CAP,
        });
    }
    let dim = cfg.public_inputs.ncols();
    // joint point set: all party inputs, then the public inputs
    let mut joint = DMatrix::zeros(total, dim);
    let mut offsets = Vec::with_capacity(parties.len());
    let mut at = 0;
    for p in parties {
        offsets.push(at);
        joint.rows_mut(at, p.len()).copy_from(&p.inputs);
        at += p.len();
    }
    joint.rows_mut(at, n0).copy_from(&cfg.public_inputs);

    let kuu = gram(cfg.kernel, &joint, &joint)?;
    let kzu = kuu.rows(n, n0).into_owned(); // n0 × total
    let kzz = kuu.view((n, n), (n0, n0)).into_owned();

    // independent pseudo-inverse of K_ZZ for the projection
    let eig = kzz.symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..n0)
        .filter(|&i| eig.eigenvalues[i] > 1e-12 * max)
        .collect();
    let project = |coeffs: &DVector<f64>| -> DVector<f64> {
        // values of the joint-coefficient function on Z
        let vals = &kzu * coeffs;
        let mut c = DVector::zeros(n0);
        for &i in &keep {
            let q = eig.eigenvectors.column(i);
            c.axpy(q.dot(&vals) / eig.eigenvalues[i], &q, 1.0);
        }
        let mut out = DVector::zeros(total);
        out.rows_mut(n, n0).copy_from(&c);
        out
    };

    // A_i v = v - η·(1/n_i)·mask_i(K_UU v)
    let eta = cfg.learning_rate;
    let step = |party: usize, v: &DVector<f64>| -> DVector<f64> {
        let h = &kuu * v;
        let mut out = v.clone();
        let (off, len) = (offsets[party], parties[party].len());
        for r in off..off + len {
            out[r] -= eta / len as f64 * h[r];
        }
        out
    };

    // constant term per party: η Σ_{s<E} A_i^s S_i^⊤ y_i
    let mut constants = Vec::with_capacity(parties.len());
    for (i, p) in parties.iter().enumerate() {
        let mut g = DVector::zeros(total);
        for (r, y) in p.labels.iter().enumerate() {
            g[offsets[i] + r] = y / p.len() as f64;
        }
        let mut sum = g.clone();
        for _ in 1..cfg.local_steps {
            g = step(i, &g);
            sum += &g;
        }
        constants.push(sum * eta);
    }

    let mut state = DVector::zeros(total);
    for _ in 0..cfg.rounds {
        let mut acc = DVector::zeros(total);
        for (i, c) in constants.iter().enumerate() {
            let mut v = state.clone();
            for _ in 0..cfg.local_steps {
                v = step(i, &v);
            }
            v += c;
            acc.axpy(cfg.weights[i], &v, 1.0);
        }
        state = project(&acc);
    }
    Ok(&kzu * &state)
}

/// Divide-and-conquer Nyström baseline: every party solves a Nyström ridge
/// problem on the public centers and the server averages the coefficient
/// vectors with weights `n_i/n`.
pub fn dc_ny(
    parties: &[PartyDataset],
    public_inputs: &DMatrix<f64>,
    kernel: KernelSpec,
    lambda: f64,
) -> Result<RkhsFunction> {
    if parties.is_empty() {
        return Err(Error::Config("no parties".into()));
    }
    let n: usize = parties.iter().map(|p| p.len()).sum();
    let mut coeffs = DVector::zeros(public_inputs.nrows());
    for p in parties {
        let local = nystrom_krr(kernel, p, public_inputs, lambda)?;
        coeffs.axpy(p.len() as f64 / n as f64, &local.coeffs, 1.0);
    }
    RkhsFunction::new(kernel, public_inputs.clone(), coeffs)
}

/// Per-party application of `(M_j + λI)⁻¹` in span-public coordinates,
/// where `M_j = (1/n_j)·K_ZZ⁺·K_ZX_j·K_X_jZ`.
enum InnerSolver {
    /// `K_ZZ` is positive definite: apply the low-rank update identity
    /// `(M_j+λI)⁻¹r = (r − W(λI+S)⁻¹Bᵀr)/λ` with `B` the scaled cross
    /// Gram, `W = K_ZZ⁻¹B`, `S = BᵀW`.
    LowRank {
        b: DMatrix<f64>,
        w: DMatrix<f64>,
        small: SymmetricSolver,
        lambda: f64,
    },
    /// Rank-deficient `K_ZZ`: materialize `M_j + λI` and LU-factor it.
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl InnerSolver {
    fn apply(&self, r: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            InnerSolver::LowRank { b, w, small, lambda } => {
                let t = small.solve(&b.tr_mul(r));
                Ok((r - w * t) / *lambda)
            }
            InnerSolver::Dense(lu) => lu
                .solve(r)
                .ok_or_else(|| Error::Numerical("inner resolvent solve failed".into())),
        }
    }
}

/// Communicate-and-average Nyström baseline with a damped residual
/// iteration in span-public coordinates:
///
/// `u ← u − η Σ_j w_j (M_j + λI)⁻¹((M + λI)u − b)`
///
/// with `M = Σ_j w_j M_j` and `b = (1/n)·K_ZZ⁺·K_ZX·y`, run for `rounds`
/// iterations from zero.
pub fn dkrr_ny_cm(
    parties: &[PartyDataset],
    public_inputs: &DMatrix<f64>,
    kernel: KernelSpec,
    lambda: f64,
    eta: f64,
    rounds: u32,
) -> Result<RkhsFunction> {
    if parties.is_empty() {
        return Err(Error::Config("no parties".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    let n: usize = parties.iter().map(|p| p.len()).sum();
    let n0 = public_inputs.nrows();
    let kzz = gram(kernel, public_inputs, public_inputs)?;
    let solver = SymmetricSolver::factor(kzz);

    let mut rhs_acc = DVector::zeros(n0);
    let mut scaled_cross = Vec::with_capacity(parties.len());
    let mut weights = Vec::with_capacity(parties.len());
    for p in parties {
        let kzx = gram(kernel, public_inputs, &p.inputs)?;
        rhs_acc += &kzx * &p.labels;
        scaled_cross.push(kzx / (p.len() as f64).sqrt());
        weights.push(p.len() as f64 / n as f64);
    }
    let b = solver.solve(&rhs_acc) / n as f64;

    let inner: Vec<InnerSolver> = scaled_cross
        .iter()
        .map(|bj| {
            if solver.is_positive_definite() {
                let w = solver.solve_matrix(bj);
                let mut s = bj.tr_mul(&w);
                for i in 0..s.nrows() {
                    s[(i, i)] += lambda;
                }
                Ok(InnerSolver::LowRank {
                    b: bj.clone(),
                    w,
                    small: SymmetricSolver::factor(s),
                    lambda,
                })
            } else {
                let mut m = solver.solve_matrix(&(bj * bj.transpose()));
                for i in 0..n0 {
                    m[(i, i)] += lambda;
                }
                Ok(InnerSolver::Dense(m.lu()))
            }
        })
        .collect::<Result<_>>()?;

    // M u = K⁺ Σ_j w_j B_j B_jᵀ u, applied through the party blocks
    let apply_mean = |u: &DVector<f64>| -> DVector<f64> {
        let mut acc = DVector::zeros(n0);
        for (bj, w) in scaled_cross.iter().zip(&weights) {
            acc.gemv(*w, bj, &(bj.tr_mul(u)), 1.0);
        }
        solver.solve(&acc)
    };

    let mut u = DVector::zeros(n0);
    for _ in 0..rounds {
        let mut residual = apply_mean(&u);
        residual.axpy(lambda, &u, 1.0);
        residual -= &b;
        let mut step = DVector::zeros(n0);
        for (s, w) in inner.iter().zip(&weights) {
            step.axpy(*w, &s.apply(&residual)?, 1.0);
        }
        u.axpy(-eta, &step, 1.0);
    }
    RkhsFunction::new(kernel, public_inputs.clone(), u)
}

/// Root mean squared error of a regressor against a labeled test set.
pub fn evaluate_rmse(f: &RkhsFunction, test: &PartyDataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Config("test set is empty".into()));
    }
    let preds = f.evaluate(&test.inputs)?;
    let resid = preds - &test.labels;
    Ok((resid.norm_squared() / test.len() as f64).sqrt())
}
