//! Feature-kernel distillation math on explicit feature matrices.
//!
//! This is the kernel-matching side of the neural protocol stripped of the
//! deep-learning stack: parties expose linear feature kernels
//! `k_f(x,y) = g(x)ᵀg(y)` through their Gram matrices on the public
//! inputs, the server forms the size-weighted ensemble kernel, and each
//! party aligns its own kernel to the ensemble by gradient ascent on
//! empirical CKA. HSIC magnitudes then calibrate per-party learning
//! rates.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

/// Features of `p` sample points in `c` dimensions, one row per point.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(pub DMatrix<f64>);

/// A `p×p` kernel Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(pub DMatrix<f64>);

impl FeatureMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() < 2 {
            return Err(Error::Config(format!(
                "feature matrix needs at least 2 rows, got {}",
                m.nrows()
            )));
        }
        Ok(Self(m))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    /// CSV with a feature-index header row `f0,f1,...`.
    pub fn to_csv(&self) -> String {
        let (p, c) = self.0.shape();
        let mut out = String::new();
        for j in 0..c {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("f{j}"));
        }
        out.push('\n');
        for i in 0..p {
            for j in 0..c {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{}", self.0[(i, j)]));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty feature CSV".into()))?;
        let cols = header.split(',').count();
        let mut values = Vec::new();
        let mut rows = 0;
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(Error::Config(format!(
                    "feature CSV row has {} fields, expected {cols}",
                    fields.len()
                )));
            }
            for f in fields {
                values.push(f.trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("bad feature value {f:?}: {e}"))
                })?);
            }
            rows += 1;
        }
        FeatureMatrix::new(DMatrix::from_row_slice(rows, cols, &values))
    }
}

/// Linear feature kernel Gram: `K = F·Fᵀ`.
pub fn feature_gram(f: &FeatureMatrix) -> GramMatrix {
    GramMatrix(&f.0 * f.0.transpose())
}

/// Size-weighted ensemble of party Gram matrices.
pub fn ensemble_gram(grams: &[GramMatrix], weights: &[f64]) -> Result<GramMatrix> {
    if grams.is_empty() || grams.len() != weights.len() {
        return Err(Error::Config(format!(
            "{} gram matrices with {} weights",
            grams.len(),
            weights.len()
        )));
    }
    let shape = grams[0].0.shape();
    if grams.iter().any(|g| g.0.shape() != shape) {
        return Err(Error::Config("gram matrices have mismatched shapes".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!("weights sum to {sum}, expected 1")));
    }
    let mut out = DMatrix::zeros(shape.0, shape.1);
    for (g, w) in grams.iter().zip(weights) {
        out.zip_apply(&g.0, |o, v| *o += w * v);
    }
    Ok(GramMatrix(out))
}

/// Double centering `H K H` with `H = I − (1/p)·11ᵀ`, computed by
/// subtracting row and column means and adding the grand mean back.
fn center(k: &DMatrix<f64>) -> DMatrix<f64> {
    let p = k.nrows();
    let row_means: Vec<f64> = (0..p).map(|i| k.row(i).sum() / p as f64).collect();
    let col_means: Vec<f64> = (0..p).map(|j| k.column(j).sum() / p as f64).collect();
    let grand = row_means.iter().sum::<f64>() / p as f64;
    DMatrix::from_fn(p, p, |i, j| k[(i, j)] - row_means[i] - col_means[j] + grand)
}

fn check_pair(k1: &GramMatrix, k2: &GramMatrix) -> Result<usize> {
    let p = k1.0.nrows();
    if k1.0.shape() != k2.0.shape() || k1.0.nrows() != k1.0.ncols() {
        return Err(Error::Config(format!(
            "gram shapes {:?} and {:?} are incompatible",
            k1.0.shape(),
            k2.0.shape()
        )));
    }
    if p < 2 {
        return Err(Error::Config("HSIC needs at least 2 samples".into()));
    }
    Ok(p)
}

/// Empirical Hilbert–Schmidt independence criterion:
/// `tr(K₁HK₂H)/(p−1)²`.
pub fn hsic(k1: &GramMatrix, k2: &GramMatrix) -> Result<f64> {
    let p = check_pair(k1, k2)?;
    let c1 = center(&k1.0);
    // tr(K1 H K2 H) = ⟨H K1 H, K2⟩_F
    let mut acc = 0.0;
    for j in 0..p {
        for i in 0..p {
            acc += c1[(i, j)] * k2.0[(i, j)];
        }
    }
    Ok(acc / ((p - 1) as f64 * (p - 1) as f64))
}

/// Empirical centered kernel alignment:
/// `HSIC(K₁,K₂)/√(HSIC(K₁,K₁)·HSIC(K₂,K₂))`.
///
/// Constant kernels have zero self-HSIC and make the alignment undefined;
/// that surfaces as a degenerate-input error.
pub fn cka(k1: &GramMatrix, k2: &GramMatrix) -> Result<f64> {
    let h12 = hsic(k1, k2)?;
    let h11 = hsic(k1, k1)?;
    let h22 = hsic(k2, k2)?;
    if h11 <= 0.0 || h22 <= 0.0 {
        return Err(Error::Degenerate(
            "zero self-HSIC (constant features); CKA is undefined".into(),
        ));
    }
    Ok(h12 / (h11 * h22).sqrt())
}

/// Gradient of `cka(feature_gram(F), K_target)` with respect to `F`.
///
/// With `K = FFᵀ`, `∂CKA/∂K = (H·K_t·H − (h₁₂/h₁₁)·H·K·H) / ((p−1)²·√(h₁₁h₂₂))`
/// by the quotient rule on the HSIC ratio, and the chain rule through the
/// symmetric product gives `∂CKA/∂F = 2·(∂CKA/∂K)·F`.
pub fn cka_grad(f: &FeatureMatrix, k_target: &GramMatrix) -> Result<DMatrix<f64>> {
    let k = feature_gram(f);
    let p = check_pair(&k, k_target)?;
    let h12 = hsic(&k, k_target)?;
    let h11 = hsic(&k, &k)?;
    let h22 = hsic(k_target, k_target)?;
    if h11 <= 0.0 || h22 <= 0.0 {
        return Err(Error::Degenerate(
            "zero self-HSIC (constant features); CKA gradient is undefined".into(),
        ));
    }
    let denom = (p - 1) as f64 * (p - 1) as f64 * (h11 * h22).sqrt();
    let mut shaped = center(&k_target.0);
    let own_centered = center(&k.0);
    shaped.zip_apply(&own_centered, |o, v| *o -= h12 / h11 * v);
    shaped /= denom;
    Ok(2.0 * shaped * &f.0)
}

/// Learning-rate scaling from per-party self-HSIC magnitudes: party `i`
/// trains at `eta0 · max_j √α_j / √α_i`, so the largest-scale kernel gets
/// exactly the base rate and smaller-scale kernels get proportionally
/// more.
pub fn lr_scale(self_hsics: &[f64], eta0: f64) -> Result<Vec<f64>> {
    if self_hsics.is_empty() {
        return Err(Error::Config("no parties".into()));
    }
    if self_hsics.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::Degenerate(
            "learning-rate scaling needs positive self-HSIC values".into(),
        ));
    }
    let max_root = self_hsics.iter().map(|a| a.sqrt()).fold(0.0f64, f64::max);
    Ok(self_hsics.iter().map(|a| eta0 * max_root / a.sqrt()).collect())
}

/// Row-subsample cap for self-HSIC estimation.
pub const HSIC_SUBSAMPLE_ROWS: usize = 512;

/// Self-HSIC of a Gram matrix estimated on a deterministic subsample of at
/// most [`HSIC_SUBSAMPLE_ROWS`] rows; a full pass over thousands of public
/// inputs is unnecessary for a scale estimate.
pub fn self_hsic_subsampled(k: &GramMatrix, seed: u64) -> Result<f64> {
    let p = k.0.nrows();
    if p <= HSIC_SUBSAMPLE_ROWS {
        return hsic(k, k);
    }
    let mut idx: Vec<usize> = (0..p).collect();
    idx.shuffle(&mut rng::stream(seed, &[p as u64]));
    idx.truncate(HSIC_SUBSAMPLE_ROWS);
    idx.sort_unstable();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| k.0[(idx[i], idx[j])]);
    let sub = GramMatrix(sub);
    hsic(&sub, &sub)
}

/// Weighted per-party gram + ensemble helper used by the demo driver:
/// returns each party's Gram and the ensemble of all of them.
pub fn party_grams_and_ensemble(
    features: &[FeatureMatrix],
    weights: &[f64],
) -> Result<(Vec<GramMatrix>, GramMatrix)> {
    let grams: Vec<GramMatrix> = features.iter().map(feature_gram).collect();
    let ensemble = ensemble_gram(&grams, weights)?;
    Ok((grams, ensemble))
}
