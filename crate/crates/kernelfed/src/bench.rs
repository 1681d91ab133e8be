//! Seeded experiment harness: sweeps over the number of parties,
//! repetition averaging, rate fitting, and spectral diagnostics.

use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::PartyDataset;
use crate::datagen::{
    partition_noniid, sample_public, sample_task, scaled_public_count, PartitionSpec, TaskSpec,
};
use crate::error::{Error, Result};
use crate::kernel::{gram, RkhsFunction};
use crate::linalg::symmetric_eigenvalues_desc;
use crate::protocol::{dcl_kr, dc_ny, dkrr_ny_cm, evaluate_rmse, FederationConfig};
use crate::rng::{self, tag};
use crate::solvers::{kernel_gd, krr_closed_form};

/// The algorithms the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgorithmKind {
    DclKr,
    CentralKrr,
    CentralKrgd,
    DcNy,
    DkrrNyCm,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::DclKr,
        AlgorithmKind::CentralKrr,
        AlgorithmKind::CentralKrgd,
        AlgorithmKind::DcNy,
        AlgorithmKind::DkrrNyCm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::DclKr => "dcl-kr",
            AlgorithmKind::CentralKrr => "central-krr",
            AlgorithmKind::CentralKrgd => "central-krgd",
            AlgorithmKind::DcNy => "dc-ny",
            AlgorithmKind::DkrrNyCm => "dkrr-ny-cm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|a| a.name() == s)
            .copied()
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown algorithm {s:?}; expected one of dcl-kr, central-krr, central-krgd, dc-ny, dkrr-ny-cm"
                ))
            })
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for AlgorithmKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Per-algorithm hyperparameter constants. Ridge methods use
/// `λ = C·n^(−1/(2r+s))`; gradient methods use `T = int(D·n^(1/(2r+s)))`
/// total iterations (for the collaborative protocol, communication
/// rounds).
#[derive(Debug, Clone, Serialize)]
pub struct HyperParams {
    pub dcl_d: f64,
    pub dcl_eta: f64,
    pub dcl_local_steps: u32,
    pub krr_c: f64,
    pub krgd_d: f64,
    pub krgd_eta: f64,
    pub dcny_c: f64,
    pub dkrr_c: f64,
    pub dkrr_eta: f64,
    pub dkrr_rounds: u32,
}

impl HyperParams {
    /// Grid-searched constants for each synthetic task.
    pub fn defaults_for(task: &TaskSpec) -> Self {
        match task.variant {
            crate::datagen::TaskVariant::Toy1d => Self {
                dcl_d: 2.5,
                dcl_eta: 0.5,
                dcl_local_steps: 5,
                krr_c: 0.055,
                krgd_d: 15.0,
                krgd_eta: 0.5,
                dcny_c: 0.006,
                dkrr_c: 0.008,
                dkrr_eta: 0.01,
                dkrr_rounds: 10,
            },
            crate::datagen::TaskVariant::Toy3d => Self {
                dcl_d: 12.5,
                dcl_eta: 0.5,
                dcl_local_steps: 5,
                krr_c: 0.016,
                krgd_d: 50.0,
                krgd_eta: 0.5,
                dcny_c: 0.002,
                dkrr_c: 0.005,
                dkrr_eta: 0.01,
                dkrr_rounds: 10,
            },
        }
    }
}

/// Full description of a sweep; `run_sweep` output is a pure function of
/// this value (wall-clock fields stay zero unless `timing` is set, which
/// trades byte-reproducible output for measurements).
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub task: TaskSpec,
    pub algorithms: Vec<AlgorithmKind>,
    pub m_values: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub test_size: usize,
    /// Public-input tilt; 1 = same distribution as the private inputs.
    pub beta: f64,
    /// Multiplier on the public-count rule.
    pub alpha_n0: f64,
    /// Private points per party (`n = n_per_party·m`).
    pub n_per_party: usize,
    pub timing: bool,
    pub hyper: HyperParams,
}

impl SweepConfig {
    pub fn new(task: TaskSpec) -> Self {
        let hyper = HyperParams::defaults_for(&task);
        Self {
            task,
            algorithms: vec![AlgorithmKind::DclKr, AlgorithmKind::CentralKrgd],
            m_values: vec![10, 20, 40, 80],
            repetitions: 20,
            base_seed: 17,
            test_size: 2000,
            beta: 1.0,
            alpha_n0: 1.0,
            n_per_party: 50,
            timing: false,
            hyper: HyperParams::defaults_for(&task),
        }
        .with_hyper(hyper)
    }

    fn with_hyper(mut self, hyper: HyperParams) -> Self {
        self.hyper = hyper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.m_values.is_empty() || self.m_values.iter().any(|m| *m == 0) {
            return Err(Error::Config("m values must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.n_per_party == 0 {
            return Err(Error::Config("n rule must be positive".into()));
        }
        if self.test_size == 0 {
            return Err(Error::Config("test size must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Config(format!("beta must lie in (0,1], got {}", self.beta)));
        }
        if !(self.alpha_n0 > 0.0) {
            return Err(Error::Config("alpha-n0 must be positive".into()));
        }
        Ok(())
    }

    fn exponent(&self) -> f64 {
        1.0 / (2.0 * self.task.source_exponent() + self.task.decay_exponent())
    }

    /// `λ = C·n^(−1/(2r+s))`.
    pub fn ridge_lambda(&self, c: f64, n: usize) -> f64 {
        c * (n as f64).powf(-self.exponent())
    }

    /// `int(D·n^(1/(2r+s)))`, at least 1.
    pub fn iteration_budget(&self, d: f64, n: usize) -> u32 {
        ((d * (n as f64).powf(self.exponent())) as u32).max(1)
    }
}

/// One observation of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub algorithm: AlgorithmKind,
    pub m: usize,
    pub n: usize,
    pub n0: usize,
    pub seed: u64,
    /// Communication round for per-round records; `None` marks the final
    /// model (rendered as `final` in CSV).
    pub round: Option<u32>,
    pub rmse: f64,
    pub wall_ms: u64,
}

/// Exact CSV header for record files.
pub const CSV_HEADER: &str = "algorithm,m,n,n0,seed,round,rmse,wall_ms";

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let round = match r.round {
            Some(t) => t.to_string(),
            None => "final".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.algorithm, r.m, r.n, r.n0, r.seed, round, r.rmse, r.wall_ms
        ));
    }
    out
}

pub fn records_to_json(records: &[RunRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}

/// The generated state for one `(m, repetition)` cell of a sweep.
pub struct SweepInstance {
    pub m: usize,
    pub n: usize,
    pub n0: usize,
    pub seed: u64,
    pub pool: PartyDataset,
    pub parties: Vec<PartyDataset>,
    pub public_inputs: DMatrix<f64>,
    pub test: PartyDataset,
}

/// Generate the pool, partition, public inputs, and noise-free test set
/// for one sweep cell. Streams are derived from `(base_seed, m, rep)`
/// only, so every algorithm sees identical data and enabling extra
/// algorithms never perturbs the others' results.
pub fn prepare_instance(cfg: &SweepConfig, m: usize, rep: usize) -> Result<SweepInstance> {
    let n = cfg.n_per_party * m;
    let n0 = scaled_public_count(
        n,
        cfg.task.source_exponent(),
        cfg.task.decay_exponent(),
        cfg.alpha_n0,
    );
    let tags = |purpose: u64| [m as u64, rep as u64, purpose];
    let pool = sample_task(&cfg.task, n, &mut rng::stream(cfg.base_seed, &tags(tag::POOL)))?;
    let spec = PartitionSpec::new(cfg.task.default_cells());
    let parties = partition_noniid(
        &pool,
        m,
        &spec,
        &mut rng::stream(cfg.base_seed, &tags(tag::PARTITION)),
    )
    .map_err(|e| match e {
        Error::Coverage { retries, parties, cells } => {
            // surface the offending cell of the sweep
            Error::Config(format!(
                "coverage failed at m={m}, rep={rep}: {}",
                Error::Coverage { retries, parties, cells }
            ))
        }
        other => other,
    })?;
    let dim = cfg.task.dim();
    let public_inputs = sample_public(
        n0,
        cfg.beta,
        dim,
        &mut rng::stream(cfg.base_seed, &tags(tag::PUBLIC)),
    )?;
    let mut test_rng = rng::stream(cfg.base_seed, &tags(tag::TEST));
    use rand::Rng;
    let test_inputs = DMatrix::from_fn(cfg.test_size, dim, |_, _| test_rng.random::<f64>());
    let mut point = vec![0.0; dim];
    let test_labels = DVector::from_fn(cfg.test_size, |i, _| {
        for (j, p) in point.iter_mut().enumerate() {
            *p = test_inputs[(i, j)];
        }
        cfg.task.target(&point)
    });
    Ok(SweepInstance {
        m,
        n,
        n0,
        seed: rng::mix(cfg.base_seed, &[m as u64, rep as u64]),
        pool,
        parties,
        public_inputs,
        test: PartyDataset::new(test_inputs, test_labels)?,
    })
}

/// Run one algorithm on a prepared instance; returns the fitted model and
/// the per-round trace when the algorithm has one.
pub fn run_algorithm(
    cfg: &SweepConfig,
    algo: AlgorithmKind,
    inst: &SweepInstance,
    with_trace: bool,
) -> Result<(RkhsFunction, Vec<f64>)> {
    let kernel = cfg.task.kernel();
    let h = &cfg.hyper;
    match algo {
        AlgorithmKind::DclKr => {
            let rounds = cfg.iteration_budget(h.dcl_d, inst.n);
            let fed = FederationConfig::for_parties(
                kernel,
                inst.public_inputs.clone(),
                &inst.parties,
                h.dcl_local_steps,
                rounds,
                h.dcl_eta,
                inst.seed,
            );
            let heldout = if with_trace { Some(&inst.test) } else { None };
            let (f, trace) = dcl_kr(&inst.parties, &fed, heldout)?;
            Ok((f, trace.heldout_rmse))
        }
        AlgorithmKind::CentralKrr => {
            let lambda = cfg.ridge_lambda(h.krr_c, inst.n);
            Ok((krr_closed_form(kernel, &inst.pool, lambda)?, Vec::new()))
        }
        AlgorithmKind::CentralKrgd => {
            let iters = cfg.iteration_budget(h.krgd_d, inst.n);
            Ok((kernel_gd(kernel, &inst.pool, h.krgd_eta, iters)?, Vec::new()))
        }
        AlgorithmKind::DcNy => {
            let lambda = cfg.ridge_lambda(h.dcny_c, inst.n);
            Ok((dc_ny(&inst.parties, &inst.public_inputs, kernel, lambda)?, Vec::new()))
        }
        AlgorithmKind::DkrrNyCm => {
            let lambda = cfg.ridge_lambda(h.dkrr_c, inst.n);
            Ok((
                dkrr_ny_cm(
                    &inst.parties,
                    &inst.public_inputs,
                    kernel,
                    lambda,
                    h.dkrr_eta,
                    h.dkrr_rounds,
                )?,
                Vec::new(),
            ))
        }
    }
}

fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        (a.algorithm, a.m, a.seed, a.round.map_or(u64::MAX, |r| r as u64)).cmp(&(
            b.algorithm,
            b.m,
            b.seed,
            b.round.map_or(u64::MAX, |r| r as u64),
        ))
    });
}

/// Run the full grid. For each `(m, repetition)` the pool is generated,
/// partitioned, and every selected algorithm is fitted and scored on a
/// fresh noise-free test sample; one final record per algorithm is
/// emitted, in canonical `(algorithm, m, seed)` order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<RunRecord>> {
    run_sweep_inner(cfg, false)
}

/// Like [`run_sweep`] restricted to one `(m, repetition=rep)` cell, with
/// per-round records for the algorithms that iterate.
pub fn run_single(cfg: &SweepConfig, m: usize, rep: usize) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let inst = prepare_instance(cfg, m, rep)?;
    let mut records = Vec::new();
    for &algo in &cfg.algorithms {
        push_records(cfg, algo, &inst, true, &mut records)?;
    }
    sort_records(&mut records);
    Ok(records)
}

fn push_records(
    cfg: &SweepConfig,
    algo: AlgorithmKind,
    inst: &SweepInstance,
    with_trace: bool,
    records: &mut Vec<RunRecord>,
) -> Result<()> {
    let started = Instant::now();
    let (model, trace) = run_algorithm(cfg, algo, inst, with_trace)?;
    let wall_ms = if cfg.timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    };
    let rmse = evaluate_rmse(&model, &inst.test)?;
    for (t, round_rmse) in trace.iter().enumerate() {
        records.push(RunRecord {
            algorithm: algo,
            m: inst.m,
            n: inst.n,
            n0: inst.n0,
            seed: inst.seed,
            round: Some(t as u32 + 1),
            rmse: *round_rmse,
            wall_ms: 0,
        });
    }
    records.push(RunRecord {
        algorithm: algo,
        m: inst.m,
        n: inst.n,
        n0: inst.n0,
        seed: inst.seed,
        round: None,
        rmse,
        wall_ms,
    });
    Ok(())
}

fn run_sweep_inner(cfg: &SweepConfig, with_trace: bool) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    for &m in &cfg.m_values {
        for rep in 0..cfg.repetitions {
            let inst = prepare_instance(cfg, m, rep)?;
            for &algo in &cfg.algorithms {
                push_records(cfg, algo, &inst, with_trace, &mut records)?;
            }
        }
    }
    sort_records(&mut records);
    Ok(records)
}

/// Mean of the final-round RMSE per data size for one algorithm, as
/// `(n, mean)` pairs sorted by n. Only final records enter the average.
pub fn mean_final_rmse(records: &[RunRecord], algo: AlgorithmKind) -> Vec<(f64, f64)> {
    let mut by_n: Vec<(usize, Vec<f64>)> = Vec::new();
    for r in records {
        if r.algorithm != algo || r.round.is_some() {
            continue;
        }
        match by_n.iter_mut().find(|(n, _)| *n == r.n) {
            Some((_, v)) => v.push(r.rmse),
            None => by_n.push((r.n, vec![r.rmse])),
        }
    }
    by_n.sort_by_key(|(n, _)| *n);
    by_n
        .into_iter()
        .map(|(n, v)| (n as f64, v.iter().sum::<f64>() / v.len() as f64))
        .collect()
}

/// Least-squares line through `(log₁₀ n, log₁₀ rmse)`; returns
/// `(slope, intercept, residual sum of squares)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.iter().any(|(n, r)| !(*n > 0.0) || !(*r > 0.0)) {
        return Err(Error::Config(
            "log-log fit needs positive sizes and positive errors".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| n.log10()).collect();
    let mut distinct = xs.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Config("log-log fit needs at least 2 distinct sizes".into()));
    }
    let ys: Vec<f64> = points.iter().map(|(_, r)| r.log10()).collect();
    let k = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / k;
    let mean_y = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok((slope, intercept, rss))
}

/// Effective dimension `Σ λᵢ/(λᵢ+λ)` of a spectrum at regularization `λ`.
/// Small negative eigenvalues from finite-precision eigensolves are
/// clipped to zero.
pub fn effective_dimension(eigenvalues: &[f64], lambda: f64) -> f64 {
    eigenvalues
        .iter()
        .map(|v| {
            let v = v.max(0.0);
            v / (v + lambda)
        })
        .sum()
}

/// Local complexity radius `√((1/n)·Σ min(λᵢ, ε²))`.
pub fn rademacher_r(eigenvalues: &[f64], epsilon: f64, n: usize) -> f64 {
    let e2 = epsilon * epsilon;
    let sum: f64 = eigenvalues.iter().map(|v| v.max(0.0).min(e2)).sum();
    (sum / n as f64).sqrt()
}

/// Midpoint grid of `n` points on `[0,1]`, as an n×1 point matrix.
pub fn unit_grid(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, 1, |i, _| (i as f64 + 0.5) / n as f64)
}

/// Eigenvalues of `(1/n)·K` on the given points, descending.
pub fn normalized_gram_eigenvalues(
    kernel: crate::kernel::KernelSpec,
    points: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let n = points.nrows();
    let k = gram(kernel, points, points)? / n as f64;
    Ok(symmetric_eigenvalues_desc(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn slope_recovers_exact_power_law() {
        let pts: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0]
            .iter()
            .map(|&n: &f64| (n, 3.0 * n.powf(-0.4)))
            .collect();
        let (slope, intercept, rss) = fit_loglog_slope(&pts).unwrap();
        assert!((slope + 0.4).abs() < 1e-12);
        assert!((intercept - 3.0f64.log10()).abs() < 1e-12);
        assert!(rss < 1e-24);
    }

    #[test]
    fn slope_two_points_interpolates() {
        let (slope, _, rss) = fit_loglog_slope(&[(10.0, 1.0), (1000.0, 0.01)]).unwrap();
        assert!((slope + 1.0).abs() < 1e-12);
        assert!(rss < 1e-24);
    }

    #[test]
    fn slope_tolerates_mild_noise() {
        let mut rng = crate::rng::stream(33, &[]);
        for _ in 0..20 {
            let pts: Vec<(f64, f64)> = (0..8)
                .map(|i| {
                    let n = 100.0 * 2f64.powi(i);
                    let noise = 1.0 + 0.01 * (rng.random::<f64>() * 2.0 - 1.0);
                    (n, 2.0 * n.powf(-0.37) * noise)
                })
                .collect();
            let (slope, _, _) = fit_loglog_slope(&pts).unwrap();
            assert!((slope + 0.37).abs() < 0.02, "slope {slope}");
        }
    }

    #[test]
    fn slope_rejects_bad_inputs() {
        assert!(fit_loglog_slope(&[(10.0, 0.0), (20.0, 1.0)]).is_err());
        assert!(fit_loglog_slope(&[(10.0, 1.0), (10.0, 2.0)]).is_err());
    }

    #[test]
    fn effective_dimension_limits() {
        assert_eq!(effective_dimension(&[0.0, 0.0], 0.5), 0.0);
        let vals = [2.0, 1.0, 0.25];
        assert!((effective_dimension(&vals, 1e-12) - 3.0).abs() < 1e-9);
        assert!(effective_dimension(&[1.0, -1e-15], 0.1) <= 1.0 / 1.1 + 1e-12);
    }

    #[test]
    fn rademacher_r_shape() {
        let vals = [0.9, 0.4, 0.1, 0.025];
        assert_eq!(rademacher_r(&vals, 0.0, 4), 0.0);
        let sat = rademacher_r(&vals, 10.0, 4);
        assert!((sat - (vals.iter().sum::<f64>() / 4.0).sqrt()).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..50 {
            let eps = i as f64 * 0.05;
            let v = rademacher_r(&vals, eps, 4);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    fn tiny_sweep() -> SweepConfig {
        let mut cfg = SweepConfig::new(TaskSpec::toy1d());
        cfg.m_values = vec![6];
        cfg.repetitions = 1;
        cfg.test_size = 200;
        cfg.algorithms = vec![AlgorithmKind::DclKr];
        cfg.base_seed = 5;
        cfg
    }

    #[test]
    fn sweep_emits_one_final_record_per_algorithm() {
        let records = run_sweep(&tiny_sweep()).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.algorithm, AlgorithmKind::DclKr);
        assert_eq!(r.m, 6);
        assert_eq!(r.n, 300);
        assert!(r.round.is_none());
        assert!(r.rmse >= 0.0);
        assert_eq!(r.wall_ms, 0);
    }

    #[test]
    fn sweep_is_byte_deterministic() {
        let cfg = tiny_sweep();
        let a = records_to_csv(&run_sweep(&cfg).unwrap());
        let b = records_to_csv(&run_sweep(&cfg).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("algorithm,m,n,n0,seed,round,rmse,wall_ms\n"));
    }

    #[test]
    fn adding_algorithms_does_not_perturb_existing_results() {
        let cfg1 = tiny_sweep();
        let mut cfg2 = tiny_sweep();
        cfg2.algorithms = vec![AlgorithmKind::DclKr, AlgorithmKind::CentralKrr];
        let solo = run_sweep(&cfg1).unwrap();
        let both = run_sweep(&cfg2).unwrap();
        let dcl_in_both: Vec<_> = both
            .iter()
            .filter(|r| r.algorithm == AlgorithmKind::DclKr)
            .collect();
        assert_eq!(solo[0].rmse, dcl_in_both[0].rmse);
    }

    #[test]
    fn run_single_emits_rounds_then_final() {
        let cfg = tiny_sweep();
        let records = run_single(&cfg, 6, 0).unwrap();
        assert!(records.len() > 1);
        let finals: Vec<_> = records.iter().filter(|r| r.round.is_none()).collect();
        assert_eq!(finals.len(), 1);
        // rounds are 1-based and sorted before the final record
        assert_eq!(records[0].round, Some(1));
        assert!(records.last().unwrap().round.is_none());
        // the last consensus round equals the final model's score
        let last_round = records[records.len() - 2].rmse;
        assert!((last_round - finals[0].rmse).abs() < 1e-12);
    }

    #[test]
    fn mean_aggregation_uses_final_records_only() {
        let records = vec![
            RunRecord {
                algorithm: AlgorithmKind::DclKr,
                m: 4,
                n: 200,
                n0: 50,
                seed: 1,
                round: Some(1),
                rmse: 100.0,
                wall_ms: 0,
            },
            RunRecord {
                algorithm: AlgorithmKind::DclKr,
                m: 4,
                n: 200,
                n0: 50,
                seed: 1,
                round: None,
                rmse: 0.5,
                wall_ms: 0,
            },
            RunRecord {
                algorithm: AlgorithmKind::DclKr,
                m: 4,
                n: 200,
                n0: 50,
                seed: 2,
                round: None,
                rmse: 1.5,
                wall_ms: 0,
            },
        ];
        let means = mean_final_rmse(&records, AlgorithmKind::DclKr);
        assert_eq!(means, vec![(200.0, 1.0)]);
    }

    #[test]
    fn csv_round_rendering() {
        let records = vec![RunRecord {
            algorithm: AlgorithmKind::DcNy,
            m: 2,
            n: 100,
            n0: 30,
            seed: 9,
            round: Some(3),
            rmse: 0.25,
            wall_ms: 12,
        }];
        let csv = records_to_csv(&records);
        assert!(csv.contains("dc-ny,2,100,30,9,3,0.25,12"));
    }
}
