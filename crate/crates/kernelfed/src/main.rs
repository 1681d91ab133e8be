//! Command-line experiment harness.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand::Rng;

use kernelfed::bench::{
    self, fit_loglog_slope, mean_final_rmse, records_to_csv, records_to_json, SweepConfig,
};
use kernelfed::config::{parse_algorithms, parse_task_variant, FileConfig};
use kernelfed::datagen::TaskVariant;
use kernelfed::distill::{
    self, cka, cka_grad, feature_gram, lr_scale, self_hsic_subsampled, FeatureMatrix,
};
use kernelfed::error::{Error, Result};
use kernelfed::kernel::KernelSpec;
use kernelfed::protocol::{dcl_kr, dcl_kr_recurrence_oracle, FederationConfig};
use kernelfed::rng::stream;
use kernelfed::PartyDataset;

#[derive(Parser)]
#[command(
    name = "kernelfed",
    about = "Collaborative kernel regression experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment grid and emit one record per (algorithm, m, repetition).
    Sweep(SweepArgs),
    /// Run a single (m, repetition) cell with per-round records.
    Run(RunArgs),
    /// Spectral diagnostics for a kernel: eigendecay, effective dimension, complexity radius.
    Diagnose(DiagnoseArgs),
    /// Feature-kernel matching demo on explicit feature matrices (HSIC/CKA).
    DistillDemo(DistillArgs),
    /// Cross-check the iterative protocol against its closed-form recurrence oracle.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonSweepArgs {
    /// TOML config file; command-line flags override its values.
    #[arg(long)]
    config: Option<String>,
    /// Base seed for all derived randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Task: toy1d or toy3d.
    #[arg(long)]
    task: Option<String>,
    /// Public-input tilt in (0,1]; 1 samples public inputs uniformly.
    #[arg(long)]
    beta: Option<f64>,
    /// Multiplier on the public-input count rule.
    #[arg(long = "alpha-n0")]
    alpha_n0: Option<f64>,
    /// Comma-separated algorithm list.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// Comma-separated party counts.
    #[arg(long = "m-values", value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long = "test-size")]
    test_size: Option<usize>,
    #[arg(long = "n-per-party")]
    n_per_party: Option<usize>,
    #[arg(long = "noise-sd")]
    noise_sd: Option<f64>,
    #[arg(long)]
    truncation: Option<usize>,
    /// Record wall-clock times (breaks byte-for-byte output reproducibility).
    #[arg(long)]
    timing: bool,
    #[arg(long = "dcl-d")]
    dcl_d: Option<f64>,
    #[arg(long = "dcl-eta")]
    dcl_eta: Option<f64>,
    /// Local gradient steps per round for the collaborative protocol.
    #[arg(long = "dcl-e")]
    dcl_e: Option<u32>,
    #[arg(long = "krr-c")]
    krr_c: Option<f64>,
    #[arg(long = "krgd-d")]
    krgd_d: Option<f64>,
    #[arg(long = "krgd-eta")]
    krgd_eta: Option<f64>,
    #[arg(long = "dcny-c")]
    dcny_c: Option<f64>,
    #[arg(long = "dkrr-c")]
    dkrr_c: Option<f64>,
    #[arg(long = "dkrr-eta")]
    dkrr_eta: Option<f64>,
    #[arg(long = "dkrr-rounds")]
    dkrr_rounds: Option<u32>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonSweepArgs,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonSweepArgs,
    /// Party count; defaults to the first configured m value.
    #[arg(long)]
    m: Option<usize>,
    /// Repetition index selecting the derived streams.
    #[arg(long, default_value = "0")]
    rep: usize,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Kernel: min, wendland0, wendland2, or gaussian.
    #[arg(long, default_value = "min")]
    kernel: String,
    /// Bandwidth for the gaussian kernel.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Number of sample points.
    #[arg(long, default_value = "2000")]
    n: usize,
    /// Input dimension (1 for min, up to 3 for the compact kernels).
    #[arg(long, default_value = "1")]
    dim: usize,
    /// Sample inputs uniformly at random instead of the 1-d midpoint grid.
    #[arg(long)]
    sample: bool,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Regularization values for the effective dimension.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01")]
    lambdas: Vec<f64>,
    /// Radii for the complexity quantity; default is a 20-point grid on (0,1].
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// How many leading eigenvalues to report.
    #[arg(long, default_value = "10")]
    top: usize,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct DistillArgs {
    /// Comma-separated feature CSV files, one per party.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    /// Generate random parties instead: "parties,rows,cols".
    #[arg(long)]
    random: Option<String>,
    /// Aggregation weights; default is proportional-equal.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Gradient-ascent steps of kernel matching.
    #[arg(long, default_value = "60")]
    steps: usize,
    #[arg(long = "step-size", default_value = "0.05")]
    step_size: f64,
    /// Base learning rate scaled by the self-HSIC rule.
    #[arg(long, default_value = "0.1")]
    eta0: f64,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct OracleArgs {
    /// Number of random small instances to check.
    #[arg(long, default_value = "20")]
    seeds: u64,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Maximum allowed deviation on the public inputs.
    #[arg(long, default_value = "1e-8")]
    tol: f64,
}

fn emit(out: &Option<String>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn build_sweep_config(common: &CommonSweepArgs) -> Result<SweepConfig> {
    let file = match &common.config {
        Some(path) => FileConfig::parse(&fs::read_to_string(path)?)?,
        None => FileConfig::default(),
    };
    let variant = match &common.task {
        Some(t) => parse_task_variant(t)?,
        None => file.variant()?.unwrap_or(TaskVariant::Toy1d),
    };
    let mut cfg = file.resolve(variant)?;
    if let Some(v) = common.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = common.beta {
        cfg.beta = v;
    }
    if let Some(v) = common.alpha_n0 {
        cfg.alpha_n0 = v;
    }
    if let Some(a) = &common.algorithms {
        cfg.algorithms = parse_algorithms(a)?;
    }
    if let Some(v) = &common.m_values {
        cfg.m_values = v.clone();
    }
    if let Some(v) = common.repetitions {
        cfg.repetitions = v;
    }
    if let Some(v) = common.test_size {
        cfg.test_size = v;
    }
    if let Some(v) = common.n_per_party {
        cfg.n_per_party = v;
    }
    if let Some(v) = common.noise_sd {
        cfg.task.noise_sd = v;
    }
    if let Some(v) = common.truncation {
        cfg.task.truncation = v;
    }
    if common.timing {
        cfg.timing = true;
    }
    if let Some(v) = common.dcl_d {
        cfg.hyper.dcl_d = v;
    }
    if let Some(v) = common.dcl_eta {
        cfg.hyper.dcl_eta = v;
    }
    if let Some(v) = common.dcl_e {
        cfg.hyper.dcl_local_steps = v;
    }
    if let Some(v) = common.krr_c {
        cfg.hyper.krr_c = v;
    }
    if let Some(v) = common.krgd_d {
        cfg.hyper.krgd_d = v;
    }
    if let Some(v) = common.krgd_eta {
        cfg.hyper.krgd_eta = v;
    }
    if let Some(v) = common.dcny_c {
        cfg.hyper.dcny_c = v;
    }
    if let Some(v) = common.dkrr_c {
        cfg.hyper.dkrr_c = v;
    }
    if let Some(v) = common.dkrr_eta {
        cfg.hyper.dkrr_eta = v;
    }
    if let Some(v) = common.dkrr_rounds {
        cfg.hyper.dkrr_rounds = v;
    }
    Ok(cfg)
}

fn format_records(records: &[bench::RunRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => records_to_csv(records),
        OutputFormat::Json => records_to_json(records),
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = build_sweep_config(&args.common)?;
    let records = bench::run_sweep(&cfg)?;
    emit(&args.common.out, &format_records(&records, args.common.format))?;
    // human summary on stderr so stdout stays machine-parseable
    for &algo in &cfg.algorithms {
        let means = mean_final_rmse(&records, algo);
        if means.len() >= 2 {
            if let Ok((slope, _, _)) = fit_loglog_slope(&means) {
                eprintln!("{algo}: fitted log-log slope {slope:.4}");
            }
        }
        for (n, mean) in means {
            eprintln!("{algo}: n={n:>6} mean rmse {mean:.5}");
        }
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = build_sweep_config(&args.common)?;
    let m = args.m.unwrap_or(cfg.m_values[0]);
    let records = bench::run_single(&cfg, m, args.rep)?;
    emit(&args.common.out, &format_records(&records, args.common.format))?;
    Ok(())
}

struct Report {
    rows: Vec<(String, f64, f64)>,
}

impl Report {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn push(&mut self, quantity: &str, param: f64, value: f64) {
        self.rows.push((quantity.to_string(), param, value));
    }

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = String::from("quantity,param,value\n");
                for (q, p, v) in &self.rows {
                    out.push_str(&format!("{q},{p},{v}\n"));
                }
                out
            }
            OutputFormat::Json => {
                let items: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|(q, p, v)| {
                        serde_json::json!({"quantity": q, "param": p, "value": v})
                    })
                    .collect();
                serde_json::to_string_pretty(&items).expect("report serialize")
            }
        }
    }
}

fn parse_kernel(name: &str, bandwidth: Option<f64>) -> Result<KernelSpec> {
    match name {
        "min" => Ok(KernelSpec::MinKernel),
        "wendland0" => Ok(KernelSpec::Wendland0),
        "wendland2" => Ok(KernelSpec::Wendland2),
        "gaussian" => Ok(KernelSpec::Gaussian {
            bandwidth: bandwidth.unwrap_or(0.2),
        }),
        other => Err(Error::Config(format!(
            "unknown kernel {other:?}; expected min, wendland0, wendland2, or gaussian"
        ))),
    }
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    let kernel = parse_kernel(&args.kernel, args.bandwidth)?;
    if args.n == 0 {
        return Err(Error::Config("need at least one sample point".into()));
    }
    if args.lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Config("lambdas must be positive".into()));
    }
    let points = if args.sample || args.dim > 1 {
        let mut rng = stream(args.seed, &[args.dim as u64]);
        DMatrix::from_fn(args.n, args.dim, |_, _| rng.random::<f64>())
    } else {
        bench::unit_grid(args.n)
    };
    let eigs = bench::normalized_gram_eigenvalues(kernel, &points)?;
    let mut report = Report::new();
    for (i, v) in eigs.iter().take(args.top).enumerate() {
        report.push("eigenvalue", (i + 1) as f64, *v);
    }
    if kernel == KernelSpec::MinKernel {
        for i in 1..=args.top.min(eigs.len()) {
            let theory = ((2.0 * i as f64 - 1.0) * std::f64::consts::FRAC_PI_2).powi(-2);
            report.push("theory_eigenvalue", i as f64, theory);
        }
    }
    let kappa2 = kernel.kappa() * kernel.kappa();
    for &l in &args.lambdas {
        report.push("effective_dimension", l, bench::effective_dimension(&eigs, l));
        report.push("effective_dimension_bound", l, kappa2 / l);
    }
    let epsilons: Vec<f64> = match &args.epsilons {
        Some(v) => v.clone(),
        None => (0..=20).map(|i| i as f64 / 20.0).collect(),
    };
    for &e in &epsilons {
        report.push("complexity_radius", e, bench::rademacher_r(&eigs, e, args.n));
    }
    emit(&args.out, &report.render(args.format))
}

fn random_features_spec(spec: &str, seed: u64) -> Result<Vec<FeatureMatrix>> {
    let parts: Vec<usize> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Config(format!("bad --random spec {spec:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        return Err(Error::Config(
            "--random expects \"parties,rows,cols\"".into(),
        ));
    }
    let (m, p, c) = (parts[0], parts[1], parts[2]);
    if m == 0 || p < 2 || c == 0 {
        return Err(Error::Config(
            "--random needs parties ≥ 1, rows ≥ 2, cols ≥ 1".into(),
        ));
    }
    (0..m)
        .map(|j| {
            let mut rng = stream(seed, &[j as u64]);
            FeatureMatrix::new(DMatrix::from_fn(p, c, |_, _| rng.random::<f64>() * 2.0 - 1.0))
        })
        .collect()
}

fn cmd_distill(args: &DistillArgs) -> Result<()> {
    let features: Vec<FeatureMatrix> = match (&args.features, &args.random) {
        (Some(paths), None) => paths
            .iter()
            .map(|p| FeatureMatrix::from_csv(&fs::read_to_string(p)?))
            .collect::<Result<_>>()?,
        (None, Some(spec)) => random_features_spec(spec, args.seed)?,
        _ => {
            return Err(Error::Config(
                "give exactly one of --features or --random".into(),
            ))
        }
    };
    let m = features.len();
    let weights = match &args.weights {
        Some(w) => {
            if w.len() != m {
                return Err(Error::Config(format!("{} weights for {m} parties", w.len())));
            }
            w.clone()
        }
        None => vec![1.0 / m as f64; m],
    };
    let (_, target) = distill::party_grams_and_ensemble(&features, &weights)?;

    let mut report = Report::new();
    let mut matched = features;
    for (j, f) in matched.iter_mut().enumerate() {
        for step in 0..=args.steps {
            let value = cka(&feature_gram(f), &target)?;
            report.push(&format!("cka_party{j}"), step as f64, value);
            if step < args.steps {
                let grad = cka_grad(f, &target)?;
                f.0 += args.step_size * grad;
            }
        }
    }
    let alphas: Vec<f64> = matched
        .iter()
        .map(|f| self_hsic_subsampled(&feature_gram(f), args.seed))
        .collect::<Result<_>>()?;
    for (j, rate) in lr_scale(&alphas, args.eta0)?.iter().enumerate() {
        report.push("lr_scale", j as f64, *rate);
    }
    emit(&args.out, &report.render(args.format))
}

fn cmd_oracle_check(args: &OracleArgs) -> Result<bool> {
    let mut worst: f64 = 0.0;
    for s in 0..args.seeds {
        let mut rng = stream(args.seed, &[s]);
        let m = rng.random_range(1..=3usize);
        let parties: Vec<PartyDataset> = (0..m)
            .map(|_| {
                let n = rng.random_range(2..=10usize);
                let x = DMatrix::from_fn(n, 1, |_, _| rng.random::<f64>());
                let y = nalgebra::DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
                PartyDataset::new(x, y)
            })
            .collect::<Result<_>>()?;
        let n0 = rng.random_range(2..=12usize);
        let z = DMatrix::from_fn(n0, 1, |_, _| rng.random::<f64>());
        let local_steps = if rng.random::<f64>() < 0.5 { 1 } else { 3 };
        let rounds = if rng.random::<f64>() < 0.5 { 1 } else { 4 };
        let cfg = FederationConfig::for_parties(
            KernelSpec::MinKernel,
            z.clone(),
            &parties,
            local_steps,
            rounds,
            0.5,
            s,
        );
        let (f, _) = dcl_kr(&parties, &cfg, None)?;
        let iterative = f.evaluate(&z)?;
        let oracle = dcl_kr_recurrence_oracle(&parties, &cfg)?;
        let dev = (iterative - oracle).amax();
        worst = worst.max(dev);
        println!(
            "seed {s}: m={m} E={local_steps} T={rounds} n0={n0} max deviation {dev:.3e}"
        );
    }
    println!("worst deviation over {} seeds: {worst:.3e} (tolerance {})", args.seeds, args.tol);
    Ok(worst <= args.tol)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Diagnose(a) => cmd_diagnose(a).map(|_| true),
        Command::DistillDemo(a) => cmd_distill(a).map(|_| true),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
