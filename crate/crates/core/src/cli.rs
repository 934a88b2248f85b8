//! Experiment files and the `fosgd` command line.
//!
//! An experiment file is TOML. Run parameters sit at the top level and use the
//! same names as the command-line overrides; the problem lives in `[problem]`:
//!
//! ```toml
//! algorithm = "fo-sgd"
//! workers = 8
//! iters = 2000
//! k = 15
//! alpha = 4.0
//! alpha-server = 4.0
//! step = "bound-optimal"
//! out = "lsq128.csv"
//!
//! [problem]
//! kind = "least-squares"
//! rows = 1024
//! dim = 128
//! noise = 0.1
//! seed = 1
//! batch = 8
//! radius = 1.0
//! ```
//!
//! Unknown keys are errors. Dithering amplitudes and the norm bound are always
//! derived, so `lambda`, `lambda-server` and `norm-bound` are rejected too.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::codec::{self, EncodedGradient};
use crate::error::{Error, Result};
use crate::oracle::{
    self, ExactGradientOracle, GradientOracle, LeastSquaresOracle, LeastSquaresProblem, OneSparseOracle,
    QuadraticCosine, ShiftedQuadratic,
};
use crate::quantizer::{self, DitherConfig};
use crate::simulator::{self, Algorithm, ProblemStats, Record, RunConfig, StepSchedule, Trace, WirePath};
use crate::transform::sample_basis;

/// Environment variable capping worker-phase threads; 0 runs sequentially.
pub const THREADS_ENV: &str = "FOSGD_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// Constant step minimizing the convex bound.
    BoundOptimal,
    /// Constant `step-size`.
    Constant,
    /// `1/√T`.
    OneOverSqrtT,
    /// `step-size/√(t+1)`.
    InverseSqrt,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum InitialPoint {
    Fill(f64),
    Vector(Vec<f64>),
}

impl Default for InitialPoint {
    fn default() -> Self {
        InitialPoint::Fill(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    #[default]
    Exact,
    OneSparse,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// Synthetic Gaussian least squares with a minibatch oracle.
    LeastSquares {
        rows: usize,
        dim: usize,
        noise: f64,
        seed: u64,
        batch: usize,
        radius: f64,
    },
    /// Least squares read from text files, paths relative to the experiment file.
    LeastSquaresFile {
        matrix: PathBuf,
        targets: PathBuf,
        batch: usize,
        radius: f64,
    },
    /// `‖x + shift·𝟙‖²` with the 1-sparse oracle.
    SparseQuadratic { dim: usize, shift: f64, radius: f64 },
    /// `‖x‖²/2 + Σ cos x_j`.
    QuadraticCosine {
        dim: usize,
        radius: f64,
        #[serde(default)]
        oracle: OracleKind,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentFile {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub seed: u64,
    pub workers: usize,
    pub iters: usize,
    #[serde(default = "default_k")]
    pub k: u16,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_alpha")]
    pub alpha_server: f64,
    pub step: StepRule,
    pub step_size: Option<f64>,
    #[serde(default)]
    pub x0: InitialPoint,
    pub out: Option<PathBuf>,
    pub problem: ProblemSpec,
}

fn default_k() -> u16 {
    1
}

fn default_alpha() -> f64 {
    2.0
}

/// Command-line values that replace experiment-file keys.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "alpha-server")]
    pub alpha_server: Option<f64>,
    #[arg(long)]
    pub k: Option<u16>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub file: ExperimentFile,
    base_dir: PathBuf,
}

impl Experiment {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let file: ExperimentFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            file,
            base_dir: base_dir.into(),
        })
    }

    pub fn with_overrides(mut self, o: &Overrides) -> Self {
        let f = &mut self.file;
        if let Some(v) = o.seed {
            f.seed = v;
        }
        if let Some(v) = &o.out {
            f.out = Some(v.clone());
        }
        if let Some(v) = o.workers {
            f.workers = v;
        }
        if let Some(v) = o.iters {
            f.iters = v;
        }
        if let Some(v) = o.alpha {
            f.alpha = v;
        }
        if let Some(v) = o.alpha_server {
            f.alpha_server = v;
        }
        if let Some(v) = o.k {
            f.k = v;
        }
        self
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.file.algorithm = algorithm;
        self
    }

    pub fn oracle(&self) -> Result<Box<dyn GradientOracle>> {
        Ok(match &self.file.problem {
            ProblemSpec::LeastSquares {
                rows,
                dim,
                noise,
                seed,
                batch,
                radius,
            } => Box::new(LeastSquaresOracle::new(
                LeastSquaresProblem::synthetic(*rows, *dim, *noise, *seed)?,
                *batch,
                *radius,
            )?),
            ProblemSpec::LeastSquaresFile {
                matrix,
                targets,
                batch,
                radius,
            } => {
                let p = LeastSquaresProblem::load_text(self.base_dir.join(matrix), self.base_dir.join(targets))?;
                Box::new(LeastSquaresOracle::new(p, *batch, *radius)?)
            }
            ProblemSpec::SparseQuadratic { dim, shift, radius } => {
                let f = ShiftedQuadratic::new(vec![-shift; *dim])?;
                Box::new(OneSparseOracle::new(f, *radius)?)
            }
            ProblemSpec::QuadraticCosine { dim, radius, oracle } => {
                let f = QuadraticCosine::new(*dim)?;
                match oracle {
                    OracleKind::Exact => Box::new(ExactGradientOracle::new(f, *radius)?),
                    OracleKind::OneSparse => Box::new(OneSparseOracle::new(f, *radius)?),
                }
            }
        })
    }

    fn initial_point(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.file.x0 {
            InitialPoint::Fill(v) => Ok(vec![*v; dim]),
            InitialPoint::Vector(v) if v.len() == dim => Ok(v.clone()),
            InitialPoint::Vector(v) => Err(Error::Config(format!("x0 has {} entries, problem has {dim}", v.len()))),
        }
    }

    /// Problem constants at the configured start, with `σ²` estimated over
    /// the trust region and `G² = B²`.
    pub fn problem_stats(&self, oracle: &dyn GradientOracle) -> Result<ProblemStats> {
        let x0 = self.initial_point(oracle.dim())?;
        let xs = oracle
            .objective()
            .minimizer()
            .ok_or_else(|| Error::Config("the bound-optimal step needs a problem with a known minimizer".into()))?;
        let distance = oracle::norm(&x0.iter().zip(xs).map(|(a, b)| a - b).collect::<Vec<_>>());
        Ok(ProblemStats {
            initial_distance: distance,
            grad_sq: oracle.norm_bound().powi(2),
            variance: oracle::trust_region_variance(oracle, 20, 200, 0),
            mean_distance: 0.0,
        })
    }

    pub fn run_config(&self, oracle: &dyn GradientOracle, threads: usize) -> Result<RunConfig> {
        let f = &self.file;
        let x0 = self.initial_point(oracle.dim())?;
        let mut config = RunConfig {
            algorithm: f.algorithm,
            workers: f.workers,
            iterations: f.iters,
            k_reps: f.k,
            alpha: f.alpha,
            alpha_server: f.alpha_server,
            seed: f.seed,
            threads,
            wire: WirePath::Serialized,
            ..RunConfig::new(x0)
        };
        let size = || {
            f.step_size
                .ok_or_else(|| Error::Config("this step rule needs step-size".into()))
        };
        let no_size = || match f.step_size {
            Some(_) => Err(Error::Config(
                "step-size is only used by constant and inverse-sqrt steps".into(),
            )),
            None => Ok(()),
        };
        config.step = match f.step {
            StepRule::Constant => StepSchedule::Constant { step: size()? },
            StepRule::InverseSqrt => StepSchedule::InverseSqrt { initial: size()? },
            StepRule::OneOverSqrtT => {
                no_size()?;
                StepSchedule::OneOverSqrtT
            }
            StepRule::BoundOptimal => {
                no_size()?;
                let stats = self.problem_stats(oracle)?;
                StepSchedule::Constant {
                    step: simulator::bound_optimal_step(&config, oracle.dim(), oracle.norm_bound(), &stats),
                }
            }
        };
        Ok(config)
    }

    pub fn run(&self, threads: usize) -> Result<Trace> {
        let oracle = self.oracle()?;
        let config = self.run_config(oracle.as_ref(), threads)?;
        simulator::run(oracle.as_ref(), &config)
    }

    pub fn out(&self) -> Option<&Path> {
        self.file.out.as_deref()
    }
}

/// Reads the thread cap from the environment, defaulting to all cores.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a nonnegative integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// `trace.csv` → `trace.summary.toml`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.toml")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Merged CSV keyed by `(algorithm, t)`.
pub fn write_merged<W: std::io::Write>(out: W, runs: &[(Algorithm, Vec<Record>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Config(format!("writing csv: {e}"));
    let mut header = vec!["algorithm"];
    header.extend(simulator::CSV_HEADER);
    w.write_record(&header).map_err(err)?;
    for (alg, records) in runs {
        for r in records {
            w.write_record([
                alg.name().to_string(),
                r.t.to_string(),
                simulator::fmt_f64(r.f),
                simulator::fmt_f64(r.grad_norm),
                simulator::fmt_f64(r.subopt),
                simulator::fmt_f64(r.halfspace),
                r.bits_up.to_string(),
                r.bits_down.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Config(format!("writing csv: {e}")))
}

/// A fixed encoding checked into `tests/golden`.
#[derive(Debug, Clone, Copy)]
pub struct GoldenCase {
    pub name: &'static str,
    pub input: &'static [f64],
    pub k_reps: u16,
    pub lambda: f64,
    pub seed: u64,
}

pub const GOLDEN_CASES: [GoldenCase; 3] = [
    GoldenCase {
        name: "d4_k1_lambda1",
        input: &[0.5, -0.25, 0.125, 1.0],
        k_reps: 1,
        lambda: 1.0,
        seed: 42,
    },
    GoldenCase {
        name: "d5_k3_lambda2",
        input: &[1.5, -2.0, 0.0, 0.75, -0.5],
        k_reps: 3,
        lambda: 2.0,
        seed: 7,
    },
    GoldenCase {
        name: "d16_k15_lambda0p5",
        input: &[
            0.1, -0.2, 0.3, -0.4, 0.5, -0.6, 0.7, -0.8, 0.9, -1.0, 1.1, -1.2, 1.3, -1.4, 1.5, -1.6,
        ],
        k_reps: 15,
        lambda: 0.5,
        seed: 2024,
    },
];

impl GoldenCase {
    /// Basis first, then dithers, both from one ChaCha8 stream seeded with `seed`.
    pub fn encode(&self) -> EncodedGradient {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let basis = sample_basis(codec::padded_dim(self.input.len()), &mut rng).expect("power of two");
        let config = DitherConfig::new(self.lambda, self.k_reps).expect("valid case");
        codec::encode(self.input, &basis, config, &mut rng).expect("matching dimensions")
    }

    pub fn file_name(&self) -> String {
        format!("{}.bin", self.name)
    }
}

pub fn default_golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Checks every golden file; returns one line per case and whether all matched.
pub fn check_golden(dir: &Path) -> Result<(Vec<String>, bool)> {
    let mut lines = Vec::new();
    let mut ok = true;
    for case in GOLDEN_CASES {
        let path = dir.join(case.file_name());
        let stored = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let fresh = codec::serialize(&case.encode());
        let reparsed = codec::deserialize(&stored).map(|e| codec::serialize(&e));
        let good = stored == fresh && reparsed.as_deref().ok() == Some(&stored[..]);
        ok &= good;
        lines.push(format!(
            "{} {} ({} bytes)",
            if good { "ok  " } else { "FAIL" },
            case.name,
            stored.len()
        ));
    }
    Ok((lines, ok))
}

pub fn write_golden(dir: &Path) -> Result<()> {
    for case in GOLDEN_CASES {
        write_file(&dir.join(case.file_name()), &codec::serialize(&case.encode()))?;
    }
    Ok(())
}

/// Empirical `E‖Q(x) − x‖²` next to `(λ²d − ‖x‖²)/K` for a random in-range `x`.
pub fn mse_check(d: usize, lambda: f64, k: u16, trials: usize, seed: u64) -> Result<(f64, f64)> {
    let config = DitherConfig::new(lambda, k)?;
    if d == 0 || trials == 0 {
        return Err(Error::Config("d and trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-lambda..=lambda)).collect();
    let analytic = quantizer::quantizer_mse(&x, config)?;
    let mut acc = 0.0;
    for _ in 0..trials {
        let q = quantizer::quantize(&x, config, &mut rng).dequantize();
        acc += q.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok((acc / trials as f64, analytic))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessReport {
    pub empirical: f64,
    pub bound: f64,
    pub slack: f64,
}

impl FlatnessReport {
    pub fn passes(&self) -> bool {
        self.empirical <= self.bound + self.slack
    }
}

/// Frequency of `‖H_ε x‖_∞ > α√(ln d/d)‖x‖₂` over random bases, for one
/// random `s`-sparse sign vector `x`, against `2exp(−α² ln d/4)`.
pub fn flatness_check(alpha: f64, d: usize, sparsity: usize, trials: usize, seed: u64) -> Result<FlatnessReport> {
    if !d.is_power_of_two() || d < 2 || sparsity == 0 || sparsity > d || trials == 0 {
        return Err(Error::Config(format!(
            "need d a power of two >= 2, 1 <= sparsity <= d and trials >= 1 (d={d}, sparsity={sparsity})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut placed = 0;
    while placed < sparsity {
        let j = rng.gen_range(0..d);
        if x[j] == 0.0 {
            x[j] = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            placed += 1;
        }
    }
    let ln = (d as f64).ln();
    let threshold = alpha * (ln / d as f64).sqrt() * oracle::norm(&x);
    let mut hits = 0usize;
    for _ in 0..trials {
        let basis = sample_basis(d, &mut rng)?;
        let y = basis.apply(&x)?;
        if y.iter().any(|v| v.abs() > threshold) {
            hits += 1;
        }
    }
    let bound = 2.0 * (-alpha * alpha * ln / 4.0).exp();
    let p = bound.min(1.0);
    Ok(FlatnessReport {
        empirical: hits as f64 / trials as f64,
        bound,
        slack: 3.0 * (p * (1.0 - p) / trials as f64).sqrt(),
    })
}

#[derive(Debug, Parser)]
#[command(name = "fosgd", version, about = "Compressed distributed SGD simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        algorithm: Option<Algorithm>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run several algorithms on the same problem and seeds.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated list.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        algorithm: Vec<Algorithm>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Codec and quantizer diagnostics.
    Codec {
        #[command(subcommand)]
        check: CodecCheck,
    },
}

#[derive(Debug, Subcommand)]
pub enum CodecCheck {
    /// Compare the golden encodings with a fresh encoder.
    Roundtrip {
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Rewrite the golden files instead of checking them.
        #[arg(long, hide = true)]
        bless: bool,
    },
    /// Empirical quantizer MSE against the closed form.
    Mse {
        #[arg(long, default_value_t = 16)]
        d: usize,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value_t = 4)]
        k: u16,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allowed relative difference.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
    /// Tail frequency of the flattened sparse vector.
    Flatness {
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1024)]
        d: usize,
        #[arg(long, default_value_t = 4)]
        sparsity: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl clap::ValueEnum for Algorithm {
    fn value_variants<'a>() -> &'a [Self] {
        &Algorithm::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

/// Exit status for an error: 2 for bad input, 3 for failures while running.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io { .. } | Error::Dimension(_) => 2,
        _ => 3,
    }
}

enum Failure {
    Input(Error),
    Runtime(Error),
    Check,
}

fn input(e: Error) -> Failure {
    Failure::Input(e)
}

fn runtime(e: Error) -> Failure {
    match e {
        Error::Config(_) => Failure::Input(e),
        other => Failure::Runtime(other),
    }
}

/// Parses `args` and runs the command; stdout carries reports, stderr errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e).max(3))
        }
    }
}

fn dispatch(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Run {
            config,
            algorithm,
            overrides,
        } => {
            let mut exp = Experiment::load(&config).map_err(input)?.with_overrides(&overrides);
            if let Some(a) = algorithm {
                exp = exp.with_algorithm(a);
            }
            let out = exp
                .out()
                .map(Path::to_path_buf)
                .ok_or_else(|| input(Error::Config("no output path: set `out` or pass --out".into())))?;
            let threads = threads_from_env().map_err(input)?;
            let oracle = exp.oracle().map_err(input)?;
            let config = exp.run_config(oracle.as_ref(), threads).map_err(input)?;
            let (trace, elapsed) = simulator::run_timed(oracle.as_ref(), &config).map_err(runtime)?;
            write_file(&out, trace.to_csv_string().as_bytes()).map_err(input)?;
            let summary = trace.summary.to_key_values();
            write_file(&summary_path(&out), summary.as_bytes()).map_err(input)?;
            let mut stdout = std::io::stdout().lock();
            let _ = write!(stdout, "{summary}");
            let _ = writeln!(stdout, "wall_time_s = {:.3}", elapsed.as_secs_f64());
            let _ = writeln!(stdout, "trace = \"{}\"", out.display());
            Ok(())
        }
        Command::Compare {
            config,
            algorithm,
            overrides,
        } => {
            if algorithm.is_empty() {
                return Err(input(Error::Config("empty algorithm list".into())));
            }
            let exp = Experiment::load(&config).map_err(input)?.with_overrides(&overrides);
            let threads = threads_from_env().map_err(input)?;
            let oracle = exp.oracle().map_err(input)?;
            let mut runs = Vec::new();
            let mut rows = Vec::new();
            for alg in algorithm {
                let e = exp.clone().with_algorithm(alg);
                let cfg = e.run_config(oracle.as_ref(), threads).map_err(input)?;
                let trace = simulator::run(oracle.as_ref(), &cfg).map_err(runtime)?;
                let s = &trace.summary;
                rows.push(format!(
                    "{:<18} {:>14.6e} {:>10.4} {:>14} {:>14} {:>10}",
                    alg.name(),
                    s.final_subopt,
                    s.final_subopt / s.initial_subopt,
                    s.bits_up,
                    s.bits_down,
                    (s.bits_up + s.bits_down) / s.iterations as u64
                ));
                runs.push((alg, trace.records));
            }
            if let Some(out) = exp.out() {
                let mut buf = Vec::new();
                write_merged(&mut buf, &runs).map_err(input)?;
                write_file(out, &buf).map_err(input)?;
            }
            println!(
                "{:<18} {:>14} {:>10} {:>14} {:>14} {:>10}",
                "algorithm", "final_subopt", "ratio", "bits_up", "bits_down", "bits/round"
            );
            for r in rows {
                println!("{r}");
            }
            Ok(())
        }
        Command::Codec { check } => codec_command(check),
    }
}

fn codec_command(check: CodecCheck) -> std::result::Result<(), Failure> {
    match check {
        CodecCheck::Roundtrip { golden, bless } => {
            let dir = golden.unwrap_or_else(default_golden_dir);
            if bless {
                write_golden(&dir).map_err(input)?;
                println!("wrote {} golden files to {}", GOLDEN_CASES.len(), dir.display());
                return Ok(());
            }
            let (lines, ok) = check_golden(&dir).map_err(input)?;
            for l in lines {
                println!("{l}");
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        CodecCheck::Mse {
            d,
            lambda,
            k,
            trials,
            seed,
            tolerance,
        } => {
            let (empirical, analytic) = mse_check(d, lambda, k, trials, seed).map_err(input)?;
            let rel = (empirical - analytic).abs() / analytic;
            println!("empirical = {empirical:.6}");
            println!("analytic  = {analytic:.6}");
            println!("relative difference = {rel:.4} (tolerance {tolerance})");
            if rel <= tolerance {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        CodecCheck::Flatness {
            alpha,
            d,
            sparsity,
            trials,
            seed,
        } => {
            let r = flatness_check(alpha, d, sparsity, trials, seed).map_err(input)?;
            println!("empirical = {:.6}", r.empirical);
            println!("bound     = {:.6}", r.bound);
            println!("slack     = {:.6}", r.slack);
            if r.passes() {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}
