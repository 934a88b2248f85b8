//! In-process parameter-server simulation of compressed distributed SGD.
//!
//! One round of the compressed protocol, for workers `n = 1..N`:
//!
//! ```text
//! worker n:  g = g(ξ_{t,n}, x_t);   send encode_{ε_{t,n}, λ, 1}(g)          (2D bits)
//! server:    ḡ = (1/N) Σ decode(msg_n);  broadcast encode_{ε_t, λˢ, K}(ḡ)    ((w+1)D bits)
//! worker n:  v_t = decode(broadcast);  x_{t+1} = x_t − δ_t v_t
//! ```
//!
//! with `λ = α·B·√(ln D / D)`, `λˢ = αˢ·λ·√(ln D)` and `D` the padded dimension.
//! All randomness comes from [`Substreams`] keyed by `(t, worker, role)`, so the
//! worker phase can run on any number of threads with identical results.

use std::fmt::{self, Write as _};
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{self, payload_bits};
use crate::error::{Error, Result};
use crate::oracle::{norm, GradientOracle, Objective};
use crate::quantizer::DitherConfig;
use crate::rng::{Role, Substreams, SERVER};
use crate::transform::sample_basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    FoSgd,
    Sgd,
    SignsgdMajority,
    SignsgdAverage,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::FoSgd,
        Algorithm::Sgd,
        Algorithm::SignsgdMajority,
        Algorithm::SignsgdAverage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FoSgd => "fo-sgd",
            Algorithm::Sgd => "sgd",
            Algorithm::SignsgdMajority => "signsgd-majority",
            Algorithm::SignsgdAverage => "signsgd-average",
        }
    }

    /// Whether the run relies on the oracle's certified norm bound.
    fn uses_norm_bound(self) -> bool {
        matches!(self, Algorithm::FoSgd | Algorithm::Sgd)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
            Error::Config(format!("unknown algorithm {s:?}, expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignVariant {
    Majority,
    Average,
}

/// Step sizes `δ_t` for `t = 0..=T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StepSchedule {
    /// `δ_t = step`.
    Constant { step: f64 },
    /// `δ_t = 1/√T` for every `t`.
    OneOverSqrtT,
    /// `δ_t = initial/√(t+1)`.
    InverseSqrt { initial: f64 },
}

impl StepSchedule {
    pub fn step(&self, t: usize, iterations: usize) -> f64 {
        match *self {
            StepSchedule::Constant { step } => step,
            StepSchedule::OneOverSqrtT => 1.0 / (iterations.max(1) as f64).sqrt(),
            StepSchedule::InverseSqrt { initial } => initial / ((t + 1) as f64).sqrt(),
        }
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, StepSchedule::InverseSqrt { .. })
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            StepSchedule::Constant { step } => step,
            StepSchedule::InverseSqrt { initial } => initial,
            StepSchedule::OneOverSqrtT => 1.0,
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!("step size must be positive, got {v}")));
        }
        Ok(())
    }
}

/// How messages travel from worker to server and back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WirePath {
    /// Every message goes through `serialize` and `deserialize`.
    Serialized,
    /// Decode straight from the in-memory encoding.
    InMemory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub workers: usize,
    pub iterations: usize,
    /// Downlink averaging count `K`.
    pub k_reps: u16,
    pub alpha: f64,
    pub alpha_server: f64,
    pub step: StepSchedule,
    pub seed: u64,
    pub initial_point: Vec<f64>,
    /// Replaces the oracle's certified `B`; must not be smaller than it.
    pub norm_bound: Option<f64>,
    pub wire: WirePath,
    /// Worker-phase threads, 0 runs sequentially.
    pub threads: usize,
    /// Keep every iterate `x_0..x_T` in the trace.
    pub keep_iterates: bool,
}

impl RunConfig {
    pub fn new(initial_point: Vec<f64>) -> Self {
        Self {
            algorithm: Algorithm::FoSgd,
            workers: 1,
            iterations: 100,
            k_reps: 1,
            alpha: 2.0,
            alpha_server: 2.0,
            step: StepSchedule::Constant { step: 0.01 },
            seed: 0,
            initial_point,
            norm_bound: None,
            wire: WirePath::Serialized,
            threads: 0,
            keep_iterates: false,
        }
    }

    fn validate(&self, oracle: &dyn GradientOracle) -> Result<f64> {
        if self.initial_point.len() != oracle.dim() {
            return Err(Error::Dimension(format!(
                "initial point has length {}, oracle dimension is {}",
                self.initial_point.len(),
                oracle.dim()
            )));
        }
        if self.workers == 0 || self.workers >= SERVER as usize {
            return Err(Error::Config(format!(
                "workers must be in 1..{SERVER}, got {}",
                self.workers
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.k_reps == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.alpha >= 2.0 && self.alpha_server >= 2.0) || !self.alpha.is_finite() || !self.alpha_server.is_finite()
        {
            return Err(Error::Config(format!(
                "alpha and alpha-server must be finite and at least 2, got {} and {}",
                self.alpha, self.alpha_server
            )));
        }
        self.step.validate()?;
        let certified = oracle.norm_bound();
        let b = match self.norm_bound {
            Some(b) if !(b.is_finite() && b >= certified) => {
                return Err(Error::Config(format!(
                    "norm bound {b} is below the oracle's certified bound {certified}"
                )))
            }
            Some(b) => b,
            None => certified,
        };
        Ok(b)
    }
}

/// `(λ, λˢ)` for padded dimension `d` and norm bound `b`.
pub fn dither_amplitudes(padded_dim: usize, b: f64, alpha: f64, alpha_server: f64) -> (f64, f64) {
    let d = padded_dim as f64;
    let lambda = alpha * b * (d.ln() / d).sqrt();
    (lambda, alpha_server * lambda * d.ln().sqrt())
}

/// Bits per coordinate needed to send an average of `n` signs.
fn average_sign_bits(n: usize) -> u64 {
    u64::from(usize::BITS - n.leading_zeros())
}

/// One row of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: u64,
    /// `f(x_t)`.
    pub f: f64,
    /// `‖∇f(x_t)‖₂`.
    pub grad_norm: f64,
    /// `f(x̄_t) − f*` for the weighted average of `x_0..x_t`; NaN if `f*` is unknown.
    pub subopt: f64,
    /// `⟨v_t, 𝟙⟩`.
    pub halfspace: f64,
    /// Cumulative uplink bits through round `t`.
    pub bits_up: u64,
    /// Cumulative downlink bits through round `t`.
    pub bits_down: u64,
}

pub const CSV_HEADER: [&str; 7] = ["t", "f", "grad_norm", "subopt", "halfspace", "bits_up", "bits_down"];

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Run-level results.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub dim: usize,
    pub padded_dim: usize,
    pub workers: usize,
    pub iterations: usize,
    pub k_reps: u16,
    pub seed: u64,
    pub norm_bound: f64,
    pub trust_radius: f64,
    /// NaN for the uncompressed and sign baselines.
    pub lambda: f64,
    pub lambda_server: f64,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub initial_subopt: f64,
    /// `f(x̄_T) − f*`.
    pub final_subopt: f64,
    /// `(1/T) Σ_{t<T} ‖∇f(x_t)‖²`.
    pub mean_sq_grad_norm: f64,
    pub bits_up: u64,
    pub bits_down: u64,
    /// `Σ δ_t ⟨x_t − x*, v_t⟩`.
    pub trajectory_lhs: f64,
    /// `½‖x* − x_0‖² + ½ Σ δ_t² ‖v_t‖²`.
    pub trajectory_rhs: f64,
    /// `(1/(T+1)) Σ_{t≤T} ‖x_t − x*‖`; NaN without a known minimizer.
    pub mean_distance: f64,
    pub max_update_norm: f64,
}

impl Summary {
    /// The trajectory inequality, allowing only floating-point roundoff.
    pub fn trajectory_inequality_holds(&self) -> bool {
        let slack = 1e-12 * (self.trajectory_lhs.abs() + self.trajectory_rhs.abs()).max(1.0);
        self.trajectory_lhs <= self.trajectory_rhs + slack
    }

    /// `key = value` lines (valid TOML).
    pub fn to_key_values(&self) -> String {
        let f = |v: f64| {
            if v.is_nan() {
                "nan".to_string()
            } else if v.is_infinite() {
                if v > 0.0 { "inf" } else { "-inf" }.to_string()
            } else {
                format!("{v:?}")
            }
        };
        let mut s = String::new();
        let _ = writeln!(s, "algorithm = \"{}\"", self.algorithm);
        for (k, v) in [
            ("dim", self.dim as u64),
            ("padded_dim", self.padded_dim as u64),
            ("workers", self.workers as u64),
            ("iterations", self.iterations as u64),
            ("k", u64::from(self.k_reps)),
            ("seed", self.seed),
            ("bits_up", self.bits_up),
            ("bits_down", self.bits_down),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (k, v) in [
            ("norm_bound", self.norm_bound),
            ("trust_radius", self.trust_radius),
            ("lambda", self.lambda),
            ("lambda_server", self.lambda_server),
            ("initial_objective", self.initial_objective),
            ("final_objective", self.final_objective),
            ("initial_subopt", self.initial_subopt),
            ("final_subopt", self.final_subopt),
            ("mean_sq_grad_norm", self.mean_sq_grad_norm),
            ("trajectory_lhs", self.trajectory_lhs),
            ("trajectory_rhs", self.trajectory_rhs),
            ("mean_distance", self.mean_distance),
            ("max_update_norm", self.max_update_norm),
        ] {
            let _ = writeln!(s, "{k} = {}", f(v));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<Record>,
    /// `x̄_T = c_T Σ_{t≤T} δ_t x_t`.
    pub average: Vec<f64>,
    /// `x_T`.
    pub last: Vec<f64>,
    /// `δ_0..δ_T`.
    pub steps: Vec<f64>,
    /// `x_0..x_T` when requested.
    pub iterates: Option<Vec<Vec<f64>>>,
    pub summary: Summary,
}

impl Trace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_records(out, &self.records)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

pub fn write_records<W: Write>(out: W, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Config(format!("writing csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            fmt_f64(r.f),
            fmt_f64(r.grad_norm),
            fmt_f64(r.subopt),
            fmt_f64(r.halfspace),
            r.bits_up.to_string(),
            r.bits_down.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Config(format!("writing csv: {e}")))?;
    Ok(())
}

/// Parses a trace written by [`write_records`].
pub fn read_records<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| Error::format(0, e.to_string()))?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::format(0, format!("unexpected header {headers:?}")));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::format(i + 1, e.to_string())))
        .collect()
}

/// Runs `config.algorithm` against `oracle`.
pub fn run(oracle: &dyn GradientOracle, config: &RunConfig) -> Result<Trace> {
    simulate(oracle, config)
}

pub fn run_fo_sgd(oracle: &dyn GradientOracle, config: &RunConfig) -> Result<Trace> {
    simulate(
        oracle,
        &RunConfig {
            algorithm: Algorithm::FoSgd,
            ..config.clone()
        },
    )
}

pub fn run_distributed_sgd(oracle: &dyn GradientOracle, config: &RunConfig) -> Result<Trace> {
    simulate(
        oracle,
        &RunConfig {
            algorithm: Algorithm::Sgd,
            ..config.clone()
        },
    )
}

pub fn run_signsgd(oracle: &dyn GradientOracle, config: &RunConfig, variant: SignVariant) -> Result<Trace> {
    let algorithm = match variant {
        SignVariant::Majority => Algorithm::SignsgdMajority,
        SignVariant::Average => Algorithm::SignsgdAverage,
    };
    simulate(
        oracle,
        &RunConfig {
            algorithm,
            ..config.clone()
        },
    )
}

/// Runs `config.algorithm` with `δ_t = 1/√T`, whatever `config.step` says.
pub fn run_nonconvex(oracle: &dyn GradientOracle, config: &RunConfig) -> Result<Trace> {
    simulate(
        oracle,
        &RunConfig {
            step: StepSchedule::OneOverSqrtT,
            ..config.clone()
        },
    )
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

struct Plan {
    dim: usize,
    padded: usize,
    uplink: Option<DitherConfig>,
    downlink: Option<DitherConfig>,
    up_bits: u64,
    down_bits: u64,
    lambda: f64,
    lambda_server: f64,
}

fn plan(config: &RunConfig, dim: usize, b: f64) -> Result<Plan> {
    let padded = codec::padded_dim(dim);
    let n = config.workers as u64;
    let d = dim as u64;
    let mut p = Plan {
        dim,
        padded,
        uplink: None,
        downlink: None,
        up_bits: 0,
        down_bits: 0,
        lambda: f64::NAN,
        lambda_server: f64::NAN,
    };
    match config.algorithm {
        Algorithm::FoSgd => {
            let (lambda, lambda_server) = dither_amplitudes(padded, b, config.alpha, config.alpha_server);
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::Precondition(format!(
                    "dithering amplitude is {lambda} (padded dimension {padded}, norm bound {b}); \
                     compression needs a padded dimension of at least 2 and a positive norm bound"
                )));
            }
            p.uplink = Some(DitherConfig::new(lambda, 1)?);
            p.downlink = Some(DitherConfig::new(lambda_server, config.k_reps)?);
            p.up_bits = n * payload_bits(padded, 1);
            p.down_bits = payload_bits(padded, config.k_reps);
            p.lambda = lambda;
            p.lambda_server = lambda_server;
        }
        Algorithm::Sgd => {
            p.up_bits = n * 64 * d;
            p.down_bits = 64 * d;
        }
        Algorithm::SignsgdMajority => {
            p.up_bits = n * d;
            p.down_bits = d;
        }
        Algorithm::SignsgdAverage => {
            p.up_bits = n * d;
            p.down_bits = d * average_sign_bits(config.workers);
        }
    }
    Ok(p)
}

/// What worker `n` contributes to the server in round `t`.
fn worker_message(
    oracle: &dyn GradientOracle,
    config: &RunConfig,
    plan: &Plan,
    streams: &Substreams,
    x: &[f64],
    t: u64,
    n: u32,
) -> Result<Vec<f64>> {
    let g = oracle.sample(x, &mut streams.stream(t, n, Role::Oracle));
    match config.algorithm {
        Algorithm::FoSgd => {
            let cfg = plan.uplink.expect("planned");
            let basis = sample_basis(plan.padded, &mut streams.stream(t, n, Role::WorkerBasis))?;
            let enc = codec::encode(&g, &basis, cfg, &mut streams.stream(t, n, Role::WorkerDither))?;
            transmit(enc, config.wire)
        }
        Algorithm::Sgd => Ok(g),
        Algorithm::SignsgdMajority | Algorithm::SignsgdAverage => Ok(g.into_iter().map(sign).collect()),
    }
}

fn transmit(enc: codec::EncodedGradient, wire: WirePath) -> Result<Vec<f64>> {
    match wire {
        WirePath::Serialized => Ok(codec::decode(&codec::deserialize(&codec::serialize(&enc))?)),
        WirePath::InMemory => Ok(codec::decode(&enc)),
    }
}

fn server_update(
    config: &RunConfig,
    plan: &Plan,
    streams: &Substreams,
    messages: &[Vec<f64>],
    t: u64,
) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; plan.dim];
    for m in messages {
        for (s, v) in sum.iter_mut().zip(m) {
            *s += v;
        }
    }
    let inv = 1.0 / messages.len() as f64;
    match config.algorithm {
        Algorithm::FoSgd => {
            let mean: Vec<f64> = sum.iter().map(|s| s * inv).collect();
            let cfg = plan.downlink.expect("planned");
            let basis = sample_basis(plan.padded, &mut streams.stream(t, SERVER, Role::ServerBasis))?;
            let enc = codec::encode(&mean, &basis, cfg, &mut streams.stream(t, SERVER, Role::ServerDither))?;
            transmit(enc, config.wire)
        }
        Algorithm::Sgd | Algorithm::SignsgdAverage => Ok(sum.iter().map(|s| s * inv).collect()),
        Algorithm::SignsgdMajority => Ok(sum.into_iter().map(sign).collect()),
    }
}

fn simulate(oracle: &dyn GradientOracle, config: &RunConfig) -> Result<Trace> {
    let b = config.validate(oracle)?;
    let objective: &dyn Objective = oracle.objective();
    let dim = oracle.dim();
    let plan = plan(config, dim, b)?;
    let streams = Substreams::new(config.seed);
    let radius = oracle.trust_radius();
    let f_star = objective.min_value().unwrap_or(f64::NAN);
    let reference: Vec<f64> = objective
        .minimizer()
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| config.initial_point.clone());
    let has_minimizer = objective.minimizer().is_some();

    let pool = if config.threads > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let iterations = config.iterations;
    let mut x = config.initial_point.clone();
    let mut weighted = vec![0.0; dim];
    let mut weight = 0.0;
    let mut records = Vec::with_capacity(iterations);
    let mut steps = Vec::with_capacity(iterations + 1);
    let mut iterates = config.keep_iterates.then(Vec::new);
    let mut bits_up = 0u64;
    let mut bits_down = 0u64;
    let mut lhs = 0.0;
    let mut sum_sq_updates = 0.0;
    let mut sum_sq_grad = 0.0;
    let mut sum_distance = 0.0;
    let mut max_update = 0.0f64;
    let initial_objective = objective.value(&x);

    for t in 0..iterations {
        let xn = norm(&x);
        if config.algorithm.uses_norm_bound() && xn > radius {
            return Err(Error::TrustRegion {
                t: t as u64,
                norm: xn,
                radius,
            });
        }
        let delta = config.step.step(t, iterations);
        steps.push(delta);
        if let Some(its) = iterates.as_mut() {
            its.push(x.clone());
        }
        weight += delta;
        for (w, v) in weighted.iter_mut().zip(&x) {
            *w += delta * v;
        }
        let average: Vec<f64> = weighted.iter().map(|w| w / weight).collect();
        let f = objective.value(&x);
        let grad_norm = norm(&objective.gradient(&x));
        sum_sq_grad += grad_norm * grad_norm;
        sum_distance += distance(&x, &reference);

        let tt = t as u64;
        let work = |n: usize| worker_message(oracle, config, &plan, &streams, &x, tt, n as u32);
        let messages: Vec<Vec<f64>> = match &pool {
            Some(pool) => pool.install(|| (0..config.workers).into_par_iter().map(work).collect::<Result<_>>())?,
            None => (0..config.workers).map(work).collect::<Result<_>>()?,
        };
        let v = server_update(config, &plan, &streams, &messages, tt)?;

        bits_up += plan.up_bits;
        bits_down += plan.down_bits;
        let vn = norm(&v);
        max_update = max_update.max(vn);
        sum_sq_updates += delta * delta * vn * vn;
        lhs += delta
            * x.iter()
                .zip(&reference)
                .zip(&v)
                .map(|((a, r), g)| (a - r) * g)
                .sum::<f64>();
        records.push(Record {
            t: tt,
            f,
            grad_norm,
            subopt: objective.value(&average) - f_star,
            halfspace: v.iter().sum(),
            bits_up,
            bits_down,
        });
        for (xi, vi) in x.iter_mut().zip(&v) {
            *xi -= delta * vi;
        }
    }

    let delta = config.step.step(iterations, iterations);
    steps.push(delta);
    if let Some(its) = iterates.as_mut() {
        its.push(x.clone());
    }
    weight += delta;
    for (w, v) in weighted.iter_mut().zip(&x) {
        *w += delta * v;
    }
    let average: Vec<f64> = weighted.iter().map(|w| w / weight).collect();
    sum_distance += distance(&x, &reference);

    let summary = Summary {
        algorithm: config.algorithm,
        dim,
        padded_dim: plan.padded,
        workers: config.workers,
        iterations,
        k_reps: config.k_reps,
        seed: config.seed,
        norm_bound: b,
        trust_radius: radius,
        lambda: plan.lambda,
        lambda_server: plan.lambda_server,
        initial_objective,
        final_objective: objective.value(&x),
        initial_subopt: initial_objective - f_star,
        final_subopt: objective.value(&average) - f_star,
        mean_sq_grad_norm: sum_sq_grad / iterations as f64,
        bits_up,
        bits_down,
        trajectory_lhs: lhs,
        trajectory_rhs: 0.5 * distance(&config.initial_point, &reference).powi(2) + 0.5 * sum_sq_updates,
        mean_distance: if has_minimizer {
            sum_distance / (iterations + 1) as f64
        } else {
            f64::NAN
        },
        max_update_norm: max_update,
    };
    Ok(Trace {
        records,
        average,
        last: x,
        steps,
        iterates,
        summary,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Problem constants entering the convergence bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemStats {
    /// `‖x* − x_0‖`.
    pub initial_distance: f64,
    /// Bound on `E‖∇f(x_t)‖²` along the run.
    pub grad_sq: f64,
    /// Oracle variance `σ²`.
    pub variance: f64,
    /// Average distance `η*_T`; use 0 when choosing a step size.
    pub mean_distance: f64,
}

/// The right-hand side of the convex bound, split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    /// `‖x* − x_0‖²/(2(T+1)δ) + δ·G² + 2σ²δ/N`.
    pub optimization: f64,
    /// `α²B²δ(8 ln d/N + 4(αˢ)² ln² d/K)`.
    pub compression: f64,
    /// `32B²δ(N e^{−α² ln d/8} + α² ln d · e^{−(αˢ)² ln d/8})`.
    pub tail: f64,
    /// `4Bη(N e^{−α² ln d/8} + α √(ln d) · e^{−(αˢ)² ln d/8})`.
    pub distance_tail: f64,
}

impl BoundTerms {
    pub fn total(&self) -> f64 {
        self.optimization + self.compression + self.tail + self.distance_tail
    }
}

fn bound_coefficients(config: &RunConfig, padded_dim: usize, b: f64, stats: &ProblemStats) -> (f64, f64, f64, f64) {
    let ln = (padded_dim as f64).ln();
    let n = config.workers as f64;
    let k = f64::from(config.k_reps);
    let (a, s) = (config.alpha, config.alpha_server);
    let eu = (-a * a * ln / 8.0).exp();
    let es = (-s * s * ln / 8.0).exp();
    let a_term = stats.initial_distance.powi(2) / (2.0 * (config.iterations as f64 + 1.0));
    let b_opt = stats.grad_sq + 2.0 * stats.variance / n;
    let b_comp = a * a * b * b * (8.0 * ln / n + 4.0 * s * s * ln * ln / k);
    let b_tail = 32.0 * b * b * (n * eu + a * a * ln * es);
    let dist = 4.0 * b * stats.mean_distance * (n * eu + a * ln.sqrt() * es);
    (a_term, b_opt, b_comp + b_tail, dist)
}

/// Evaluates the convex bound for a constant step size.
pub fn predicted_convex_bound(
    config: &RunConfig,
    dim: usize,
    norm_bound: f64,
    stats: &ProblemStats,
) -> Result<BoundTerms> {
    let delta = match config.step {
        StepSchedule::Constant { step } => step,
        StepSchedule::OneOverSqrtT => config.step.step(0, config.iterations),
        StepSchedule::InverseSqrt { .. } => {
            return Err(Error::Unsupported(
                "the convex bound is only available for constant step sizes".into(),
            ))
        }
    };
    let padded = codec::padded_dim(dim);
    let (a_term, b_opt, _, dist) = bound_coefficients(config, padded, norm_bound, stats);
    let ln = (padded as f64).ln();
    let n = config.workers as f64;
    let k = f64::from(config.k_reps);
    let (a, s) = (config.alpha, config.alpha_server);
    let b = norm_bound;
    Ok(BoundTerms {
        optimization: a_term / delta + delta * b_opt,
        compression: a * a * b * b * delta * (8.0 * ln / n + 4.0 * s * s * ln * ln / k),
        tail: 32.0 * b * b * delta * (n * (-a * a * ln / 8.0).exp() + a * a * ln * (-s * s * ln / 8.0).exp()),
        distance_tail: dist,
    })
}

/// The constant step minimizing the δ-dependent part of the bound.
pub fn bound_optimal_step(config: &RunConfig, dim: usize, norm_bound: f64, stats: &ProblemStats) -> f64 {
    let (a_term, b_opt, b_rest, _) = bound_coefficients(config, codec::padded_dim(dim), norm_bound, stats);
    (a_term / (b_opt + b_rest)).sqrt()
}

/// Times a run; the duration is kept out of the trace so traces stay reproducible.
pub fn run_timed(oracle: &dyn GradientOracle, config: &RunConfig) -> Result<(Trace, std::time::Duration)> {
    let start = Instant::now();
    let trace = run(oracle, config)?;
    Ok((trace, start.elapsed()))
}
