//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fosgd::cli::{check_golden, default_golden_dir, flatness_check, Experiment};
use fosgd::codec::{self, padded_dim, payload_bits};
use fosgd::oracle::{
    self, empirical_variance, GradientOracle, LeastSquaresOracle, LeastSquaresProblem, OneSparseOracle,
    ShiftedQuadratic,
};
use fosgd::quantizer::{
    expected_quantizer_output, matrix_quantization_variance, quantize, quantizer_mse, scalar_product_second_moment,
    DitherConfig,
};
use fosgd::simulator::{predicted_convex_bound, run, Algorithm, ProblemStats, RunConfig, StepSchedule, Summary, Trace};
use fosgd::transform::{fwht_normalized, sample_basis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Summaries of every simulator run, checked together at the end.
#[derive(Default)]
struct Runs(Vec<(String, Summary)>);

impl Runs {
    fn keep(&mut self, label: impl Into<String>, trace: &Trace) {
        self.0.push((label.into(), trace.summary.clone()));
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.1?}, limit {limit:?}"))
}

fn experiments() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/experiments"))
}

fn quantizer_expectation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let config = DitherConfig::new(1.0, 1).map_err(|e| e.to_string())?;
    let draws = 1_000_000;
    let mut worst: f64 = 0.0;
    // 20 in-range vectors, then 5 with coordinates up to 3λ
    for case in 0..25 {
        let scale = if case < 20 { 1.0 } else { 3.0 };
        let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-scale..=scale)).collect();
        let mut sum = [0.0; 8];
        for _ in 0..draws {
            for (s, v) in sum.iter_mut().zip(quantize(&x, config, &mut rng).dequantize()) {
                *s += v;
            }
        }
        let expected = expected_quantizer_output(&x, 1.0);
        for (s, e) in sum.iter().zip(&expected) {
            worst = worst.max((s / draws as f64 - e).abs());
        }
    }
    ensure(worst <= 0.005, || format!("max deviation {worst:.5} > 0.005"))?;
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("max deviation {worst:.5}, {:.1?}", start.elapsed()))
}

fn quantizer_variance() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let x: Vec<f64> = (0..16).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let mut report = Vec::new();
    for k in [1u16, 4, 16] {
        let config = DitherConfig::new(2.0, k).map_err(|e| e.to_string())?;
        let draws = 100_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let q = quantize(&x, config, &mut rng).dequantize();
            acc += q.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        let formula = quantizer_mse(&x, config).map_err(|e| e.to_string())?;
        let rel = (acc / draws as f64 - formula).abs() / formula;
        ensure(rel <= 0.02, || format!("K={k}: relative error {rel:.4} > 0.02"))?;
        report.push(format!("K={k} {rel:.4}"));
    }
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("relative errors {}", report.join(", ")))
}

fn product_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let draws = 100_000;
    let lambda = 1.5;
    let config = DitherConfig::new(lambda, 1).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-lambda..lambda)).collect();
        let u = &rows[0];
        let (mut sp, mut mv) = (0.0, 0.0);
        for _ in 0..draws {
            let q = quantize(&x, config, &mut rng).dequantize();
            let dot: f64 = u.iter().zip(&q).map(|(a, b)| a * b).sum();
            sp += dot * dot;
            for row in &rows {
                let r: f64 = row
                    .iter()
                    .zip(q.iter().zip(&x))
                    .map(|(a, (qi, xi))| a * (qi - xi))
                    .sum();
                mv += r * r;
            }
        }
        let sp_formula = scalar_product_second_moment(u, &x, lambda);
        let mv_formula = matrix_quantization_variance(&rows, &x, lambda);
        let e1 = (sp / draws as f64 - sp_formula).abs() / sp_formula;
        let e2 = (mv / draws as f64 - mv_formula).abs() / mv_formula;
        worst = worst.max(e1).max(e2);
    }
    ensure(worst <= 0.03, || format!("max relative error {worst:.4} > 0.03"))?;
    Ok(format!("max relative error {worst:.4}"))
}

fn transform_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut dense_err: f64 = 0.0;
    for log_d in 0..=4 {
        let d = 1usize << log_d;
        let basis = sample_basis(d, &mut rng).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scale = 1.0 / (d as f64).sqrt();
        let entry = |i: usize, j: usize| {
            if (i & j).count_ones().is_multiple_of(2) {
                scale
            } else {
                -scale
            }
        };
        let plain = fwht_normalized(&x).map_err(|e| e.to_string())?;
        let rand = basis.apply(&x).map_err(|e| e.to_string())?;
        for i in 0..d {
            let h: f64 = (0..d).map(|j| entry(i, j) * x[j]).sum();
            let hd: f64 = (0..d).map(|j| entry(i, j) * basis.signs()[j] * x[j]).sum();
            dense_err = dense_err.max((h - plain[i]).abs()).max((hd - rand[i]).abs());
        }
    }
    ensure(dense_err <= 1e-10, || format!("dense mismatch {dense_err:.2e}"))?;

    let mut ortho_err: f64 = 0.0;
    let mut big_time = Duration::ZERO;
    for log_d in [1, 5, 10, 15, 20] {
        let d = 1usize << log_d;
        let basis = sample_basis(d, &mut rng).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = x.clone();
        let t = Instant::now();
        basis.apply_in_place(&mut y).map_err(|e| e.to_string())?;
        if log_d == 20 {
            big_time = t.elapsed();
        }
        let (nx, ny) = (oracle::norm(&x), oracle::norm(&y));
        ortho_err = ortho_err.max((nx - ny).abs() / nx);
        basis.apply_inverse_in_place(&mut y).map_err(|e| e.to_string())?;
        ortho_err = ortho_err.max(x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        // columns e_0 and e_{d-1} map to orthonormal vectors
        let mut c0 = vec![0.0; d];
        let mut c1 = vec![0.0; d];
        c0[0] = 1.0;
        c1[d - 1] = 1.0;
        let (c0, c1) = (basis.apply(&c0).unwrap(), basis.apply(&c1).unwrap());
        let dot: f64 = c0.iter().zip(&c1).map(|(a, b)| a * b).sum();
        ortho_err = ortho_err.max(dot.abs()).max((oracle::norm(&c0) - 1.0).abs());
    }
    ensure(ortho_err <= 1e-9, || format!("orthonormality error {ortho_err:.2e}"))?;
    ensure(big_time < Duration::from_secs(1), || {
        format!("d=2^20 took {big_time:?}")
    })?;
    Ok(format!(
        "dense error {dense_err:.1e}, orthonormality error {ortho_err:.1e}, d=2^20 in {big_time:.1?}"
    ))
}

fn flattening_tail() -> Outcome {
    let r = flatness_check(2.0, 1024, 4, 10_000, 505).map_err(|e| e.to_string())?;
    ensure(r.passes(), || {
        format!(
            "frequency {:.5} > bound {:.5} + slack {:.5}",
            r.empirical, r.bound, r.slack
        )
    })?;
    Ok(format!(
        "frequency {:.5} <= {:.5} + {:.5}",
        r.empirical, r.bound, r.slack
    ))
}

fn codec_wire(runs: &mut Runs) -> Outcome {
    let (lines, ok) = check_golden(&default_golden_dir()).map_err(|e| e.to_string())?;
    ensure(ok, || format!("golden mismatch: {lines:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for i in 0..1000 {
        let d = rng.gen_range(1..300);
        let k = rng.gen_range(1..=u16::MAX);
        let lambda = rng.gen_range(0.01..100.0);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-150.0..150.0)).collect();
        let basis = sample_basis(padded_dim(d), &mut rng).map_err(|e| e.to_string())?;
        let config = DitherConfig::new(lambda, k).map_err(|e| e.to_string())?;
        let enc = codec::encode(&x, &basis, config, &mut rng).map_err(|e| e.to_string())?;
        let bytes = codec::serialize(&enc);
        let back = codec::deserialize(&bytes).map_err(|e| format!("encoding {i}: {e}"))?;
        ensure(back == enc && codec::serialize(&back) == bytes, || {
            format!("encoding {i} changed")
        })?;
    }

    for (d, k) in [(64usize, 1u16), (100, 15), (128, 255)] {
        let p = padded_dim(d) as u64;
        let w = u64::from(64 - u64::from(k).leading_zeros());
        ensure(payload_bits(p as usize, 1) == 2 * p, || {
            "uplink payload is not 2D bits".into()
        })?;
        ensure(payload_bits(p as usize, k) == (w + 1) * p, || {
            "downlink payload size".into()
        })?;

        let problem = LeastSquaresProblem::synthetic(4 * d, d, 0.1, 7).map_err(|e| e.to_string())?;
        let oracle = LeastSquaresOracle::new(problem, 4, 1.0).map_err(|e| e.to_string())?;
        let config = RunConfig {
            workers: 5,
            iterations: 10,
            k_reps: k,
            step: StepSchedule::Constant { step: 1e-7 },
            ..RunConfig::new(vec![0.0; d])
        };
        let trace = run(&oracle, &config).map_err(|e| e.to_string())?;
        let last = trace.records.last().unwrap();
        ensure(last.bits_up == 10 * 5 * 2 * p, || {
            format!("uplink {} bits", last.bits_up)
        })?;
        ensure(last.bits_down == 10 * (w + 1) * p, || {
            format!("downlink {} bits", last.bits_down)
        })?;
        runs.keep(format!("codec d={d} K={k}"), &trace);
    }
    Ok("golden files equal, 1000 round trips, payload sizes exact".into())
}

fn sparse_reproduction(runs: &mut Runs) -> Outcome {
    let start = Instant::now();
    let exp = Experiment::load(experiments().join("sparse32.toml")).map_err(|e| e.to_string())?;
    let oracle = exp.oracle().map_err(|e| e.to_string())?;
    let base = exp.run_config(oracle.as_ref(), 0).map_err(|e| e.to_string())?;
    ensure(base.initial_point.len() == 32 && base.iterations == 2000, || {
        "unexpected sparse32.toml".into()
    })?;

    let mut worst_sign_ratio = f64::INFINITY;
    for algorithm in [Algorithm::SignsgdMajority, Algorithm::SignsgdAverage] {
        for seed in 0..10 {
            let c = RunConfig {
                algorithm,
                seed,
                ..base.clone()
            };
            let trace = run(oracle.as_ref(), &c).map_err(|e| format!("{algorithm} seed {seed}: {e}"))?;
            if let Some(r) = trace.records.iter().find(|r| r.halfspace < 0.0) {
                return Err(format!(
                    "{algorithm} seed {seed}: <v_t, 1> = {} at t = {}",
                    r.halfspace, r.t
                ));
            }
            let s = &trace.summary;
            let ratio = s.final_subopt / s.initial_subopt;
            ensure(ratio >= 0.5, || {
                format!("{algorithm} seed {seed}: ratio {ratio:.3} < 0.5")
            })?;
            worst_sign_ratio = worst_sign_ratio.min(ratio);
            runs.keep(format!("{algorithm} sparse seed {seed}"), &trace);
        }
    }
    let mut worst_fo: f64 = 0.0;
    for seed in 0..3 {
        let c = RunConfig {
            algorithm: Algorithm::FoSgd,
            seed,
            ..base.clone()
        };
        let trace = run(oracle.as_ref(), &c).map_err(|e| format!("fo-sgd seed {seed}: {e}"))?;
        let s = &trace.summary;
        let ratio = s.final_subopt / s.initial_subopt;
        ensure(ratio <= 0.1, || format!("fo-sgd seed {seed}: ratio {ratio:.3} > 0.1"))?;
        worst_fo = worst_fo.max(ratio);
        runs.keep(format!("fo-sgd sparse seed {seed}"), &trace);
    }
    within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "signSGD ratio >= {worst_sign_ratio:.2} with <v_t, 1> >= 0 throughout, fo-sgd ratio <= {worst_fo:.3}, {:.1?}",
        start.elapsed()
    ))
}

fn convex_convergence(runs: &mut Runs) -> Outcome {
    let start = Instant::now();
    let exp = Experiment::load(experiments().join("lsq128.toml")).map_err(|e| e.to_string())?;
    let oracle = exp.oracle().map_err(|e| e.to_string())?;
    let stats = exp.problem_stats(oracle.as_ref()).map_err(|e| e.to_string())?;
    let seeds = 20u64;
    let mut means = Vec::new();
    let mut report = Vec::new();
    for t in [250usize, 500, 1000, 2000] {
        let mut e = exp.clone();
        e.file.iters = t;
        let config = e.run_config(oracle.as_ref(), 0).map_err(|e| e.to_string())?;
        let (mut subopt, mut eta) = (0.0, 0.0);
        for seed in 0..seeds {
            let c = RunConfig { seed, ..config.clone() };
            let trace = run(oracle.as_ref(), &c).map_err(|e| format!("T={t} seed {seed}: {e}"))?;
            subopt += trace.summary.final_subopt / seeds as f64;
            eta += trace.summary.mean_distance / seeds as f64;
            runs.keep(format!("lsq128 T={t} seed {seed}"), &trace);
        }
        let stats = ProblemStats {
            mean_distance: eta,
            ..stats
        };
        let bound = predicted_convex_bound(&config, oracle.dim(), oracle.norm_bound(), &stats)
            .map_err(|e| e.to_string())?
            .total();
        ensure(subopt <= bound, || {
            format!("T={t}: mean suboptimality {subopt:.4} > bound {bound:.4e}")
        })?;
        means.push(subopt);
        report.push(format!("T={t} {subopt:.4}"));
        if t == 2000 {
            report.push(format!("bound {bound:.3e}"));
        }
    }
    ensure(means.windows(2).all(|w| w[1] < w[0]), || {
        format!("not monotone: {}", report.join(", "))
    })?;
    within_time(start, Duration::from_secs(300))?;
    Ok(format!("{}, {:.1?}", report.join(", "), start.elapsed()))
}

fn variance_of_means() -> Outcome {
    let problem = LeastSquaresProblem::synthetic(256, 16, 0.5, 9).map_err(|e| e.to_string())?;
    let oracle = LeastSquaresOracle::new(problem, 1, 2.0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let x = oracle::random_point_in_ball(16, 1.0, &mut rng);
    let sigma2 = empirical_variance(&oracle, &x, 400_000, &mut rng);
    let grad = oracle.objective().gradient(&x);
    let trials = 40_000;
    let mut report = Vec::new();
    for n in [2usize, 8, 32] {
        let mut acc = 0.0;
        for _ in 0..trials {
            let mut mean = [0.0; 16];
            for _ in 0..n {
                for (m, g) in mean.iter_mut().zip(oracle.sample(&x, &mut rng)) {
                    *m += g / n as f64;
                }
            }
            acc += mean.iter().zip(&grad).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        let ratio = acc / trials as f64 * n as f64 / sigma2;
        ensure((ratio - 1.0).abs() <= 0.15, || format!("N={n}: N·var/σ² = {ratio:.3}"))?;
        report.push(format!("N={n} {ratio:.3}"));
    }
    Ok(format!("N·var/σ²: {}", report.join(", ")))
}

fn nonconvex_trend(runs: &mut Runs) -> Outcome {
    let exp = Experiment::load(experiments().join("nonconvex64.toml")).map_err(|e| e.to_string())?;
    let oracle = exp.oracle().map_err(|e| e.to_string())?;
    let mut means = Vec::new();
    for t in [100usize, 1600] {
        let mut e = exp.clone();
        e.file.iters = t;
        let config = e.run_config(oracle.as_ref(), 0).map_err(|e| e.to_string())?;
        let mut mean = 0.0;
        for seed in 0..10 {
            let trace = run(oracle.as_ref(), &RunConfig { seed, ..config.clone() })
                .map_err(|e| format!("T={t} seed {seed}: {e}"))?;
            mean += trace.summary.mean_sq_grad_norm / 10.0;
            runs.keep(format!("nonconvex T={t} seed {seed}"), &trace);
        }
        means.push(mean);
    }
    ensure(means[1] < means[0], || {
        format!("T=1600 {:.2} is not below T=100 {:.2}", means[1], means[0])
    })?;
    Ok(format!(
        "mean ||grad f||^2: T=100 {:.2}, T=1600 {:.2}",
        means[0], means[1]
    ))
}

fn determinism(runs: &mut Runs) -> Outcome {
    let problem = LeastSquaresProblem::synthetic(256, 40, 0.1, 2).map_err(|e| e.to_string())?;
    let lsq = LeastSquaresOracle::new(problem, 4, 1.0).map_err(|e| e.to_string())?;
    let sparse = OneSparseOracle::new(ShiftedQuadratic::new(vec![-1.0; 40]).map_err(|e| e.to_string())?, 20.0)
        .map_err(|e| e.to_string())?;
    let oracles: [(&str, &dyn GradientOracle); 2] = [("least squares", &lsq), ("sparse", &sparse)];
    for (name, o) in oracles {
        for algorithm in Algorithm::ALL {
            let base = RunConfig {
                algorithm,
                workers: 6,
                iterations: 50,
                k_reps: 31,
                seed: 77,
                step: StepSchedule::Constant { step: 1e-6 },
                ..RunConfig::new(vec![0.0; 40])
            };
            let reference = run(o, &base).map_err(|e| e.to_string())?;
            for threads in [0, 2, 4, 4] {
                let again = run(
                    o,
                    &RunConfig {
                        threads,
                        ..base.clone()
                    },
                )
                .map_err(|e| e.to_string())?;
                ensure(again.to_csv_string() == reference.to_csv_string(), || {
                    format!("{name} {algorithm}: threads={threads} changed the trace")
                })?;
            }
            runs.keep(format!("determinism {name} {algorithm}"), &reference);
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = experiments().join("lsq128.toml");
    let mut outputs = Vec::new();
    for (threads, out) in [("0", "a.csv"), ("3", "b.csv"), ("3", "c.csv")] {
        let status = Command::new(env!("CARGO_BIN_EXE_fosgd"))
            .args(["run", "--config"])
            .arg(&config)
            .args(["--iters", "300", "--out", out])
            .current_dir(dir.path())
            .env("FOSGD_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        outputs.push(std::fs::read(dir.path().join(out)).map_err(|e| e.to_string())?);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
        "CLI traces differ across invocations".into()
    })?;
    Ok("byte-identical traces for 4 algorithms x 2 oracles x thread counts {0,2,4}, and via the CLI".into())
}

fn trajectory_inequality(runs: &Runs) -> Outcome {
    let failed: Vec<_> = runs
        .0
        .iter()
        .filter(|(_, s)| !s.trajectory_inequality_holds())
        .map(|(label, s)| format!("{label}: {} > {}", s.trajectory_lhs, s.trajectory_rhs))
        .collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(format!("holds on all {} runs", runs.0.len()))
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let mut all_ok = true;
    let mut report = |n: usize, name: &str, outcome: Outcome| {
        match &outcome {
            Ok(detail) => println!("PASS {n:2} {name}: {detail}"),
            Err(detail) => println!("FAIL {n:2} {name}: {detail}"),
        }
        all_ok &= outcome.is_ok();
    };
    report(1, "quantizer expectation", quantizer_expectation());
    report(2, "quantizer variance", quantizer_variance());
    report(3, "scalar-product and matrix variance", product_identities());
    report(4, "transform correctness", transform_correctness());
    report(5, "flattening tail", flattening_tail());
    report(6, "codec and wire sizes", codec_wire(&mut runs));
    report(7, "sign methods on a 1-sparse oracle", sparse_reproduction(&mut runs));
    report(8, "convex convergence", convex_convergence(&mut runs));
    report(9, "variance of means", variance_of_means());
    report(10, "nonconvex trend", nonconvex_trend(&mut runs));
    report(11, "determinism", determinism(&mut runs));
    report(12, "trajectory inequality", trajectory_inequality(&runs));
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
