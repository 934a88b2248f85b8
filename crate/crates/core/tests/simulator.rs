use fosgd::oracle::{
    ExactGradientOracle, GradientOracle, LeastSquaresOracle, LeastSquaresProblem, OneSparseOracle, QuadraticCosine,
    ShiftedQuadratic,
};
use fosgd::simulator::{run, run_nonconvex, Algorithm, RunConfig, StepSchedule, WirePath};
use fosgd::Error;

fn lsq() -> LeastSquaresOracle {
    LeastSquaresOracle::new(LeastSquaresProblem::synthetic(64, 12, 0.1, 5).unwrap(), 4, 1.0).unwrap()
}

fn config(algorithm: Algorithm, dim: usize) -> RunConfig {
    RunConfig {
        algorithm,
        workers: 3,
        iterations: 40,
        k_reps: 7,
        step: StepSchedule::Constant { step: 1e-5 },
        seed: 11,
        ..RunConfig::new(vec![0.0; dim])
    }
}

#[test]
fn bits_per_round() {
    let o = lsq();
    let (n, d, dp, t) = (3u64, 12u64, 16u64, 40u64);
    let expect = [
        (Algorithm::FoSgd, n * 2 * dp, 4 * dp),
        (Algorithm::Sgd, 64 * d * n, 64 * d),
        (Algorithm::SignsgdMajority, n * d, d),
        (Algorithm::SignsgdAverage, n * d, 2 * d),
    ];
    for (alg, up, down) in expect {
        let s = run(&o, &config(alg, 12)).unwrap().summary;
        assert_eq!((s.bits_up, s.bits_down), (up * t, down * t), "{alg}");
    }
}

#[test]
fn thread_count_and_wire_path_do_not_change_output() {
    let o = lsq();
    for alg in Algorithm::ALL {
        let base = config(alg, 12);
        let reference = run(&o, &base).unwrap().to_csv_string();
        for threads in [1, 4] {
            let c = RunConfig {
                threads,
                ..base.clone()
            };
            assert_eq!(
                run(&o, &c).unwrap().to_csv_string(),
                reference,
                "{alg} threads={threads}"
            );
        }
        let c = RunConfig {
            wire: WirePath::InMemory,
            ..base.clone()
        };
        assert_eq!(run(&o, &c).unwrap().to_csv_string(), reference, "{alg} in memory");
    }
}

#[test]
fn seeds_change_output() {
    let o = lsq();
    let a = run(&o, &config(Algorithm::FoSgd, 12)).unwrap().to_csv_string();
    let b = run(
        &o,
        &RunConfig {
            seed: 12,
            ..config(Algorithm::FoSgd, 12)
        },
    )
    .unwrap()
    .to_csv_string();
    assert_ne!(a, b);
}

#[test]
fn signsgd_stays_in_halfspace_on_sparse_oracle() {
    let o = OneSparseOracle::new(ShiftedQuadratic::new(vec![-1.0; 8]).unwrap(), 50.0).unwrap();
    for alg in [Algorithm::SignsgdMajority, Algorithm::SignsgdAverage] {
        let c = RunConfig {
            iterations: 1000,
            step: StepSchedule::Constant { step: 0.01 },
            ..config(alg, 8)
        };
        let t = run(&o, &c).unwrap();
        assert!(t.records.iter().all(|r| r.halfspace >= 0.0), "{alg}");
        assert!(t.summary.final_subopt >= t.summary.initial_subopt, "{alg}");
    }
}

#[test]
fn leaving_trust_region_aborts() {
    let o = lsq();
    let c = RunConfig {
        step: StepSchedule::Constant { step: 10.0 },
        ..config(Algorithm::Sgd, 12)
    };
    assert!(matches!(run(&o, &c), Err(Error::TrustRegion { .. })));
}

#[test]
fn rejects_bad_configs() {
    let o = lsq();
    let bad = [
        RunConfig {
            workers: 0,
            ..config(Algorithm::FoSgd, 12)
        },
        RunConfig {
            alpha: 1.0,
            ..config(Algorithm::FoSgd, 12)
        },
        RunConfig {
            norm_bound: Some(1.0),
            ..config(Algorithm::FoSgd, 12)
        },
        config(Algorithm::FoSgd, 11),
    ];
    for c in bad {
        assert!(run(&o, &c).is_err(), "{c:?}");
    }
}

#[test]
fn trajectory_inequality_on_every_algorithm() {
    let o = lsq();
    for alg in Algorithm::ALL {
        let s = run(&o, &config(alg, 12)).unwrap().summary;
        assert!(
            s.trajectory_inequality_holds(),
            "{alg}: {} > {}",
            s.trajectory_lhs,
            s.trajectory_rhs
        );
    }
}

#[test]
fn nonconvex_uses_inverse_root_step() {
    let o = ExactGradientOracle::new(QuadraticCosine::new(8).unwrap(), 8.0).unwrap();
    let c = RunConfig {
        algorithm: Algorithm::Sgd,
        iterations: 100,
        ..RunConfig::new(vec![1.0; 8])
    };
    let t = run_nonconvex(&o, &c).unwrap();
    assert!(t.steps.iter().all(|&s| (s - 0.1).abs() < 1e-15));
    assert_eq!(o.dim(), 8);
}
