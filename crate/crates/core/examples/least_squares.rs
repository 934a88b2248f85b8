//! FO-SGD against uncompressed SGD on a synthetic least-squares problem.

use fosgd::oracle::{GradientOracle, LeastSquaresOracle, LeastSquaresProblem};
use fosgd::simulator::{run, Algorithm, RunConfig, StepSchedule};

fn main() -> fosgd::Result<()> {
    let problem = LeastSquaresProblem::synthetic(1024, 128, 0.1, 1)?;
    let oracle = LeastSquaresOracle::new(problem, 8, 1.0)?;
    println!("certified gradient bound B = {:.1}", oracle.norm_bound());

    for algorithm in [Algorithm::Sgd, Algorithm::FoSgd] {
        let config = RunConfig {
            algorithm,
            workers: 8,
            iterations: 2000,
            k_reps: 15,
            alpha: 4.0,
            alpha_server: 4.0,
            step: StepSchedule::Constant { step: 1e-6 },
            ..RunConfig::new(vec![0.0; 128])
        };
        let s = run(&oracle, &config)?.summary;
        println!(
            "{:>7}: subopt {:.4} -> {:.4}, {} bits up, {} bits down",
            algorithm.name(),
            s.initial_subopt,
            s.final_subopt,
            s.bits_up,
            s.bits_down
        );
    }
    Ok(())
}
