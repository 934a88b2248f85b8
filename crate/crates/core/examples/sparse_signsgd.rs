//! signSGD on a 1-sparse oracle never moves against the all-ones direction.

use fosgd::oracle::{OneSparseOracle, ShiftedQuadratic};
use fosgd::simulator::{run, Algorithm, RunConfig, StepSchedule};

fn main() -> fosgd::Result<()> {
    let d = 32;
    let oracle = OneSparseOracle::new(ShiftedQuadratic::new(vec![-1.0; d])?, 10.0)?;
    for algorithm in [Algorithm::SignsgdMajority, Algorithm::SignsgdAverage, Algorithm::FoSgd] {
        let config = RunConfig {
            algorithm,
            workers: 1024,
            iterations: 2000,
            k_reps: 16383,
            step: StepSchedule::Constant { step: 0.003 },
            ..RunConfig::new(vec![0.0; d])
        };
        let trace = run(&oracle, &config)?;
        let min_halfspace = trace.records.iter().map(|r| r.halfspace).fold(f64::INFINITY, f64::min);
        let s = &trace.summary;
        println!(
            "{:>16}: subopt ratio {:.3}, min <v_t, 1> = {min_halfspace:.3}",
            algorithm.name(),
            s.final_subopt / s.initial_subopt
        );
    }
    Ok(())
}
