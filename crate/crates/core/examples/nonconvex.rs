//! Average squared gradient norm on a nonconvex objective with step 1/sqrt(T).

use fosgd::oracle::{ExactGradientOracle, QuadraticCosine};
use fosgd::simulator::{run_nonconvex, RunConfig};

fn main() -> fosgd::Result<()> {
    let oracle = ExactGradientOracle::new(QuadraticCosine::new(64)?, 32.0)?;
    for t in [100, 400, 1600] {
        let config = RunConfig {
            workers: 4,
            iterations: t,
            k_reps: 255,
            ..RunConfig::new(vec![2.0; 64])
        };
        let s = run_nonconvex(&oracle, &config)?.summary;
        println!("T = {t:4}: mean ||grad f||^2 = {:.2}", s.mean_sq_grad_norm);
    }
    Ok(())
}
