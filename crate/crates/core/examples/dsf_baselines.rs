//! The DSF baseline with its default schedule (DSF-D) and grid-tuned
//! constants (DSF-T), next to D-POEM on the same problem.
//!
//! ```text
//! cargo run --release --example dsf_baselines [horizon]
//! ```

use dpoem::network::erdos_renyi;
use dpoem::oracle::share;
use dpoem::{run_dpoem, run_dsf, tune_dsf, DpoemConfig, DsfConfig, FeasibleBall, MixingMatrix, Problem, SyntheticObjective};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let horizon: usize = std::env::args().nth(1).map_or(Ok(1000), |a| a.parse())?;
    let n = 10;
    let objs = share(vec![SyntheticObjective::distance(vec![0.4, -0.3, 0.2, 0.0, 0.1], 0.05); n]);
    let w = MixingMatrix::metropolis(&erdos_renyi(n, 0.4, 2)?)?;
    let problem = Problem::new(objs, w, FeasibleBall::new(1.0)?, None)?;
    let seed = 9;

    let (best, results) = tune_dsf(&problem, &DsfConfig::default_grid(), horizon, seed)?;
    for r in &results {
        println!("eta0 {:>5} mu0 {:>6}: f = {:.5}", r.config.eta0, r.config.mu0, r.final_objective);
    }
    let final_f = |t: &dpoem::RunTrace| t.last_row().map_or(f64::NAN, |r| r.f_xbar);
    let dsf_t = run_dsf(&problem, &best, horizon, seed, horizon)?;
    let dsf_d = run_dsf(&problem, &DsfConfig::default(), horizon, seed, horizon)?;
    let poem = run_dpoem(&problem, &DpoemConfig { metric_stride: horizon, ..DpoemConfig::new(0.1, horizon, seed) })?;
    println!("DSF-T (eta0 {}, mu0 {}): {:.5}", best.eta0, best.mu0, final_f(&dsf_t));
    println!("DSF-D: {:.5}", final_f(&dsf_d));
    println!("D-POEM: {:.5}", final_f(&poem));
    Ok(())
}
