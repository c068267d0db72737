//! Worse-connected graphs keep agents further apart: the time-averaged
//! consensus error of D-POEM on a path versus a complete graph.
//!
//! ```text
//! cargo run --release --example network_effect [agents] [horizon]
//! ```

use dpoem::oracle::share;
use dpoem::{run_dpoem, DpoemConfig, FeasibleBall, Graph, MixingMatrix, Problem, SyntheticObjective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(16), |a| a.parse())?;
    let horizon: usize = args.next().map_or(Ok(1000), |a| a.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let objs: Vec<_> =
        (0..n).map(|_| SyntheticObjective::distance((0..3).map(|_| rng.random_range(-0.8..0.8)).collect(), 0.05)).collect();
    let objs = share(objs);

    for (name, g) in [("path", Graph::path(n)), ("complete", Graph::complete(n))] {
        let w = MixingMatrix::metropolis(&g)?;
        let sigma = w.sigma();
        let problem = Problem::new(objs.clone(), w, FeasibleBall::new(1.0)?, None)?;
        let trace = run_dpoem(&problem, &DpoemConfig { metric_stride: horizon, ..DpoemConfig::new(0.1, horizon, 4) })?;
        let avg = trace.records.iter().map(|r| r.consensus_error).sum::<f64>() / horizon as f64;
        println!("{name:>8}: sigma {sigma:.4}, mean consensus error {avg:.5}, final f {:.5}", trace.last_row().unwrap().f_xbar);
    }
    Ok(())
}
