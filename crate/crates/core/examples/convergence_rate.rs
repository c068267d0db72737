//! Optimality gap of the D-POEM output versus the horizon on a problem with a
//! known optimum: every agent holds `‖x − c‖ + noise` with the same center `c`,
//! so `f⋆ = 0`.
//!
//! ```text
//! cargo run --release --example convergence_rate [agents] [dim] [seeds]
//! ```

use dpoem::network::erdos_renyi;
use dpoem::oracle::{full_objective, share};
use dpoem::{run_dpoem, DpoemConfig, FeasibleBall, MixingMatrix, Problem, SyntheticObjective};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let agents = args.first().copied().unwrap_or(10);
    let dim = args.get(1).copied().unwrap_or(5);
    let seeds = args.get(2).copied().unwrap_or(5) as u64;

    let mut center = vec![0.0; dim];
    center[0] = 0.5;
    let objs = share(vec![SyntheticObjective::distance(center, 0.05); agents]);
    let w = MixingMatrix::metropolis(&erdos_renyi(agents, 0.5, 7)?)?;
    let problem = Problem::new(objs, w, FeasibleBall::new(1.0)?, None)?;
    println!("n = {agents}, d = {dim}, sigma = {:.3}", problem.mixing.sigma());

    let mut previous: Option<f64> = None;
    for horizon in [500, 2000, 8000] {
        let gaps: Vec<f64> = (0..seeds)
            .map(|seed| {
                let trace = run_dpoem(&problem, &DpoemConfig { metric_stride: horizon, ..DpoemConfig::new(0.1, horizon, seed) })?;
                let out = trace.output().expect("nonempty history");
                Ok(full_objective(&problem.objectives, &out.x_out)?)
            })
            .collect::<Result<_, Box<dyn std::error::Error>>>()?;
        let gap = median(gaps);
        match previous {
            Some(p) => println!("T = {horizon:>5}  median gap {gap:.5}  ratio to previous {:.3}", gap / p),
            None => println!("T = {horizon:>5}  median gap {gap:.5}"),
        }
        previous = Some(gap);
    }
    Ok(())
}
