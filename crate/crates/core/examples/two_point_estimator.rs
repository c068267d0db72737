//! The symmetric two-point estimator is unbiased for linear objectives and
//! never exceeds `L·d` in norm.
//!
//! ```text
//! cargo run --release --example two_point_estimator [draws]
//! ```

use dpoem::rng::agent_rng;
use dpoem::{estimate_gradient, SyntheticObjective};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let draws: usize = std::env::args().nth(1).map_or(Ok(100_000), |a| a.parse())?;
    let c: Vec<f64> = (0..10).map(|i| 0.1 * (i as f64 - 4.5)).collect();
    let obj = SyntheticObjective::linear(c.clone(), 0.5);
    let x = vec![0.2; c.len()];
    let bound = c.iter().map(|v| v * v).sum::<f64>().sqrt() * c.len() as f64;

    let mut rng = agent_rng(42, 0);
    let d = c.len();
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    let mut largest: f64 = 0.0;
    for _ in 0..draws {
        let est = estimate_gradient(&obj, &x, 0.05, &mut rng)?;
        largest = largest.max(est.norm());
        for k in 0..d {
            sum[k] += est.g[k];
            sum_sq[k] += est.g[k] * est.g[k];
        }
    }
    let m = draws as f64;
    println!("coord        c     mean  std.err");
    for k in 0..d {
        let mean = sum[k] / m;
        let se = ((sum_sq[k] / m - mean * mean) / m).sqrt();
        println!("{k:>5} {:>8.4} {mean:>8.4} {se:>8.4}", c[k]);
    }
    println!("largest |g| = {largest:.4}, bound L*d = {bound:.4}");
    Ok(())
}
