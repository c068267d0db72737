//! Erdős–Rényi graphs, Metropolis weights and gossip contraction.
//!
//! ```text
//! cargo run --example graph_mixing [n] [p] [seed]
//! ```

use dpoem::network::erdos_renyi_with_attempts;
use dpoem::{consensus_error, Graph, MixingMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(20), |a| a.parse())?;
    let p: f64 = args.next().map_or(Ok(0.25), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |a| a.parse())?;

    let (g, attempts) = erdos_renyi_with_attempts(n, p, seed, 1000)?;
    let w = MixingMatrix::metropolis(&g)?;
    println!("G({n}, {p}) seed {seed}: {} edges after {attempts} draw(s), sigma = {:.4}", g.edge_count(), w.sigma());

    for (name, other) in [("path", Graph::path(n)), ("complete", Graph::complete(n))] {
        println!("{name:>8}: sigma = {:.4}", MixingMatrix::metropolis(&other)?.sigma());
    }

    // disagreement shrinks by at least sigma per gossip round
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut e = consensus_error(&x);
    for round in 1..=5 {
        x = w.mix(&x)?;
        let next = consensus_error(&x);
        println!("round {round}: consensus error {next:.5} (bound {:.5})", w.sigma() * e);
        e = next;
    }
    Ok(())
}
