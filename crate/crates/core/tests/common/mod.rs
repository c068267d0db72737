#![allow(dead_code)]

use dpoem::oracle::StochasticObjective;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Centralized single-agent method written straight from the round
/// description, sharing nothing with the library driver but the objective
/// and the agent-0 random stream. Returns the iterate after every round.
pub fn centralized_reference(
    obj: &dyn StochasticObjective,
    x0: &[f64],
    radius: f64,
    r_eps: f64,
    horizon: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let d = x0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let mut x = x0.to_vec();
    let mut r_prev = r_eps;
    let mut g_sum = r_eps * r_eps;
    let mut out = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let moved = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let r = r_prev.max(moved);
        let mu = r * (d as f64 / (t as f64 + 1.0)).sqrt();
        let xi = obj.sample(&mut rng);
        let v = loop {
            let raw: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let n = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 0.0 && n.is_finite() {
                break raw.into_iter().map(|a| a / n).collect::<Vec<f64>>();
            }
        };
        let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + mu * b).collect();
        let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - mu * b).collect();
        let scale = d as f64 / (2.0 * mu) * (obj.eval(&plus, &xi) - obj.eval(&minus, &xi));
        let g: Vec<f64> = v.iter().map(|a| scale * a).collect();
        g_sum += g.iter().map(|a| a * a).sum::<f64>();
        let eta = r / g_sum.sqrt();
        let mut next: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
        let n = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > radius {
            next.iter_mut().for_each(|a| *a *= radius / n);
        }
        x = next;
        r_prev = r;
        out.push(x.clone());
    }
    out
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Path to a file in the repository's `configs/` directory.
pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}
