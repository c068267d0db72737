//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use dpoem::experiment::{run_experiment, Algorithm, ExperimentConfig, ExperimentContext};
use dpoem::network::erdos_renyi;
use dpoem::oracle::{full_objective, share};
use dpoem::rng::agent_rng;
use dpoem::{
    consensus_error, estimate_gradient, run_dpoem, DpoemConfig, FeasibleBall, Graph, MixingMatrix, Problem,
    SyntheticObjective,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, started: Instant, outcome: Outcome) -> Outcome {
    let took = started.elapsed();
    match outcome {
        Ok(d) if took <= limit => Ok(format!("{d}; {:.1}s", took.as_secs_f64())),
        Ok(d) => Err(format!("{d}; {:.1}s exceeds {}s", took.as_secs_f64(), limit.as_secs())),
        Err(d) => Err(format!("{d}; {:.1}s", took.as_secs_f64())),
    }
}

fn mixing_suite() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let combos = [(5, 0.25), (5, 0.5), (20, 0.25), (20, 0.5), (50, 0.25), (50, 0.5)];
    let mut failures = Vec::new();
    let mut worst_sigma: f64 = 0.0;
    for k in 0..100u64 {
        let (n, p) = combos[k as usize % combos.len()];
        let g = erdos_renyi(n, p, 1000 + k).map_err(|e| e.to_string())?;
        let w = MixingMatrix::metropolis(&g).map_err(|e| e.to_string())?;
        let mut ok = true;
        for i in 0..n {
            ok &= (w.row(i).iter().sum::<f64>() - 1.0).abs() <= 1e-12;
            ok &= ((0..n).map(|j| w.get(j, i)).sum::<f64>() - 1.0).abs() <= 1e-12;
            ok &= (0..n).all(|j| w.get(i, j) == w.get(j, i));
        }
        ok &= w.sigma() < 1.0;
        worst_sigma = worst_sigma.max(w.sigma());
        for _ in 0..10 {
            let x: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let y = w.mix(&x).map_err(|e| e.to_string())?;
            ok &= consensus_error(&y) <= w.sigma() * consensus_error(&x) + 1e-9;
        }
        if !ok {
            failures.push(k);
        }
    }
    within(
        Duration::from_secs(10),
        started,
        check(failures.is_empty(), format!("100 graphs, failing {failures:?}, max sigma {worst_sigma:.4}")),
    )
}

fn mushrooms_config(seed: u64, algorithms: Vec<Algorithm>) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::load(common::config_path("mushrooms.toml")).map_err(|e| e.to_string())?;
    cfg.seed = seed;
    cfg.algorithms = algorithms;
    Ok(cfg)
}

fn estimator_norm_bound() -> Outcome {
    let started = Instant::now();
    let cfg = mushrooms_config(1, vec![Algorithm::Dpoem])?;
    let ctx = ExperimentContext::build(&cfg).map_err(|e| e.to_string())?;
    let run = ctx.run(Algorithm::Dpoem).map_err(|e| e.to_string())?;
    let inv = run.trace.invariants;
    within(
        Duration::from_secs(30),
        started,
        check(
            inv.norm_violations == 0 && inv.estimates_checked == (cfg.agents * cfg.horizon) as u64,
            format!("{} estimates, {} violations of |g| <= L d", inv.estimates_checked, inv.norm_violations),
        ),
    )
}

fn estimator_unbiased() -> Outcome {
    let started = Instant::now();
    let d = 10;
    let c: Vec<f64> = (0..d).map(|i| 0.15 * i as f64 - 0.6).collect();
    let obj = SyntheticObjective::linear(c.clone(), 0.5);
    let x: Vec<f64> = (0..d).map(|i| 0.05 * i as f64 - 0.2).collect();
    let mut rng = agent_rng(77, 0);
    let draws = 100_000;
    let (mut sum, mut sq) = (vec![0.0; d], vec![0.0; d]);
    for _ in 0..draws {
        let g = estimate_gradient(&obj, &x, 0.1, &mut rng).map_err(|e| e.to_string())?.g;
        for k in 0..d {
            sum[k] += g[k];
            sq[k] += g[k] * g[k];
        }
    }
    let m = draws as f64;
    let z: Vec<f64> = (0..d)
        .map(|k| {
            let mean = sum[k] / m;
            let se = ((sq[k] / m - mean * mean) / m).sqrt();
            (mean - c[k]).abs() / se
        })
        .collect();
    let worst = z.iter().cloned().fold(0.0, f64::max);
    within(Duration::from_secs(30), started, check(worst <= 3.0, format!("worst |mean - c| = {worst:.2} standard errors")))
}

fn algorithm_laws() -> Outcome {
    let started = Instant::now();
    let (n, horizon, r_eps, radius) = (20usize, 2000usize, 0.1, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let objs: Vec<_> = (0..n)
        .map(|_| SyntheticObjective::distance((0..5).map(|_| rng.random_range(-0.5..0.5)).collect(), 0.05))
        .collect();
    let w = MixingMatrix::metropolis(&erdos_renyi(n, 0.25, 9).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let p = Problem::new(share(objs), w, FeasibleBall::new(radius).unwrap(), None).map_err(|e| e.to_string())?;
    let trace = run_dpoem(&p, &DpoemConfig { agent_stride: 1, ..DpoemConfig::new(r_eps, horizon, 11) })
        .map_err(|e| e.to_string())?;

    let mut problems = Vec::new();
    let means = trace.weights();
    if !means.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)) {
        problems.push("mean radius decreased".to_string());
    }
    let mut prev_g = vec![r_eps * r_eps; n];
    for rec in &trace.records {
        for (i, a) in rec.agents.iter().enumerate() {
            if a.r_bar < r_eps * (1.0 - 1e-12) || a.r_bar > 2.0 * radius * (1.0 + 1e-12) {
                problems.push(format!("r_bar {} out of range at t={}", a.r_bar, rec.t));
            }
            let expect = prev_g[i] + a.g_norm * a.g_norm;
            if a.g_accum < prev_g[i] || (a.g_accum - expect).abs() > 1e-9 * expect {
                problems.push(format!("G not accumulating at t={}", rec.t));
            }
            prev_g[i] = a.g_accum;
        }
    }
    let infeasible = trace
        .snapshots
        .iter()
        .flat_map(|(_, xs)| xs.iter())
        .filter(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt() > radius * (1.0 + 1e-12))
        .count();
    if infeasible > 0 || trace.snapshots.len() != horizon {
        problems.push(format!("{infeasible} infeasible iterates"));
    }
    let last = trace.records.last().unwrap();
    let per_agent_calls = last.oracle_calls_total / n as u64;
    if per_agent_calls != 2 * horizon as u64 || last.comm_rounds_total != 2 * horizon as u64 {
        problems.push(format!("counters {per_agent_calls} calls, {} rounds", last.comm_rounds_total));
    }
    let bound = trace.bound_check(p.ball.diameter(), r_eps);
    if !(bound.passed && bound.margin >= 1.0) {
        problems.push(format!("bound check margin {:.3}", bound.margin));
    }
    problems.truncate(3);
    within(
        Duration::from_secs(60),
        started,
        check(problems.is_empty(), if problems.is_empty() {
                format!("n=20 T=2000, all laws hold, bound margin {:.2}", bound.margin)
            } else {
                problems.join("; ")
            }),
    )
}

fn single_agent_equivalence() -> Outcome {
    let obj = SyntheticObjective::distance(vec![0.6, -0.3, 0.2, 0.4, -0.1], 0.1);
    let x0 = vec![-0.2, 0.1, 0.0, 0.3, 0.0];
    let (r_eps, horizon, seed) = (0.05, 500, 31);
    let p = Problem::new(share(vec![obj.clone()]), MixingMatrix::identity(1), FeasibleBall::new(1.0).unwrap(), Some(x0.clone()))
        .map_err(|e| e.to_string())?;
    let trace = run_dpoem(&p, &DpoemConfig { agent_stride: 1, ..DpoemConfig::new(r_eps, horizon, seed) })
        .map_err(|e| e.to_string())?;
    let reference = common::centralized_reference(&obj, &x0, 1.0, r_eps, horizon, seed);
    let worst = trace
        .snapshots
        .iter()
        .zip(&reference)
        .flat_map(|((_, xs), r)| xs[0].iter().zip(r).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    check(
        worst <= 1e-12 && trace.snapshots.len() == horizon,
        format!("500 rounds, max coordinate deviation {worst:.2e}"),
    )
}

fn rate_check() -> Outcome {
    let started = Instant::now();
    let (n, d) = (20, 10);
    let mut center = vec![0.0; d];
    center[0] = 0.5;
    let objs = share(vec![SyntheticObjective::distance(center, 0.05); n]);
    let w = MixingMatrix::metropolis(&erdos_renyi(n, 0.25, 7).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let p = Problem::new(objs, w, FeasibleBall::new(1.0).unwrap(), None).map_err(|e| e.to_string())?;
    let mut medians = Vec::new();
    for horizon in [500, 2000, 8000] {
        let mut gaps = Vec::new();
        for seed in 1..=5 {
            let trace = run_dpoem(&p, &DpoemConfig { metric_stride: horizon, ..DpoemConfig::new(0.1, horizon, seed) })
                .map_err(|e| e.to_string())?;
            let x = trace.output().expect("nonempty").x_out;
            gaps.push(full_objective(&p.objectives, &x).map_err(|e| e.to_string())?);
        }
        medians.push(common::median(gaps));
    }
    let ratio = medians[2] / medians[1];
    within(
        Duration::from_secs(300),
        started,
        check(
            ratio <= 0.45,
            format!("median gaps {:.2e} / {:.2e} / {:.2e}, gap(8000)/gap(2000) = {ratio:.3}", medians[0], medians[1], medians[2]),
        ),
    )
}

fn network_effect() -> Outcome {
    let (n, horizon) = (16, 1000);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let objs: Vec<_> = (0..n)
        .map(|_| SyntheticObjective::distance((0..3).map(|_| rng.random_range(-0.8..0.8)).collect(), 0.05))
        .collect();
    let objs = share(objs);
    let near_complete = Graph::from_edges(n, Graph::complete(n).edges().filter(|&e| e != (0, 1))).unwrap();
    let mut out = Vec::new();
    for g in [Graph::path(n), near_complete] {
        let w = MixingMatrix::metropolis(&g).map_err(|e| e.to_string())?;
        let sigma = w.sigma();
        let p = Problem::new(objs.clone(), w, FeasibleBall::new(1.0).unwrap(), None).map_err(|e| e.to_string())?;
        let mut avgs = Vec::new();
        for seed in 1..=5 {
            let t = run_dpoem(&p, &DpoemConfig { metric_stride: horizon, ..DpoemConfig::new(0.1, horizon, seed) })
                .map_err(|e| e.to_string())?;
            avgs.push(t.records.iter().map(|r| r.consensus_error).sum::<f64>() / horizon as f64);
        }
        out.push((sigma, common::median(avgs)));
    }
    check(
        out[0].1 > out[1].1,
        format!(
            "path sigma {:.3} error {:.4} vs near-complete sigma {:.3} error {:.4}",
            out[0].0, out[0].1, out[1].0, out[1].1
        ),
    )
}

fn mushrooms_vs_dsf_d() -> Outcome {
    let started = Instant::now();
    let mut wins = 0;
    let mut pairs = Vec::new();
    let mut source = String::new();
    for seed in 1..=5 {
        let cfg = mushrooms_config(seed, vec![Algorithm::Dpoem, Algorithm::DsfD])?;
        let ctx = ExperimentContext::build(&cfg).map_err(|e| e.to_string())?;
        source = format!("{:?}", ctx.origin).split_whitespace().next().unwrap_or_default().to_string();
        let f = |alg| -> Result<f64, String> {
            let run = ctx.run(alg).map_err(|e| e.to_string())?;
            Ok(run.trace.last_row().expect("rows").f_xbar)
        };
        let (poem, dsf) = (f(Algorithm::Dpoem)?, f(Algorithm::DsfD)?);
        wins += usize::from(poem < dsf);
        pairs.push(format!("{poem:.4}<{dsf:.4}"));
    }
    within(
        Duration::from_secs(600),
        started,
        check(wins >= 4, format!("{source} data, D-POEM below DSF-D in {wins}/5 seeds [{}]", pairs.join(", "))),
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig::load(common::config_path("mushrooms.toml")).map_err(|e| e.to_string())?;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&cfg, Some(a.path())).map_err(|e| e.to_string())?;
    run_experiment(&cfg, Some(b.path())).map_err(|e| e.to_string())?;
    let mut same = 0;
    for alg in &cfg.algorithms {
        let f = format!("{}__{}.csv", cfg.name, alg.as_str());
        let (x, y) = (std::fs::read(a.path().join(&f)).unwrap(), std::fs::read(b.path().join(&f)).unwrap());
        if x != y {
            return Err(format!("{f} differs between runs"));
        }
        same += 1;
    }
    Ok(format!("{same} trace CSVs byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("mixing-matrix suite", mixing_suite),
        ("estimator norm bound on mushrooms", estimator_norm_bound),
        ("estimator unbiasedness on LINEAR", estimator_unbiased),
        ("algorithm laws", algorithm_laws),
        ("single-agent equivalence", single_agent_equivalence),
        ("rate check", rate_check),
        ("network effect", network_effect),
        ("mushrooms: D-POEM beats DSF-D", mushrooms_vs_dsf_d),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
