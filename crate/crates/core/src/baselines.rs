//! Distributed subgradient-free (DSF) baseline.
//!
//! Consensus plus a projected two-point randomized-difference step with
//! preset diminishing schedules `η_t = η₀ / (t+1)^α` and `μ_t = μ₀ / (t+1)^β`.
//! DSF-D uses the default constants; DSF-T picks them from a grid by the
//! final objective at the network average.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dpoem::{Problem, RunError};
use crate::estimator::{estimate_gradient, GradientEstimate};
use crate::metrics::{consensus_error, network_average, step_disagreement, AgentRoundStats, RoundReport, RunTrace, TraceRecorder};
use crate::oracle::OracleError;
use crate::rng::agent_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DsfConfig {
    pub eta0: f64,
    pub mu0: f64,
    /// Stepsize decay exponent `α ∈ (0, 1]`.
    pub alpha: f64,
    /// Smoothing decay exponent `β > 0`.
    pub beta: f64,
}

impl Default for DsfConfig {
    /// DSF-D: `η₀ = μ₀ = 1`, `α = 1/2`, `β = 1`.
    fn default() -> Self {
        Self { eta0: 1.0, mu0: 1.0, alpha: 0.5, beta: 1.0 }
    }
}

impl DsfConfig {
    pub fn with_constants(eta0: f64, mu0: f64) -> Self {
        Self { eta0, mu0, ..Self::default() }
    }

    pub fn stepsize(&self, t: usize) -> f64 {
        self.eta0 / ((t + 1) as f64).powf(self.alpha)
    }

    pub fn smoothing(&self, t: usize) -> f64 {
        self.mu0 / ((t + 1) as f64).powf(self.beta)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let ok = self.eta0 > 0.0 && self.mu0 > 0.0 && self.alpha > 0.0 && self.alpha <= 1.0 && self.beta > 0.0;
        if ok {
            Ok(())
        } else {
            Err(RunError::BadSchedule(format!("{self:?}")))
        }
    }

    /// `η₀ ∈ {0.01, 0.1, 1, 10} × μ₀ ∈ {1e−3, 1e−2, 1e−1, 1}`.
    pub fn default_grid() -> Vec<Self> {
        let mut grid = Vec::with_capacity(16);
        for eta0 in [0.01, 0.1, 1.0, 10.0] {
            for mu0 in [1e-3, 1e-2, 1e-1, 1.0] {
                grid.push(Self::with_constants(eta0, mu0));
            }
        }
        grid
    }
}

/// Runs DSF on the same context D-POEM uses. One iterate gossip per round.
pub fn run_dsf(
    problem: &Problem,
    cfg: &DsfConfig,
    horizon: usize,
    seed: u64,
    metric_stride: usize,
) -> Result<RunTrace, RunError> {
    cfg.validate()?;
    if horizon == 0 {
        return Err(RunError::ZeroHorizon);
    }
    let n = problem.agents();
    let w = &problem.mixing;
    let mut xs: Vec<Vec<f64>> = vec![problem.x0.clone(); n];
    let mut rngs: Vec<_> = (0..n).map(|i| agent_rng(seed, i)).collect();
    let mut recorder = TraceRecorder::new("dsf", &problem.objectives, w.sigma(), seed, horizon, metric_stride, 0);
    let mut oracle_calls = 0u64;
    let mut comm_rounds = 0u64;

    for t in 0..horizon {
        let mu = cfg.smoothing(t);
        let eta = cfg.stepsize(t);
        let estimates: Vec<Result<GradientEstimate, OracleError>> = rngs
            .par_iter_mut()
            .zip(problem.objectives.par_iter())
            .zip(xs.par_iter())
            .map(|((rng, obj), x)| estimate_gradient(obj.as_ref(), x, mu, rng))
            .collect();
        let estimates = estimates.into_iter().collect::<Result<Vec<_>, _>>()?;
        oracle_calls += 2 * n as u64;

        let z = w.mix(&xs)?;
        comm_rounds += 1;

        let mut steps = Vec::with_capacity(n);
        let mut agents = Vec::with_capacity(n);
        let mut next_rows = Vec::with_capacity(n);
        for (i, est) in estimates.iter().enumerate() {
            recorder.invariants().check_norm(est.within_norm_bound(problem.objectives[i].lipschitz()));
            let step: Vec<f64> = est.g.iter().map(|g| eta * g).collect();
            let mut next: Vec<f64> = z[i].iter().zip(&step).map(|(zi, s)| zi - s).collect();
            problem.ball.project_in_place(&mut next);
            next_rows.push(next);
            agents.push(AgentRoundStats {
                r_hat: f64::NAN,
                r_bar: f64::NAN,
                mu,
                g_norm: est.norm(),
                eta,
                g_accum: f64::NAN,
            });
            steps.push(step);
        }
        let xbar_start = network_average(&xs);
        let e_prev = consensus_error(&xs);
        xs = next_rows;
        recorder.record(RoundReport {
            t: t + 1,
            weight: 1.0,
            xbar_start: &xbar_start,
            x_after: &xs,
            agents,
            oracle_calls_total: oracle_calls,
            comm_rounds_total: comm_rounds,
            contraction: (e_prev, step_disagreement(&steps)),
        });
    }
    Ok(recorder.finish(xs))
}

/// One grid point's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuningResult {
    pub config: DsfConfig,
    pub final_objective: f64,
}

/// Runs every grid point and returns the one with the lowest final `f(x̄_T)`;
/// ties go to smaller `η₀`, then smaller `μ₀`, then the earlier entry.
pub fn tune_dsf(
    problem: &Problem,
    grid: &[DsfConfig],
    horizon: usize,
    seed: u64,
) -> Result<(DsfConfig, Vec<TuningResult>), RunError> {
    if grid.is_empty() {
        return Err(RunError::EmptyGrid);
    }
    let results: Vec<Result<TuningResult, RunError>> = grid
        .par_iter()
        .map(|cfg| {
            let trace = run_dsf(problem, cfg, horizon, seed, horizon)?;
            let final_objective = trace.last_row().map_or(f64::INFINITY, |r| r.f_xbar);
            Ok(TuningResult { config: *cfg, final_objective })
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let best = results
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            let fa = if a.final_objective.is_nan() { f64::INFINITY } else { a.final_objective };
            let fb = if b.final_objective.is_nan() { f64::INFINITY } else { b.final_objective };
            fa.total_cmp(&fb)
                .then(a.config.eta0.total_cmp(&b.config.eta0))
                .then(a.config.mu0.total_cmp(&b.config.mu0))
                .then(ia.cmp(ib))
        })
        .map(|(_, r)| r.config)
        .expect("grid is nonempty");
    Ok((best, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpoem::FeasibleBall;
    use crate::network::MixingMatrix;
    use crate::oracle::{share, SyntheticObjective};

    #[test]
    fn schedules() {
        let c = DsfConfig::default();
        assert_eq!(c.stepsize(0), 1.0);
        assert_eq!(c.stepsize(3), 0.5);
        assert_eq!(c.smoothing(4), 0.2);
        assert_eq!(DsfConfig::default_grid().len(), 16);
        assert!(DsfConfig { alpha: 1.5, ..c }.validate().is_err());
        assert!(DsfConfig { eta0: 0.0, ..c }.validate().is_err());
    }

    #[test]
    fn zero_objective_freezes_iterates() {
        let objs = share(vec![SyntheticObjective::zero(2); 3]);
        let x0 = vec![0.25, -0.5];
        let p = Problem::new(objs, MixingMatrix::uniform(3), FeasibleBall::new(1.0).unwrap(), Some(x0.clone())).unwrap();
        let trace = run_dsf(&p, &DsfConfig::default(), 30, 4, 1).unwrap();
        assert!(trace.final_iterates.iter().all(|x| *x == x0));
        assert_eq!(trace.records.last().unwrap().comm_rounds_total, 30);
        assert_eq!(trace.records.last().unwrap().oracle_calls_total, 2 * 3 * 30);
    }

    #[test]
    fn grid_of_one_and_duplicates() {
        let objs = share(vec![SyntheticObjective::distance(vec![0.3, 0.0], 0.0); 2]);
        let p = Problem::new(objs, MixingMatrix::uniform(2), FeasibleBall::new(1.0).unwrap(), None).unwrap();
        let only = DsfConfig::with_constants(0.3, 0.1);
        assert_eq!(tune_dsf(&p, &[only], 10, 0).unwrap().0, only);
        let dup = DsfConfig::with_constants(0.2, 0.05);
        let (best, results) = tune_dsf(&p, &[dup, dup], 10, 0).unwrap();
        assert_eq!(best, dup);
        assert_eq!(results.len(), 2);
        assert_eq!(tune_dsf(&p, &[], 10, 0).unwrap_err(), RunError::EmptyGrid);
    }
}
