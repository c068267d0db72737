//! The D-POEM round driver.
//!
//! Each round, for every agent `i` in parallel:
//!
//! 1. radius proxy `r̂_i = max(r̄_i^{prev}, ‖x_i − x_i^0‖)`
//! 2. gossip the proxies: `r̄ = W r̂`
//! 3. smoothing radius `μ_i = r̄_i √(d / (t+1))`
//! 4. draw `ξ_i` then `v_i`, form the two-point estimate `g_i` at `x_i`
//! 5. `G_i += ‖g_i‖²`, stepsize `η_i = r̄_i / √G_i`
//! 6. gossip the iterates: `z = W X`
//! 7. `x_i ← Π(z_i − η_i g_i)`
//!
//! Steps 2 and 6 are barriers; everything else only touches agent-owned state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::{estimate_gradient, GradientEstimate};
use crate::metrics::{network_average, step_disagreement, AgentRoundStats, RoundReport, RunTrace, TraceRecorder};
use crate::network::{MixingMatrix, NetworkError};
use crate::oracle::{OracleError, SharedObjective};
use crate::rng::{agent_rng, AgentRng};

#[derive(Debug, Error, PartialEq)]
pub enum RunError {
    #[error("no agents")]
    NoAgents,
    #[error("{objectives} objectives but the mixing matrix is {mixing}×{mixing}")]
    AgentCountMismatch { objectives: usize, mixing: usize },
    #[error("objective dimensions disagree: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("radius floor {r_eps} must lie in (0, {diameter}]")]
    RadiusFloorOutOfRange { r_eps: f64, diameter: f64 },
    #[error("ball radius must be positive, got {0}")]
    BadBallRadius(f64),
    #[error("initial point has norm {norm}, outside the ball of radius {radius}")]
    InitialPointOutside { norm: f64, radius: f64 },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("empty tuning grid")]
    EmptyGrid,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Euclidean ball of radius `R` centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBall {
    radius: f64,
}

impl FeasibleBall {
    pub fn new(radius: f64) -> Result<Self, RunError> {
        if radius > 0.0 && radius.is_finite() {
            Ok(Self { radius })
        } else {
            Err(RunError::BadBallRadius(radius))
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `D_X = 2R`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        norm(x) <= self.radius
    }

    pub fn project_in_place(&self, y: &mut [f64]) {
        let n = norm(y);
        if n > self.radius {
            let s = self.radius / n;
            y.iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// Euclidean projection onto the ball.
pub fn project_ball(y: &[f64], ball: &FeasibleBall) -> Vec<f64> {
    let mut out = y.to_vec();
    ball.project_in_place(&mut out);
    out
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// One agent's private state between rounds.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub x: Vec<f64>,
    pub x0: Vec<f64>,
    /// `r̄_{i,t−1}`; starts at `r_ε`.
    pub r_bar_prev: f64,
    /// `G_{i,t−1}`; starts at `r_ε²`.
    pub g_accum: f64,
    pub rng: AgentRng,
}

impl AgentState {
    pub fn new(id: usize, x0: Vec<f64>, r_eps: f64, seed: u64) -> Self {
        Self { id, x: x0.clone(), x0, r_bar_prev: r_eps, g_accum: r_eps * r_eps, rng: agent_rng(seed, id) }
    }
}

/// `r̂ = max(r̄_prev, ‖x − x0‖)`.
pub fn radius_proxy(state: &AgentState) -> f64 {
    state.r_bar_prev.max(distance(&state.x, &state.x0))
}

/// `μ = r̄ √(d / (t+1))`.
pub fn smoothing_radius(r_bar: f64, d: usize, t: usize) -> f64 {
    r_bar * (d as f64 / (t + 1) as f64).sqrt()
}

/// `η = r̄ / √G`.
pub fn stepsize(r_bar: f64, g_accum: f64) -> f64 {
    r_bar / g_accum.sqrt()
}

/// The shared experiment context: objectives, weights, constraint, start point.
#[derive(Debug, Clone)]
pub struct Problem {
    pub objectives: Vec<SharedObjective>,
    pub mixing: MixingMatrix,
    pub ball: FeasibleBall,
    pub x0: Vec<f64>,
}

impl Problem {
    /// Validates agent counts and dimensions; `x0` defaults to the origin.
    pub fn new(
        objectives: Vec<SharedObjective>,
        mixing: MixingMatrix,
        ball: FeasibleBall,
        x0: Option<Vec<f64>>,
    ) -> Result<Self, RunError> {
        let first = objectives.first().ok_or(RunError::NoAgents)?;
        let d = first.dim();
        if let Some(o) = objectives.iter().find(|o| o.dim() != d) {
            return Err(RunError::DimensionMismatch(d, o.dim()));
        }
        if objectives.len() != mixing.n() {
            return Err(RunError::AgentCountMismatch { objectives: objectives.len(), mixing: mixing.n() });
        }
        let x0 = x0.unwrap_or_else(|| vec![0.0; d]);
        if x0.len() != d {
            return Err(RunError::DimensionMismatch(d, x0.len()));
        }
        if !ball.contains(&x0) {
            return Err(RunError::InitialPointOutside { norm: norm(&x0), radius: ball.radius() });
        }
        Ok(Self { objectives, mixing, ball, x0 })
    }

    pub fn agents(&self) -> usize {
        self.objectives.len()
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpoemConfig {
    /// Radius floor `r_ε ∈ (0, D_X]`.
    pub r_eps: f64,
    pub horizon: usize,
    pub seed: u64,
    /// Emit a trace row every this many rounds (and always the last).
    pub metric_stride: usize,
    /// Snapshot per-agent iterates every this many rounds; 0 disables.
    pub agent_stride: usize,
}

impl DpoemConfig {
    pub fn new(r_eps: f64, horizon: usize, seed: u64) -> Self {
        Self { r_eps, horizon, seed, metric_stride: 1, agent_stride: 0 }
    }
}

/// Runs D-POEM for `cfg.horizon` rounds.
pub fn run_dpoem(problem: &Problem, cfg: &DpoemConfig) -> Result<RunTrace, RunError> {
    let diameter = problem.ball.diameter();
    if !(cfg.r_eps > 0.0 && cfg.r_eps <= diameter) {
        return Err(RunError::RadiusFloorOutOfRange { r_eps: cfg.r_eps, diameter });
    }
    if cfg.horizon == 0 {
        return Err(RunError::ZeroHorizon);
    }
    let n = problem.agents();
    let d = problem.dim();
    let w = &problem.mixing;
    let mut states: Vec<AgentState> =
        (0..n).map(|i| AgentState::new(i, problem.x0.clone(), cfg.r_eps, cfg.seed)).collect();
    let mut recorder =
        TraceRecorder::new("dpoem", &problem.objectives, w.sigma(), cfg.seed, cfg.horizon, cfg.metric_stride, cfg.agent_stride);
    let mut oracle_calls = 0u64;
    let mut comm_rounds = 0u64;

    for t in 0..cfg.horizon {
        let r_hat: Vec<f64> = states.iter().map(radius_proxy).collect();
        let r_bar = w.mix_scalars(&r_hat)?;
        comm_rounds += 1;

        let estimates: Vec<Result<(GradientEstimate, f64, f64), OracleError>> = states
            .par_iter_mut()
            .zip(problem.objectives.par_iter())
            .zip(r_bar.par_iter())
            .map(|((state, obj), &rb)| {
                let mu = smoothing_radius(rb, d, t);
                let est = estimate_gradient(obj.as_ref(), &state.x, mu, &mut state.rng)?;
                state.g_accum += est.norm_sq();
                let eta = stepsize(rb, state.g_accum);
                Ok((est, mu, eta))
            })
            .collect();
        let estimates = estimates.into_iter().collect::<Result<Vec<_>, _>>()?;
        oracle_calls += 2 * n as u64;

        let x_now: Vec<Vec<f64>> = states.iter().map(|s| s.x.clone()).collect();
        let z = w.mix(&x_now)?;
        comm_rounds += 1;

        let mut steps = Vec::with_capacity(n);
        let mut agents = Vec::with_capacity(n);
        for (i, (state, (est, mu, eta))) in states.iter_mut().zip(&estimates).enumerate() {
            recorder.invariants().check_norm(est.within_norm_bound(problem.objectives[i].lipschitz()));
            let step: Vec<f64> = est.g.iter().map(|g| eta * g).collect();
            let mut next: Vec<f64> = z[i].iter().zip(&step).map(|(zi, s)| zi - s).collect();
            problem.ball.project_in_place(&mut next);
            state.x = next;
            state.r_bar_prev = r_bar[i];
            agents.push(AgentRoundStats {
                r_hat: r_hat[i],
                r_bar: r_bar[i],
                mu: *mu,
                g_norm: est.norm(),
                eta: *eta,
                g_accum: state.g_accum,
            });
            steps.push(step);
        }

        let x_after: Vec<Vec<f64>> = states.iter().map(|s| s.x.clone()).collect();
        let xbar_start = network_average(&x_now);
        recorder.record(RoundReport {
            t: t + 1,
            weight: r_bar.iter().sum::<f64>() / n as f64,
            xbar_start: &xbar_start,
            x_after: &x_after,
            agents,
            oracle_calls_total: oracle_calls,
            comm_rounds_total: comm_rounds,
            contraction: (crate::metrics::consensus_error(&x_now), step_disagreement(&steps)),
        });
    }

    Ok(recorder.finish(states.into_iter().map(|s| s.x).collect()))
}
