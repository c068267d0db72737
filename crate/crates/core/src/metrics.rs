//! Observer-side diagnostics: network averages, consensus error, the
//! radius-weighted output iterate, output-time selection and run traces.
//!
//! Everything here has global access to agent state. None of it is charged
//! as communication.

use std::io::Write;

use serde::Serialize;

use crate::dpoem::FeasibleBall;
use crate::oracle::{full_objective, SharedObjective};

/// Column-wise mean `x̄ = (1/n) Σ x_i`.
pub fn network_average(rows: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = rows.first() else { return Vec::new() };
    let mut mean = vec![0.0; first.len()];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    let n = rows.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// `‖(I − J) X‖_F`.
pub fn consensus_error(rows: &[Vec<f64>]) -> f64 {
    let mean = network_average(rows);
    rows.iter()
        .flat_map(|r| r.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)))
        .sum::<f64>()
        .sqrt()
}

/// One round's contribution `(r̄_k, x̄_k)` to the weighted output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedEntry {
    pub weight: f64,
    pub xbar: Vec<f64>,
}

/// Running `R_t = Σ_{k<t} r̄_k` and `S_t = Σ_{k<t} r̄_k x̄_k`, with history.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WeightedOutputAccumulator {
    total_weight: f64,
    weighted_sum: Vec<f64>,
    history: Vec<WeightedEntry>,
}

impl WeightedOutputAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, weight: f64, xbar: &[f64]) {
        if self.weighted_sum.is_empty() {
            self.weighted_sum = vec![0.0; xbar.len()];
        }
        self.total_weight += weight;
        for (s, x) in self.weighted_sum.iter_mut().zip(xbar) {
            *s += weight * x;
        }
        self.history.push(WeightedEntry { weight, xbar: xbar.to_vec() });
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// `x̃_t = S_t / R_t`; `None` before the first push.
    pub fn output(&self) -> Option<Vec<f64>> {
        (self.total_weight > 0.0).then(|| self.weighted_sum.iter().map(|s| s / self.total_weight).collect())
    }

    pub fn history(&self) -> &[WeightedEntry] {
        &self.history
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSelection {
    /// 1-based output time.
    pub tau: usize,
    /// `R_τ / r̄_{τ−1}`.
    pub ratio: f64,
    pub x_out: Vec<f64>,
}

/// Picks `τ = argmax_{1≤t≤T} R_t / r̄_{t−1}` (ties to the smallest `t`) and
/// returns `x̃_τ`. The divisor is the newest weight inside `R_t`.
pub fn select_output(history: &[WeightedEntry]) -> Option<OutputSelection> {
    let first = history.first()?;
    let mut running = 0.0;
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, e) in history.iter().enumerate() {
        running += e.weight;
        let ratio = running / e.weight;
        if ratio > best.1 {
            best = (k + 1, ratio);
        }
    }
    let (tau, ratio) = best;
    let head = &history[..tau];
    let total: f64 = head.iter().map(|e| e.weight).sum();
    let mut x_out = vec![0.0; first.xbar.len()];
    for e in head {
        for (o, x) in x_out.iter_mut().zip(&e.xbar) {
            *o += e.weight * x;
        }
    }
    x_out.iter_mut().for_each(|o| *o /= total);
    Some(OutputSelection { tau, ratio, x_out })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub passed: bool,
    /// `R_τ / r̄_τ` at the selected output time.
    pub lhs: f64,
    /// `T / (e (1 + log(D / r_ε)))`.
    pub rhs: f64,
    /// `lhs / rhs`.
    pub margin: f64,
}

/// Checks the monotone-sequence lower bound on the selected ratio:
/// `R_τ / r̄_τ ≥ T / (e (1 + log(D_X / r_ε)))`.
pub fn poem_bound_check(weights: &[f64], diameter: f64, r_eps: f64) -> BoundCheck {
    let horizon = weights.len() as f64;
    let rhs = horizon / (std::f64::consts::E * (1.0 + (diameter / r_eps).ln()));
    let mut running = 0.0;
    let mut lhs = f64::NEG_INFINITY;
    for &w in weights {
        running += w;
        lhs = lhs.max(running / w);
    }
    let margin = lhs / rhs;
    BoundCheck { passed: lhs >= rhs, lhs, rhs, margin }
}

/// Per-agent quantities of one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentRoundStats {
    pub r_hat: f64,
    pub r_bar: f64,
    pub mu: f64,
    pub g_norm: f64,
    pub eta: f64,
    pub g_accum: f64,
}

/// State after round `t − 1` completed (so `t` rounds have run).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: usize,
    pub agents: Vec<AgentRoundStats>,
    /// Weight this round contributed to the output average (`r̄_{t−1}`).
    pub weight: f64,
    /// `‖(I − J) X_t‖_F` after the round.
    pub consensus_error: f64,
    pub oracle_calls_total: u64,
    pub comm_rounds_total: u64,
}

/// One CSV line; the column order is fixed by [`TRACE_COLUMNS`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: usize,
    pub oracle_calls_total: u64,
    pub comm_rounds_total: u64,
    pub f_xbar: f64,
    pub f_xtilde: f64,
    pub consensus_error: f64,
    pub rbar_mean: f64,
    pub g_max: f64,
    pub eta_mean: f64,
    pub mu_mean: f64,
}

pub const TRACE_COLUMNS: [&str; 10] = [
    "t",
    "oracle_calls_total",
    "comm_rounds_total",
    "f_xbar",
    "f_xtilde",
    "consensus_error",
    "rbar_mean",
    "G_max",
    "eta_mean",
    "mu_mean",
];

/// Counts of runtime invariant checks and their violations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InvariantMonitor {
    pub estimates_checked: u64,
    /// `‖g‖ > L·d`.
    pub norm_violations: u64,
    pub contraction_checks: u64,
    /// `E_{k+1} > σ E_k + U_k`.
    pub contraction_violations: u64,
}

/// Absolute slack for the consensus contraction check.
pub const CONTRACTION_SLACK: f64 = 1e-9;

impl InvariantMonitor {
    pub fn check_norm(&mut self, within: bool) {
        self.estimates_checked += 1;
        if !within {
            self.norm_violations += 1;
        }
    }

    /// `E_{k+1} ≤ σ E_k + U_k` with `U_k = ‖(I − J) S_k G_k‖_F`.
    pub fn check_contraction(&mut self, e_next: f64, sigma: f64, e_prev: f64, u: f64) {
        self.contraction_checks += 1;
        if e_next > sigma * e_prev + u + CONTRACTION_SLACK {
            self.contraction_violations += 1;
        }
    }

    pub fn clean(&self) -> bool {
        self.norm_violations == 0 && self.contraction_violations == 0
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub seed: u64,
    pub agents: usize,
    pub dim: usize,
    pub horizon: usize,
    pub sigma: f64,
    pub records: Vec<RoundRecord>,
    pub rows: Vec<TraceRow>,
    pub accumulator: WeightedOutputAccumulator,
    pub final_iterates: Vec<Vec<f64>>,
    /// Per-agent iterates `(t, X_t)` at the configured stride.
    pub snapshots: Vec<(usize, Vec<Vec<f64>>)>,
    pub invariants: InvariantMonitor,
}

impl RunTrace {
    pub fn final_average(&self) -> Vec<f64> {
        network_average(&self.final_iterates)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.accumulator.history().iter().map(|e| e.weight).collect()
    }

    pub fn output(&self) -> Option<OutputSelection> {
        select_output(self.accumulator.history())
    }

    pub fn bound_check(&self, diameter: f64, r_eps: f64) -> BoundCheck {
        poem_bound_check(&self.weights(), diameter, r_eps)
    }

    pub fn last_row(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", TRACE_COLUMNS.join(","))?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.oracle_calls_total,
                r.comm_rounds_total,
                r.f_xbar,
                r.f_xtilde,
                r.consensus_error,
                r.rbar_mean,
                r.g_max,
                r.eta_mean,
                r.mu_mean
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// `(t, f(x̃_t) − f⋆)` over the recorded rows.
pub fn gap_vs_reference(trace: &RunTrace, f_star: f64) -> Vec<(usize, f64)> {
    trace.rows.iter().map(|r| (r.t, r.f_xtilde - f_star)).collect()
}

/// Shared bookkeeping for the round drivers.
pub(crate) struct TraceRecorder<'a> {
    objectives: &'a [SharedObjective],
    stride: usize,
    agent_stride: usize,
    trace: RunTrace,
}

/// What a driver reports after each round.
pub(crate) struct RoundReport<'a> {
    pub t: usize,
    pub weight: f64,
    pub xbar_start: &'a [f64],
    pub x_after: &'a [Vec<f64>],
    pub agents: Vec<AgentRoundStats>,
    pub oracle_calls_total: u64,
    pub comm_rounds_total: u64,
    /// `(E_k, U_k)` for the contraction check.
    pub contraction: (f64, f64),
}

impl<'a> TraceRecorder<'a> {
    pub fn new(
        algorithm: &str,
        objectives: &'a [SharedObjective],
        sigma: f64,
        seed: u64,
        horizon: usize,
        stride: usize,
        agent_stride: usize,
    ) -> Self {
        let dim = objectives.first().map_or(0, |o| o.dim());
        Self {
            objectives,
            stride: stride.max(1),
            agent_stride,
            trace: RunTrace {
                algorithm: algorithm.to_string(),
                seed,
                agents: objectives.len(),
                dim,
                horizon,
                sigma,
                records: Vec::with_capacity(horizon),
                rows: Vec::new(),
                accumulator: WeightedOutputAccumulator::new(),
                final_iterates: Vec::new(),
                snapshots: Vec::new(),
                invariants: InvariantMonitor::default(),
            },
        }
    }

    pub fn invariants(&mut self) -> &mut InvariantMonitor {
        &mut self.trace.invariants
    }

    pub fn record(&mut self, report: RoundReport<'_>) {
        let RoundReport { t, weight, xbar_start, x_after, agents, oracle_calls_total, comm_rounds_total, contraction } =
            report;
        self.trace.accumulator.push(weight, xbar_start);
        let e_next = consensus_error(x_after);
        let (e_prev, u) = contraction;
        self.trace.invariants.check_contraction(e_next, self.trace.sigma, e_prev, u);

        if t % self.stride == 0 || t == self.trace.horizon {
            let xbar = network_average(x_after);
            let xtilde = self.trace.accumulator.output().expect("at least one weight pushed");
            let n = agents.len() as f64;
            self.trace.rows.push(TraceRow {
                t,
                oracle_calls_total,
                comm_rounds_total,
                f_xbar: full_objective(self.objectives, &xbar).expect("dimensions checked before the run"),
                f_xtilde: full_objective(self.objectives, &xtilde).expect("dimensions checked before the run"),
                consensus_error: e_next,
                rbar_mean: agents.iter().map(|a| a.r_bar).sum::<f64>() / n,
                g_max: agents.iter().map(|a| a.g_accum).fold(f64::NAN, f64::max),
                eta_mean: agents.iter().map(|a| a.eta).sum::<f64>() / n,
                mu_mean: agents.iter().map(|a| a.mu).sum::<f64>() / n,
            });
        }
        if self.agent_stride > 0 && t % self.agent_stride == 0 {
            self.trace.snapshots.push((t, x_after.to_vec()));
        }
        self.trace.records.push(RoundRecord {
            t,
            agents,
            weight,
            consensus_error: e_next,
            oracle_calls_total,
            comm_rounds_total,
        });
    }

    pub fn finish(mut self, final_iterates: Vec<Vec<f64>>) -> RunTrace {
        self.trace.final_iterates = final_iterates;
        self.trace
    }
}

/// `‖(I − J) S G‖_F` for the step rows `η_i g_i`.
pub(crate) fn step_disagreement(steps: &[Vec<f64>]) -> f64 {
    consensus_error(steps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceSolution {
    /// Smallest objective value found (an upper bound on `f⋆`).
    pub value: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// Full-batch projected subgradient descent with iterate averaging,
/// stepsize `D / (L √(k+1))`, started from the origin.
pub fn reference_minimum(objectives: &[SharedObjective], ball: &FeasibleBall, iterations: usize) -> ReferenceSolution {
    let d = objectives.first().map_or(0, |o| o.dim());
    let lipschitz = objectives.iter().map(|o| o.lipschitz()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let f = |x: &[f64]| full_objective(objectives, x).expect("objectives share a dimension");
    let n = objectives.len() as f64;
    let mut x = vec![0.0; d];
    let mut avg = vec![0.0; d];
    let mut best = (f(&x), x.clone());
    for k in 0..iterations {
        let mut g = vec![0.0; d];
        for o in objectives {
            for (gi, si) in g.iter_mut().zip(o.mean_subgradient(&x)) {
                *gi += si / n;
            }
        }
        let step = ball.diameter() / (lipschitz * ((k + 1) as f64).sqrt());
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        ball.project_in_place(&mut x);
        let w = 1.0 / (k + 1) as f64;
        for (a, xi) in avg.iter_mut().zip(&x) {
            *a += w * (xi - *a);
        }
        if (k + 1) % 100 == 0 || k + 1 == iterations {
            for cand in [&x, &avg] {
                let v = f(cand);
                if v < best.0 {
                    best = (v, cand.clone());
                }
            }
        }
    }
    ReferenceSolution { value: best.0, x: best.1, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn history(weights: &[f64]) -> Vec<WeightedEntry> {
        weights.iter().enumerate().map(|(k, &w)| WeightedEntry { weight: w, xbar: vec![k as f64] }).collect()
    }

    #[test]
    fn averages() {
        assert_eq!(network_average(&vec![vec![1.5, -2.0]; 4]), vec![1.5, -2.0]);
        assert_eq!(network_average(&[vec![1.0, 0.0], vec![-1.0, 0.0]]), vec![0.0, 0.0]);
        assert_eq!(network_average(&[vec![1.0, 1.0], vec![3.0, 5.0]]), vec![2.0, 3.0]);
    }

    #[test]
    fn consensus_error_examples() {
        assert_eq!(consensus_error(&vec![vec![0.2, 0.3]; 5]), 0.0);
        assert_abs_diff_eq!(consensus_error(&[vec![1.0, 0.0], vec![-1.0, 0.0]]), 2f64.sqrt(), epsilon = 1e-15);
        let x = vec![vec![1.0, 2.0], vec![-0.5, 0.0], vec![3.0, 1.0]];
        let x2: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| 2.0 * v).collect()).collect();
        assert_abs_diff_eq!(consensus_error(&x2), 2.0 * consensus_error(&x), epsilon = 1e-14);
    }

    #[test]
    fn select_output_examples() {
        let s = select_output(&history(&[0.5; 6])).unwrap();
        assert_eq!(s.tau, 6);
        assert_abs_diff_eq!(s.ratio, 6.0, epsilon = 1e-12);

        let s = select_output(&history(&[0.3])).unwrap();
        assert_eq!((s.tau, s.x_out.clone()), (1, vec![0.0]));

        // ratios 1, 2, 12/10
        let s = select_output(&history(&[1.0, 1.0, 10.0])).unwrap();
        assert_eq!(s.tau, 2);
        assert_eq!(s.x_out, vec![0.5]);

        assert!(select_output(&[]).is_none());
    }

    #[test]
    fn ties_pick_the_earliest_time() {
        // ratios 1, 2, 2 (4/2)
        let s = select_output(&history(&[1.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.tau, 2);
    }

    #[test]
    fn bound_check_constant_radius() {
        let c = poem_bound_check(&[0.1; 50], 2.0, 0.1);
        assert!(c.passed);
        assert_abs_diff_eq!(c.lhs, 50.0, epsilon = 1e-9);
        assert!(c.rhs < 50.0);
    }

    #[test]
    fn bound_check_flags_adversarial_history() {
        // geometric growth far past D / r_ε keeps every ratio near 1
        let weights: Vec<f64> = (0..40).map(|k| 0.1 * 3f64.powi(k)).collect();
        let c = poem_bound_check(&weights, 2.0, 0.1);
        assert!(!c.passed, "{c:?}");
    }

    #[test]
    fn accumulator_output() {
        let mut acc = WeightedOutputAccumulator::new();
        assert!(acc.output().is_none());
        acc.push(1.0, &[0.0, 2.0]);
        acc.push(3.0, &[4.0, 2.0]);
        assert_eq!(acc.output().unwrap(), vec![3.0, 2.0]);
        assert_eq!(acc.total_weight(), 4.0);
    }

    #[test]
    fn contraction_monitor() {
        let mut m = InvariantMonitor::default();
        m.check_contraction(0.5, 0.5, 1.0, 0.0);
        assert!(m.clean());
        m.check_contraction(0.6, 0.5, 1.0, 0.0);
        assert_eq!(m.contraction_violations, 1);
        m.check_norm(false);
        assert_eq!(m.norm_violations, 1);
    }
}
