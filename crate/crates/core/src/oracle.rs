//! Stochastic local objectives `F_i(x; ξ)` with same-sample two-point queries.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::data::{max_feature_norm, Dataset, Sample};
use crate::rng::AgentRng;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("agent shard is empty")]
    EmptyShard,
    #[error("no objectives given")]
    NoObjectives,
    #[error("invalid objective parameter: {0}")]
    BadParameter(String),
}

/// The randomness `ξ` of one oracle draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleToken {
    /// Index into the agent's local shard.
    Index(usize),
    /// Additive zero-mean noise value.
    Noise(f64),
}

/// A convex, Lipschitz stochastic objective queried by value only.
pub trait StochasticObjective: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;

    /// Lipschitz constant of `x ↦ F(x; ξ)`, uniform over `ξ`.
    fn lipschitz(&self) -> f64;

    /// Draws a fresh `ξ` from the caller's stream.
    fn sample(&self, rng: &mut AgentRng) -> SampleToken;

    /// `F(x; ξ)`. `x` must have length [`dim`](Self::dim).
    fn eval(&self, x: &[f64], xi: &SampleToken) -> f64;

    /// The local objective `f_i(x) = E_ξ F(x; ξ)`, evaluated exactly.
    fn mean_value(&self, x: &[f64]) -> f64;

    /// A subgradient of `f_i` at `x`. Only observers (the reference solver)
    /// use this; the optimization drivers never do.
    fn mean_subgradient(&self, x: &[f64]) -> Vec<f64>;

    /// `(F(x + μv; ξ), F(x − μv; ξ))` with one shared `ξ`.
    fn two_point(&self, x: &[f64], mu: f64, v: &[f64], xi: &SampleToken) -> Result<(f64, f64), OracleError> {
        let d = self.dim();
        for len in [x.len(), v.len()] {
            if len != d {
                return Err(OracleError::DimensionMismatch { expected: d, got: len });
            }
        }
        let plus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + mu * b).collect();
        let minus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - mu * b).collect();
        Ok((self.eval(&plus, xi), self.eval(&minus, xi)))
    }
}

/// Hinge loss `max{0, 1 − b⟨a, x⟩}` over one agent's shard, `ξ` uniform on the shard.
#[derive(Debug, Clone)]
pub struct HingeObjective {
    data: Arc<Dataset>,
    shard: Vec<usize>,
    lipschitz: f64,
}

impl HingeObjective {
    pub fn new(data: Arc<Dataset>, shard: Vec<usize>) -> Result<Self, OracleError> {
        if shard.is_empty() {
            return Err(OracleError::EmptyShard);
        }
        let lipschitz = shard.iter().map(|&i| data.sample(i).norm()).fold(0.0, f64::max);
        Ok(Self { data, shard, lipschitz })
    }

    /// One objective per partition block.
    pub fn for_partition(data: Arc<Dataset>, partition: &crate::data::Partition) -> Result<Vec<Self>, OracleError> {
        partition.blocks().iter().map(|b| Self::new(data.clone(), b.clone())).collect()
    }

    pub fn shard(&self) -> &[usize] {
        &self.shard
    }

    /// Lipschitz constant over the whole dataset rather than this shard.
    pub fn global_lipschitz(&self) -> f64 {
        max_feature_norm(&self.data).unwrap_or(0.0)
    }

    fn loss(sample: &Sample, x: &[f64]) -> f64 {
        (1.0 - sample.label() * sample.dot(x)).max(0.0)
    }
}

impl StochasticObjective for HingeObjective {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn sample(&self, rng: &mut AgentRng) -> SampleToken {
        SampleToken::Index(rng.random_range(0..self.shard.len()))
    }

    fn eval(&self, x: &[f64], xi: &SampleToken) -> f64 {
        match *xi {
            SampleToken::Index(k) => Self::loss(self.data.sample(self.shard[k]), x),
            SampleToken::Noise(_) => panic!("hinge objective expects a shard index token"),
        }
    }

    fn mean_value(&self, x: &[f64]) -> f64 {
        let total: f64 = self.shard.iter().map(|&i| Self::loss(self.data.sample(i), x)).sum();
        total / self.shard.len() as f64
    }

    fn mean_subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for &i in &self.shard {
            let s = self.data.sample(i);
            if 1.0 - s.label() * s.dot(x) > 0.0 {
                for (j, v) in s.features() {
                    g[j] -= s.label() * v;
                }
            }
        }
        let k = self.shard.len() as f64;
        g.iter_mut().for_each(|v| *v /= k);
        g
    }
}

/// Objectives with closed-form optima, plus bounded uniform noise `ξ ∈ [−s, s]`.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticObjective {
    /// `F(x; ξ) = ⟨c, x⟩ + ξ`.
    Linear { coef: Vec<f64>, noise: f64 },
    /// `F(x; ξ) = ‖x − c‖ + ξ`.
    Distance { center: Vec<f64>, noise: f64 },
}

impl SyntheticObjective {
    pub fn linear(coef: Vec<f64>, noise: f64) -> Self {
        assert!(noise >= 0.0);
        Self::Linear { coef, noise }
    }

    pub fn distance(center: Vec<f64>, noise: f64) -> Self {
        assert!(noise >= 0.0);
        Self::Distance { center, noise }
    }

    /// `F ≡ 0`.
    pub fn zero(dim: usize) -> Self {
        Self::Linear { coef: vec![0.0; dim], noise: 0.0 }
    }

    fn noise_scale(&self) -> f64 {
        match self {
            Self::Linear { noise, .. } | Self::Distance { noise, .. } => *noise,
        }
    }
}

impl StochasticObjective for SyntheticObjective {
    fn dim(&self) -> usize {
        match self {
            Self::Linear { coef, .. } => coef.len(),
            Self::Distance { center, .. } => center.len(),
        }
    }

    fn lipschitz(&self) -> f64 {
        match self {
            Self::Linear { coef, .. } => coef.iter().map(|c| c * c).sum::<f64>().sqrt(),
            Self::Distance { .. } => 1.0,
        }
    }

    fn sample(&self, rng: &mut AgentRng) -> SampleToken {
        let s = self.noise_scale();
        // always consume one draw so streams stay aligned across noise levels
        let u: f64 = rng.random();
        SampleToken::Noise(s * (2.0 * u - 1.0))
    }

    fn eval(&self, x: &[f64], xi: &SampleToken) -> f64 {
        let noise = match *xi {
            SampleToken::Noise(v) => v,
            SampleToken::Index(_) => panic!("synthetic objective expects a noise token"),
        };
        self.mean_value(x) + noise
    }

    fn mean_value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Linear { coef, .. } => coef.iter().zip(x).map(|(c, v)| c * v).sum(),
            Self::Distance { center, .. } => center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum::<f64>().sqrt(),
        }
    }

    fn mean_subgradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Linear { coef, .. } => coef.clone(),
            Self::Distance { center, .. } => {
                let r = self.mean_value(x);
                if r == 0.0 {
                    vec![0.0; x.len()]
                } else {
                    x.iter().zip(center).map(|(v, c)| (v - c) / r).collect()
                }
            }
        }
    }
}

/// `f(x) = (1/n) Σ_i f_i(x)`, evaluated exactly.
pub fn full_objective<O: StochasticObjective + ?Sized>(objs: &[Arc<O>], x: &[f64]) -> Result<f64, OracleError> {
    if objs.is_empty() {
        return Err(OracleError::NoObjectives);
    }
    let mut total = 0.0;
    for o in objs {
        if o.dim() != x.len() {
            return Err(OracleError::DimensionMismatch { expected: o.dim(), got: x.len() });
        }
        total += o.mean_value(x);
    }
    Ok(total / objs.len() as f64)
}

/// Shared handle type used by the drivers.
pub type SharedObjective = Arc<dyn StochasticObjective>;

/// Boxes concrete objectives into [`SharedObjective`]s.
pub fn share<O: StochasticObjective + 'static>(objs: Vec<O>) -> Vec<SharedObjective> {
    objs.into_iter().map(|o| Arc::new(o) as SharedObjective).collect()
}
