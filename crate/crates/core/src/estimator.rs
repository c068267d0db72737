//! Uniform sphere directions and the symmetric two-point gradient estimator
//!
//! `g = d / (2μ) · (F(x + μv; ξ) − F(x − μv; ξ)) · v`, which is an unbiased
//! estimate of the gradient of the ball-smoothed objective `f_μ`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::oracle::{OracleError, SampleToken, StochasticObjective};
use crate::rng::AgentRng;

/// Relative slack for the `‖g‖ ≤ L·d` check.
pub const NORM_BOUND_SLACK: f64 = 1e-9;

/// A unit vector in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `v`; `None` for the zero vector or non-finite input.
    pub fn normalized(mut v: Vec<f64>) -> Option<Self> {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        Some(Self(v))
    }

    /// Basis vector `e_i` in `ℝ^d`.
    pub fn axis(d: usize, i: usize) -> Self {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|a| -a).collect())
    }
}

/// Draws `v ~ Unif(S^{d−1})` by normalizing a standard Gaussian vector.
pub fn sample_sphere(d: usize, rng: &mut AgentRng) -> Direction {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(dir) = Direction::normalized(v) {
            return dir;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub g: Vec<f64>,
    /// `F(x + μv; ξ) − F(x − μv; ξ)`.
    pub difference: f64,
    pub direction: Direction,
}

impl GradientEstimate {
    pub fn norm(&self) -> f64 {
        self.g.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.g.iter().map(|a| a * a).sum()
    }

    /// `‖g‖ ≤ L·d`, up to [`NORM_BOUND_SLACK`].
    pub fn within_norm_bound(&self, lipschitz: f64) -> bool {
        let bound = lipschitz * self.g.len() as f64;
        self.norm() <= bound * (1.0 + NORM_BOUND_SLACK) + NORM_BOUND_SLACK
    }
}

/// Two-point estimate along a given direction and sample.
pub fn estimate_along<O: StochasticObjective + ?Sized>(
    obj: &O,
    x: &[f64],
    mu: f64,
    direction: &Direction,
    xi: &SampleToken,
) -> Result<GradientEstimate, OracleError> {
    if !(mu > 0.0) {
        return Err(OracleError::BadParameter(format!("smoothing radius must be positive, got {mu}")));
    }
    let (plus, minus) = obj.two_point(x, mu, direction.as_slice(), xi)?;
    let difference = plus - minus;
    let scale = direction.dim() as f64 / (2.0 * mu) * difference;
    let g = direction.as_slice().iter().map(|v| scale * v).collect();
    Ok(GradientEstimate { g, difference, direction: direction.clone() })
}

/// Draws `ξ` then `v` from `rng` (in that order) and returns the estimate.
pub fn estimate_gradient<O: StochasticObjective + ?Sized>(
    obj: &O,
    x: &[f64],
    mu: f64,
    rng: &mut AgentRng,
) -> Result<GradientEstimate, OracleError> {
    let xi = obj.sample(rng);
    let v = sample_sphere(obj.dim(), rng);
    let est = estimate_along(obj, x, mu, &v, &xi)?;
    debug_assert!(
        est.within_norm_bound(obj.lipschitz()),
        "‖g‖ = {} exceeds L·d = {}",
        est.norm(),
        obj.lipschitz() * obj.dim() as f64
    );
    Ok(est)
}
