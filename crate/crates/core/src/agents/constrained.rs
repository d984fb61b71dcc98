use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstrainedConfig {
    /// Dual ascent step size.
    pub eta: f64,
    pub initial_lambda: f64,
    /// Tolerated leader-side penetration (m).
    pub leader_bound: f64,
    /// Tolerated follower-side penetration (m).
    pub follower_bound: f64,
}

impl Default for ConstrainedConfig {
    fn default() -> Self {
        Self {
            eta: 0.05,
            initial_lambda: 0.1,
            leader_bound: 0.0,
            follower_bound: 0.0,
        }
    }
}

impl ConstrainedConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("constrained.eta", self.eta),
            ("constrained.initial_lambda", self.initial_lambda),
            ("constrained.leader_bound", self.leader_bound),
            ("constrained.follower_bound", self.follower_bound),
        ];
        for (path, v) in checks {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(path, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Lagrange multipliers for inequality constraints `c_i <= C_i`. An equality
/// constraint is expressed as the pair `c <= C`, `-c <= -C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedState {
    pub lambdas: Vec<f64>,
    pub bounds: Vec<f64>,
    pub eta: f64,
}

impl ConstrainedState {
    pub fn new(bounds: Vec<f64>, initial_lambda: f64, eta: f64) -> Self {
        ConstrainedState {
            lambdas: vec![initial_lambda.max(0.0); bounds.len()],
            bounds,
            eta,
        }
    }

    /// Leader and follower penetration constraints.
    pub fn from_config(cfg: &ConstrainedConfig) -> Self {
        Self::new(vec![cfg.leader_bound, cfg.follower_bound], cfg.initial_lambda, cfg.eta)
    }

    pub fn lambda_norm(&self) -> f64 {
        self.lambdas.iter().map(|l| l * l).sum::<f64>().sqrt()
    }

    /// Per-constraint excess `c_i - C_i` for one set of constraint values.
    pub fn excess(&self, values: &[f64]) -> Vec<f64> {
        values.iter().zip(&self.bounds).map(|(c, b)| c - b).collect()
    }
}

/// `r - sum_i lambda_i * max(0, c_i - C_i)`.
pub fn constrained_shaped_reward(r: f64, values: &[f64], cs: &ConstrainedState) -> f64 {
    let penalty: f64 = values
        .iter()
        .zip(&cs.bounds)
        .zip(&cs.lambdas)
        .map(|((c, b), l)| l * (c - b).max(0.0))
        .sum();
    r - penalty
}

/// Projected dual ascent: `lambda_i <- max(0, lambda_i + eta * avg_excess_i)`.
pub fn dual_update(cs: &mut ConstrainedState, avg_excess: &[f64]) {
    for (l, v) in cs.lambdas.iter_mut().zip(avg_excess) {
        *l = (*l + cs.eta * v).max(0.0);
    }
}
