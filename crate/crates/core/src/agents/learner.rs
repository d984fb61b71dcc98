use rand::Rng;

use super::policy::{max_among, select_action};
use super::{Strategy, Transition};
use crate::env::{ActionSet, MetaAction, N_ACTIONS};
use crate::error::Result;
use crate::neural::{Adam, ForwardCache, Mlp};

/// Value of the successor state used in the bootstrap target.
pub fn state_value(strategy: Strategy, q: &[f64], admissible: &ActionSet, safe: &ActionSet) -> f64 {
    let candidates = if strategy.is_masked() {
        let s = admissible.intersect(safe);
        if s.is_empty() {
            *admissible
        } else {
            s
        }
    } else {
        *admissible
    };
    // for the robust variant the shaped maximum equals the best safe raw value
    max_among(q, &candidates).unwrap_or(0.0)
}

/// Regression target for an unsafe pair: the lowest safe raw value minus one.
pub fn unsafe_pair_target(q: &[f64], safe: &ActionSet) -> f64 {
    safe.iter().map(|a| q[a.index()]).fold(f64::INFINITY, f64::min) - 1.0
}

/// `r` for terminal transitions, `r + gamma * V(s')` otherwise.
pub fn compute_targets(strategy: Strategy, net: &Mlp<f64>, batch: &[&Transition], gamma: f64) -> Result<Vec<f64>> {
    let mut cache = ForwardCache::default();
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                return Ok(t.r);
            }
            let q = net.forward_cached(&t.s_next, &mut cache)?;
            Ok(t.r + gamma * state_value(strategy, q, &t.admissible_next, &t.safe_next))
        })
        .collect()
}

/// Actions at `s` that are admissible but outside the safe set.
fn unsafe_actions(t: &Transition) -> impl Iterator<Item = MetaAction> + '_ {
    t.admissible.iter().filter(|a| !t.safe.contains(*a))
}

/// Q-network, optimizer and scratch buffers of one learner.
#[derive(Debug, Clone)]
pub struct Agent {
    pub strategy: Strategy,
    pub net: Mlp<f64>,
    pub opt: Adam<f64>,
    pub gamma: f64,
    caches: Vec<ForwardCache<f64>>,
    grads: Vec<f64>,
    skipped_updates: usize,
}

impl Agent {
    pub fn new(strategy: Strategy, net: Mlp<f64>, alpha: f64, gamma: f64) -> Self {
        let n = net.n_params();
        Agent {
            strategy,
            opt: Adam::new(n, alpha),
            net,
            gamma,
            caches: Vec::new(),
            grads: vec![0.0; n],
            skipped_updates: 0,
        }
    }

    pub fn q_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.net.forward(x)
    }

    pub fn act<R: Rng + ?Sized>(&self, x: &[f64], admissible: &ActionSet, safe: &ActionSet, epsilon: f64, rng: &mut R) -> Result<MetaAction> {
        let q = self.q_values(x)?;
        select_action(self.strategy, &q, admissible, safe, epsilon, rng)
    }

    /// Updates rejected because of non-finite values.
    pub fn skipped_updates(&self) -> usize {
        self.skipped_updates
    }

    /// Mean squared error over the taken-action outputs of `batch`, plus for the
    /// robust variant one term per unsafe pair at `s`. Applies one Adam update
    /// and returns the pre-update loss, or `None` if the update was skipped.
    pub fn train_step(&mut self, batch: &[&Transition]) -> Result<Option<f64>> {
        if batch.is_empty() {
            return Ok(None);
        }
        let targets = compute_targets(self.strategy, &self.net, batch, self.gamma)?;
        if self.caches.len() < batch.len() {
            self.caches.resize_with(batch.len(), ForwardCache::default);
        }
        let shaping = self.strategy == Strategy::RobustQmask;
        let mut errors: Vec<[f64; N_ACTIONS]> = Vec::with_capacity(batch.len());
        let mut terms = 0usize;
        let mut sum_sq = 0.0;
        for ((t, y), cache) in batch.iter().zip(&targets).zip(&mut self.caches) {
            let q = self.net.forward_cached(&t.s, cache)?;
            let mut e = [0.0; N_ACTIONS];
            e[t.a] = q[t.a] - y;
            terms += 1;
            if shaping {
                let low = unsafe_pair_target(q, &t.safe);
                for u in unsafe_actions(t) {
                    e[u.index()] = q[u.index()] - low;
                    terms += 1;
                }
            }
            sum_sq += e.iter().map(|v| v * v).sum::<f64>();
            errors.push(e);
        }
        let loss = sum_sq / terms as f64;
        if !loss.is_finite() {
            log::warn!("non-finite loss at step {}; update skipped", self.net.step);
            self.skipped_updates += 1;
            return Ok(None);
        }
        self.grads.iter_mut().for_each(|g| *g = 0.0);
        let scale = 2.0 / terms as f64;
        for (e, cache) in errors.iter().zip(&mut self.caches) {
            let grad_out: Vec<f64> = e.iter().map(|v| v * scale).collect();
            self.net.backward(cache, &grad_out, &mut self.grads)?;
        }
        if let Err(err) = self.opt.step(self.net.params_mut(), &self.grads) {
            log::warn!("optimizer rejected update at step {}: {err}", self.net.step);
            self.skipped_updates += 1;
            return Ok(None);
        }
        self.net.step += 1;
        Ok(Some(loss))
    }
}
