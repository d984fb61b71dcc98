use serde::{Deserialize, Serialize};

use crate::records::CsvRecord;

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    pub episode: usize,
    pub epsilon: f64,
    pub total_reward: f64,
    pub steps: usize,
    pub collision: bool,
    /// Mean loss over the update that followed the episode.
    pub loss_mean: Option<f64>,
    /// Norm of the Lagrange multipliers (constrained strategy only).
    pub lambda_norm: Option<f64>,
}

impl CsvRecord for TrainLogRow {
    const HEADER: &'static [&'static str] = &["episode", "epsilon", "total_reward", "steps", "collision", "loss_mean", "lambda_norm"];
}

/// One evaluation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub episode: usize,
    pub total_reward: f64,
    /// Reward accrued strictly before the colliding step (whole episode if none).
    pub reward_before_collision: f64,
    pub steps: usize,
    pub collision: bool,
    /// Elapsed time at the colliding step, a multiple of the policy period.
    pub time_to_collision: Option<f64>,
}

impl CsvRecord for EvalRow {
    const HEADER: &'static [&'static str] = &[
        "episode",
        "total_reward",
        "reward_before_collision",
        "steps",
        "collision",
        "time_to_collision",
    ];
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalMetrics {
    pub rows: Vec<EvalRow>,
}

impl EvalMetrics {
    pub fn collisions(&self) -> usize {
        self.rows.iter().filter(|r| r.collision).count()
    }

    pub fn mean_reward_before_collision(&self) -> Option<f64> {
        if self.rows.is_empty() {
            return None;
        }
        Some(self.rows.iter().map(|r| r.reward_before_collision).sum::<f64>() / self.rows.len() as f64)
    }

    /// Time-to-collision column for the first `n` episodes, "-" when none.
    pub fn ttc_column(&self, n: usize) -> Vec<String> {
        self.rows
            .iter()
            .take(n)
            .map(|r| r.time_to_collision.map_or("-".to_string(), |t| format!("{t}")))
            .collect()
    }
}

/// Trailing moving average; entry `t` averages episodes `t + 1 - window ..= t`
/// (fewer at the start).
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (t, v) in values.iter().enumerate() {
        sum += v;
        if t >= window {
            sum -= values[t - window];
        }
        out.push(sum / (t + 1).min(window) as f64);
    }
    out
}

/// First episode whose trailing moving average covers `frac` of the way from
/// the lowest moving average to the final one. Only full windows count.
pub fn plateau_episode(rewards: &[f64], window: usize, frac: f64) -> Option<usize> {
    let window = window.max(1);
    if rewards.len() < window {
        return None;
    }
    let ma = moving_average(rewards, window);
    let full = &ma[window - 1..];
    let last = *full.last()?;
    let low = full.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = low + frac * (last - low);
    full.iter().position(|m| *m >= threshold - 1e-12).map(|i| i + window - 1)
}

/// Min-max scaling into `[0, 1]`; a constant series maps to zeros.
pub fn min_max_scale(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}
