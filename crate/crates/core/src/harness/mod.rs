//! Experiment configuration, training and evaluation loops, and reports.

mod config;
mod metrics;
pub(crate) mod report;
mod run;
#[cfg(test)]
mod tests;

use std::path::Path;

pub use config::{load_config, parse_config, ExperimentConfig, ExperimentFile, NetworkConfig, RewardSection, SafetySection};
pub use metrics::{min_max_scale, moving_average, plateau_episode, EvalMetrics, EvalRow, TrainLogRow};
pub use report::{compare_strategies, rank_row, CompareReport, StrategyRuns, TABLE_VIEW};
pub use run::{
    episode_seed, evaluate, greedy_action, init_network, train, EpisodeOutcome, TrainOutcome, PLATEAU_FRACTION,
    PLATEAU_WINDOW,
};

use crate::error::{Error, Result};
use crate::neural::checkpoint;
use crate::records::write_records_file;

pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Trains and writes the log, checkpoint and convergence summary into `out`.
/// On a failed run the partial log is kept and the error is returned.
pub fn train_to_dir(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<TrainOutcome> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let outcome = train(cfg, seed)?;
    write_records_file(&outcome.log, &out.join(TRAIN_LOG_FILE))?;
    checkpoint::save(&outcome.net, &out.join(CHECKPOINT_FILE))?;
    let summary = training_summary(cfg, &outcome);
    let path = out.join(SUMMARY_FILE);
    std::fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;
    Ok(outcome)
}

pub fn training_summary(cfg: &ExperimentConfig, o: &TrainOutcome) -> String {
    let collisions = o.log.iter().filter(|r| r.collision).count();
    let plateau = o.plateau.map_or("-".to_string(), |p| p.to_string());
    let final_ma = moving_average(&o.log.iter().map(|r| r.total_reward).collect::<Vec<_>>(), PLATEAU_WINDOW)
        .last()
        .copied()
        .unwrap_or(0.0);
    let mut s = format!(
        "label: {}\nstrategy: {}\nseed: {}\nepisodes: {}\ntraining_collisions: {}\nfinal_moving_average: {:.6}\nplateau_episode: {}\nfallback_steps: {}\n",
        cfg.label,
        cfg.strategy.name(),
        o.seed,
        o.log.len(),
        collisions,
        final_ma,
        plateau,
        o.fallback_steps
    );
    if let Some(c) = &o.constrained {
        s.push_str(&format!("lambda: {:?}\n", c.lambdas));
    }
    s
}
