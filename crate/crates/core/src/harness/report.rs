use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::metrics::{min_max_scale, moving_average};
use super::run::{evaluate, train, TrainOutcome, PLATEAU_WINDOW};
use super::{EvalMetrics, ExperimentConfig};
use crate::agents::Strategy;
use crate::error::{Error, Result};
use crate::records::{write_records_file, CsvRecord};

/// Number of leading eval episodes shown in the time-to-collision table.
pub const TABLE_VIEW: usize = 7;

/// Completed runs of one configuration, one entry per seed.
#[derive(Debug, Clone)]
pub struct StrategyRuns {
    pub label: String,
    pub strategy: Strategy,
    pub runs: Vec<(TrainOutcome, EvalMetrics)>,
}

impl StrategyRuns {
    pub fn seeds(&self) -> Vec<u64> {
        self.runs.iter().map(|(t, _)| t.seed).collect()
    }

    fn run(&self, seed: u64) -> Option<&(TrainOutcome, EvalMetrics)> {
        self.runs.iter().find(|(t, _)| t.seed == seed)
    }

    /// Plateau episode per run, counting a run that never settles as the
    /// episode count.
    pub fn plateaus(&self) -> Vec<usize> {
        self.runs
            .iter()
            .map(|(t, _)| t.plateau.unwrap_or(t.log.len()))
            .collect()
    }

    pub fn median_plateau(&self) -> Option<f64> {
        median(&self.plateaus().iter().map(|&p| p as f64).collect::<Vec<_>>())
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Ranks (1 = smallest) with ties sharing the mean of their positions.
pub fn rank_row(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Serialize)]
struct CurveRow {
    episode: usize,
    seed: u64,
    total_reward: f64,
    moving_average: f64,
    scaled: f64,
}

#[derive(Serialize)]
struct PlateauRow<'a> {
    label: &'a str,
    seed: u64,
    plateau_episode: usize,
    rank: f64,
}

#[derive(Serialize)]
struct CollisionRow<'a> {
    label: &'a str,
    seed: u64,
    eval_episodes: usize,
    eval_collisions: usize,
    training_collisions: usize,
}

#[derive(Serialize)]
struct RewardBeforeRow<'a> {
    label: &'a str,
    seed: u64,
    mean_reward_before_collision: Option<f64>,
}

#[derive(Serialize)]
struct TtcRow<'a> {
    label: &'a str,
    seed: u64,
    episode: usize,
    time_to_collision: String,
}

impl CsvRecord for CurveRow {
    const HEADER: &'static [&'static str] = &["episode", "seed", "total_reward", "moving_average", "scaled"];
}

impl CsvRecord for PlateauRow<'_> {
    const HEADER: &'static [&'static str] = &["label", "seed", "plateau_episode", "rank"];
}

impl CsvRecord for CollisionRow<'_> {
    const HEADER: &'static [&'static str] = &["label", "seed", "eval_episodes", "eval_collisions", "training_collisions"];
}

impl CsvRecord for RewardBeforeRow<'_> {
    const HEADER: &'static [&'static str] = &["label", "seed", "mean_reward_before_collision"];
}

impl CsvRecord for TtcRow<'_> {
    const HEADER: &'static [&'static str] = &["label", "seed", "episode", "time_to_collision"];
}

/// Cross-strategy comparison assembled from completed runs.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub strategies: Vec<StrategyRuns>,
    /// Seeds present in every strategy, in the order of the first one.
    pub common_seeds: Vec<u64>,
    /// `ranks[s][k]`: plateau rank of strategy `k` on `common_seeds[s]`.
    pub ranks: Vec<Vec<f64>>,
}

impl CompareReport {
    pub fn from_runs(strategies: Vec<StrategyRuns>) -> Self {
        let common_seeds: Vec<u64> = strategies
            .first()
            .map(|f| f.seeds())
            .unwrap_or_default()
            .into_iter()
            .filter(|s| strategies.iter().all(|st| st.run(*s).is_some()))
            .collect();
        let ranks = common_seeds
            .iter()
            .map(|&seed| {
                let row: Vec<f64> = strategies
                    .iter()
                    .map(|st| {
                        let (t, _) = st.run(seed).expect("seed is common");
                        t.plateau.unwrap_or(t.log.len()) as f64
                    })
                    .collect();
                rank_row(&row)
            })
            .collect();
        CompareReport {
            strategies,
            common_seeds,
            ranks,
        }
    }

    pub fn find(&self, label: &str) -> Option<&StrategyRuns> {
        self.strategies.iter().find(|s| s.label == label)
    }

    fn rank_of(&self, strategy: usize, seed: u64) -> Option<f64> {
        let s = self.common_seeds.iter().position(|&c| c == seed)?;
        Some(self.ranks[s][strategy])
    }

    /// Writes curve, plateau, collision, reward and time-to-collision CSVs and
    /// a plain-text summary into `out`.
    pub fn write(&self, out: &Path) -> Result<()> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        for st in &self.strategies {
            let mut rows = Vec::new();
            for (t, _) in &st.runs {
                let rewards: Vec<f64> = t.log.iter().map(|r| r.total_reward).collect();
                let ma = moving_average(&rewards, PLATEAU_WINDOW);
                let scaled = min_max_scale(&ma);
                for (e, r) in rewards.iter().enumerate() {
                    rows.push(CurveRow {
                        episode: e,
                        seed: t.seed,
                        total_reward: *r,
                        moving_average: ma[e],
                        scaled: scaled[e],
                    });
                }
            }
            write_records_file(&rows, &out.join(format!("curve_{}.csv", st.label)))?;
        }

        let mut plateau = Vec::new();
        let mut collisions = Vec::new();
        let mut reward_before = Vec::new();
        let mut ttc = Vec::new();
        for (k, st) in self.strategies.iter().enumerate() {
            for (t, m) in &st.runs {
                if let Some(rank) = self.rank_of(k, t.seed) {
                    plateau.push(PlateauRow {
                        label: &st.label,
                        seed: t.seed,
                        plateau_episode: t.plateau.unwrap_or(t.log.len()),
                        rank,
                    });
                }
                collisions.push(CollisionRow {
                    label: &st.label,
                    seed: t.seed,
                    eval_episodes: m.rows.len(),
                    eval_collisions: m.collisions(),
                    training_collisions: t.log.iter().filter(|r| r.collision).count(),
                });
                reward_before.push(RewardBeforeRow {
                    label: &st.label,
                    seed: t.seed,
                    mean_reward_before_collision: m.mean_reward_before_collision(),
                });
                for (e, v) in m.ttc_column(m.rows.len()).into_iter().enumerate() {
                    ttc.push(TtcRow {
                        label: &st.label,
                        seed: t.seed,
                        episode: e,
                        time_to_collision: v,
                    });
                }
            }
        }
        write_records_file(&plateau, &out.join("plateau.csv"))?;
        write_records_file(&collisions, &out.join("collisions.csv"))?;
        write_records_file(&reward_before, &out.join("reward_before_collision.csv"))?;
        write_records_file(&ttc, &out.join("time_to_collision.csv"))?;
        let path = out.join("summary.txt");
        std::fs::write(&path, self.summary()).map_err(|e| Error::io(&path, e))
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let labels: Vec<&str> = self.strategies.iter().map(|st| st.label.as_str()).collect();
        let _ = writeln!(s, "episodes to plateau (rank in parentheses)");
        let _ = writeln!(s, "{:>8} {}", "seed", labels.iter().map(|l| format!("{l:>22}")).collect::<String>());
        for (i, seed) in self.common_seeds.iter().enumerate() {
            let cells: String = self
                .strategies
                .iter()
                .enumerate()
                .map(|(k, st)| {
                    let (t, _) = st.run(*seed).expect("seed is common");
                    format!("{:>22}", format!("{} ({})", t.plateau.unwrap_or(t.log.len()), self.ranks[i][k]))
                })
                .collect();
            let _ = writeln!(s, "{seed:>8} {cells}");
        }
        let medians: String = self
            .strategies
            .iter()
            .map(|st| format!("{:>22}", st.median_plateau().map_or("-".into(), |m| format!("{m}"))))
            .collect();
        let _ = writeln!(s, "{:>8} {medians}", "median");

        let _ = writeln!(s, "\neval collisions / episodes, mean reward before collision");
        for st in &self.strategies {
            for (t, m) in &st.runs {
                let _ = writeln!(
                    s,
                    "{:>22} seed {:>4}: {}/{}  {}",
                    st.label,
                    t.seed,
                    m.collisions(),
                    m.rows.len(),
                    m.mean_reward_before_collision().map_or("-".into(), |r| format!("{r:.3}"))
                );
            }
        }

        let _ = writeln!(s, "\ntime to collision, first {TABLE_VIEW} eval episodes");
        for st in &self.strategies {
            for (t, m) in &st.runs {
                let _ = writeln!(s, "{:>22} seed {:>4}: {}", st.label, t.seed, m.ttc_column(TABLE_VIEW).join(", "));
            }
        }
        s
    }
}

/// Trains and evaluates every configuration on each of its seeds, then writes
/// the comparison into `out`.
pub fn compare_strategies(cfgs: &[ExperimentConfig], out: &Path) -> Result<CompareReport> {
    if cfgs.len() < 2 {
        return Err(Error::validation("comparison needs at least two configurations"));
    }
    for c in &cfgs[1..] {
        if !cfgs[0].same_environment(c) {
            return Err(Error::validation(format!(
                "configuration `{}` uses different environment settings than `{}`",
                c.label, cfgs[0].label
            )));
        }
    }
    let mut labels: Vec<String> = Vec::new();
    let mut strategies = Vec::new();
    for cfg in cfgs {
        let mut label = cfg.label.clone();
        let mut n = 2;
        while labels.contains(&label) {
            label = format!("{}_{n}", cfg.label);
            n += 1;
        }
        labels.push(label.clone());
        let mut runs = Vec::new();
        for &seed in &cfg.seeds {
            log::info!("training {label} seed {seed}");
            let t = train(cfg, seed)?;
            let (m, _) = evaluate(cfg, &t.net, seed, cfg.train.eval_episodes)?;
            runs.push((t, m));
        }
        strategies.push(StrategyRuns {
            label,
            strategy: cfg.strategy,
            runs,
        });
    }
    let report = CompareReport::from_runs(strategies);
    report.write(out)?;
    Ok(report)
}
