use super::*;
use crate::agents::Strategy;
use crate::error::Error;

fn tiny(strategy: &str) -> ExperimentConfig {
    parse_config(&format!(
        r#"
strategy = "{strategy}"
seeds = [3, 4]
[train]
episodes = 4
eval_episodes = 2
iterations_per_update = 3
batch_size = 8
buffer_capacity = 40
[network]
hidden = [12]
"#
    ))
    .unwrap()
}

fn config_path(text: &str) -> String {
    match parse_config(text).unwrap_err() {
        Error::Config { path, .. } => path,
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn empty_file_gives_defaults() {
    let cfg = parse_config("").unwrap();
    assert_eq!(cfg.train.gamma, 0.99);
    assert_eq!(cfg.train.alpha, 0.01);
    assert_eq!(cfg.train.batch_size, 50);
    assert_eq!(cfg.network.dims(), vec![26, 100, 100, 5]);
    assert_eq!(cfg.strategy, Strategy::RobustQmask);
    assert_eq!(cfg, ExperimentConfig::default());
}

#[test]
fn config_errors_carry_key_path() {
    assert_eq!(config_path("[train]\ngamma = 1.5\n"), "train.gamma");
    assert_eq!(config_path("[train]\ngama = 0.5\n"), "train.gama");
    assert_eq!(config_path("bogus = 1\n"), "bogus");
    assert_eq!(config_path("[safety]\nhorizon = \"long\"\n"), "safety.horizon");
    assert_eq!(config_path("strategy = \"qmask\"\n[safety]\nmode = \"robust\"\n"), "safety.mode");
    assert_eq!(config_path("strategy = \"traditional\"\n[safety]\nmode = \"basic\"\n"), "safety.mode");
    assert_eq!(config_path("strategy = \"qmask\"\n[reward]\nmode = \"traditional\"\n"), "reward.mode");
    assert_eq!(config_path("seeds = []\n"), "seeds");
    let msg = parse_config("[train]\ngama = 0.5\n").unwrap_err().to_string();
    assert!(msg.contains("gama"), "{msg}");
}

#[test]
fn episode_seeds_are_disjoint() {
    let mut all = std::collections::HashSet::new();
    for run in 0..5 {
        for eval in [false, true] {
            for ep in 0..200 {
                assert!(all.insert(episode_seed(run, eval, ep)));
            }
        }
    }
}

#[test]
fn moving_average_and_plateau_by_hand() {
    assert_eq!(moving_average(&[1.0, 3.0, 5.0, 7.0], 2), vec![1.0, 2.0, 4.0, 6.0]);
    // windows of 2: [2, 4, 6, 6]; min 2, final 6, threshold 5.6 first reached at index 3
    assert_eq!(plateau_episode(&[0.0, 4.0, 4.0, 8.0, 4.0], 2, 0.9), Some(3));
    assert_eq!(plateau_episode(&[1.0], 2, 0.9), None);
    assert_eq!(min_max_scale(&[2.0, 4.0, 3.0]), vec![0.0, 1.0, 0.5]);
    assert_eq!(min_max_scale(&[2.0, 2.0]), vec![0.0, 0.0]);
}

#[test]
fn ranks_share_ties() {
    assert_eq!(rank_row(&[30.0, 10.0, 20.0]), vec![3.0, 1.0, 2.0]);
    assert_eq!(rank_row(&[5.0, 5.0, 1.0]), vec![2.5, 2.5, 1.0]);
    assert_eq!(report::median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(report::median(&[4.0, 1.0]), Some(2.5));
    assert_eq!(report::median(&[]), None);
}

#[test]
fn training_is_deterministic_and_complete() {
    let cfg = tiny("qmask");
    let a = train(&cfg, 3).unwrap();
    let b = train(&cfg, 3).unwrap();
    assert_eq!(a.log.len(), 4);
    assert_eq!(a.log, b.log);
    assert_eq!(a.net, b.net);
    assert!(a.log.iter().all(|r| r.lambda_norm.is_none()));
    let c = train(&cfg, 4).unwrap();
    assert_ne!(a.log, c.log);
}

#[test]
fn constrained_logs_lambda() {
    let o = train(&tiny("constrained"), 3).unwrap();
    assert!(o.log.iter().all(|r| r.lambda_norm.is_some()));
    assert!(o.constrained.is_some());
}

#[test]
fn eval_zero_episodes_is_empty() {
    let cfg = tiny("traditional");
    let net = init_network(&cfg, 1).unwrap();
    let (m, traces) = evaluate(&cfg, &net, 1, 0).unwrap();
    assert!(m.rows.is_empty());
    assert!(traces.is_empty());
    assert_eq!(m.mean_reward_before_collision(), None);
}

#[test]
fn eval_rejects_mismatched_network() {
    let cfg = tiny("traditional");
    let other = ExperimentConfig::default();
    let net = init_network(&other, 1).unwrap();
    assert!(matches!(evaluate(&cfg, &net, 1, 1), Err(Error::Checkpoint(_))));
}

#[test]
fn eval_invariant_to_checkpoint_round_trip() {
    let cfg = tiny("robust_qmask");
    let dir = tempfile::tempdir().unwrap();
    let o = train_to_dir(&cfg, 3, dir.path()).unwrap();
    for f in [TRAIN_LOG_FILE, CHECKPOINT_FILE, SUMMARY_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let loaded = crate::neural::checkpoint::load::<f64>(&dir.path().join(CHECKPOINT_FILE)).unwrap();
    let (m1, t1) = evaluate(&cfg, &o.net, 3, 3).unwrap();
    let (m2, t2) = evaluate(&cfg, &loaded, 3, 3).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(t1, t2);
    for r in &m1.rows {
        if let Some(t) = r.time_to_collision {
            assert_eq!(t, r.steps as f64 * cfg.env.policy_period);
            assert!(t <= cfg.env.episode_duration);
        }
    }
}

#[test]
fn compare_identical_strategies_gives_identical_columns() {
    let cfg = tiny("qmask");
    let dir = tempfile::tempdir().unwrap();
    let report = compare_strategies(&[cfg.clone(), cfg], dir.path()).unwrap();
    assert_eq!(report.strategies[1].label, "qmask_2");
    let a = std::fs::read_to_string(dir.path().join("curve_qmask.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("curve_qmask_2.csv")).unwrap();
    assert_eq!(a, b);
    for row in &report.ranks {
        assert_eq!(row[0], row[1]);
    }
    for f in ["plateau.csv", "collisions.csv", "reward_before_collision.csv", "time_to_collision.csv", "summary.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn compare_rejects_mismatched_environment() {
    let a = tiny("qmask");
    let mut b = tiny("traditional");
    b.env.sensing_range = 80.0;
    let dir = tempfile::tempdir().unwrap();
    assert!(compare_strategies(&[a.clone(), b], dir.path()).is_err());
    assert!(compare_strategies(&[a], dir.path()).is_err());
}
