use std::path::Path;
use std::process::{Command, Output};

use highway_core::sim::{RoadConfig, Scene, SceneSnapshot, TrafficConfig};

const TINY: &str = r#"
strategy = "qmask"
seeds = [1, 2]
[train]
episodes = 3
eval_episodes = 2
iterations_per_update = 2
batch_size = 8
buffer_capacity = 30
[network]
hidden = [10]
"#;

fn highway(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_highway")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn train_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tiny.toml", TINY);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let stdout = ok(&highway(&["train", "--config", &cfg, "--seed", "7", "--out", out.to_str().unwrap()]));
        assert!(stdout.contains("plateau_episode"));
    }
    let log_a = std::fs::read(a.join("train_log.csv")).unwrap();
    assert_eq!(log_a, std::fs::read(b.join("train_log.csv")).unwrap());
    let text = String::from_utf8(log_a).unwrap();
    assert!(text.starts_with("episode,epsilon,total_reward,steps,collision,loss_mean,lambda_norm\n"));
    assert_eq!(text.lines().count(), 4);

    let ckpt = a.join("checkpoint.txt");
    let traces = dir.path().join("traces");
    let stdout = ok(&highway(&[
        "eval",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--config",
        &cfg,
        "--episodes",
        "2",
        "--trace-dir",
        traces.to_str().unwrap(),
    ]));
    assert_eq!(stdout.lines().count(), 3);
    let trace = std::fs::read_to_string(traces.join("trace_000.csv")).unwrap();
    assert!(trace.starts_with("step,action,reward,ego_v,ego_lane,collision,terminal\n"));

    let empty = ok(&highway(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--config", &cfg, "--episodes", "0"]));
    assert_eq!(empty.lines().count(), 1);

    // checkpoint and default-sized network disagree
    let default_cfg = write(dir.path(), "default.toml", "");
    let out = highway(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--config", &default_cfg, "--episodes", "1"]);
    assert!(!out.status.success());
}

#[test]
fn config_errors_are_reported_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[train]\ngamma = 1.5\n");
    let out = highway(&["train", "--config", &cfg, "--seed", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("train.gamma"));
}

#[test]
fn check_scene_prints_both_masks() {
    let dir = tempfile::tempdir().unwrap();
    let scene = Scene::<f64>::generate(RoadConfig::default(), TrafficConfig::default(), 11).unwrap();
    let snap = write(dir.path(), "scene.csv", &SceneSnapshot::of(&scene).to_text());
    let stdout = ok(&highway(&["check-scene", "--snapshot", &snap]));
    assert!(stdout.contains("mode basic"));
    assert!(stdout.contains("mode robust"));
    let robust = ok(&highway(&["check-scene", "--snapshot", &snap, "--mode", "robust"]));
    assert!(!robust.contains("mode basic"));

    let bad = write(dir.path(), "bad.csv", "id,x,y,v,psi,lane,is_ego\n0,1\n");
    assert!(!highway(&["check-scene", "--snapshot", &bad]).status.success());
}

#[test]
fn compare_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.toml", TINY);
    let b = write(dir.path(), "b.toml", &TINY.replace("qmask", "traditional"));
    let out = dir.path().join("cmp");
    let stdout = ok(&highway(&["compare", "--configs", &a, &b, "--out", out.to_str().unwrap()]));
    assert!(stdout.contains("episodes to plateau"));
    for f in ["curve_qmask.csv", "curve_traditional.csv", "plateau.csv", "summary.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!highway(&["compare", "--configs", &a, "--out", out.to_str().unwrap()]).status.success());
}

#[test]
fn shipped_configs_and_readme_example_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    for entry in std::fs::read_dir(root.join("configs")).unwrap() {
        let path = entry.unwrap().path();
        highway_core::harness::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
    let readme = std::fs::read_to_string(root.join("README.md")).unwrap();
    let block = readme.split("```toml\n").nth(1).unwrap().split("```").next().unwrap();
    let cfg = highway_core::harness::parse_config(block).unwrap();
    assert_eq!(cfg.label, "robust");
}
