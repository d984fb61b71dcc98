use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use highway_core::env::write_trace_csv;
use highway_core::harness::{self, load_config, ExperimentConfig, TABLE_VIEW};
use highway_core::neural::checkpoint;
use highway_core::records::write_records;
use highway_core::safety::{mask_actions, SafetyMode};
use highway_core::sim::SceneSnapshot;
use highway_core::{Error, Result};

#[derive(Parser)]
#[command(name = "highway", version, about = "Safe lane-change agents on a simulated highway")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent and write its log, checkpoint and summary.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint greedily; per-episode metrics go to stdout as CSV.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `train.eval_episodes` from the config.
        #[arg(long)]
        episodes: Option<usize>,
        /// Run seed selecting the evaluation scenes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write one trace CSV per episode into this directory.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Train and evaluate several configurations on their seeds and compare them.
    Compare {
        #[arg(long, num_args = 2.., required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the safety check for the ego vehicle of a scene snapshot.
    CheckScene {
        #[arg(long)]
        snapshot: PathBuf,
        /// Road, traffic, environment and safety parameters; defaults if absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Basic,
    Robust,
    Both,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train { config, seed, out } => {
            let cfg = load_config(&config)?;
            let outcome = harness::train_to_dir(&cfg, seed, &out)?;
            print!("{}", harness::training_summary(&cfg, &outcome));
            Ok(())
        }
        Command::Eval {
            checkpoint: path,
            config,
            episodes,
            seed,
            trace_dir,
        } => {
            let cfg = load_config(&config)?;
            let net = checkpoint::load::<f64>(&path)?;
            let episodes = episodes.unwrap_or(cfg.train.eval_episodes);
            let (metrics, traces) = harness::evaluate(&cfg, &net, seed, episodes)?;
            if let Some(dir) = trace_dir {
                write_traces(&dir, &traces)?;
            }
            write_records(&metrics.rows, std::io::stdout().lock())?;
            eprintln!("collisions: {}/{}", metrics.collisions(), metrics.rows.len());
            eprintln!(
                "mean reward before collision: {}",
                metrics.mean_reward_before_collision().map_or("-".to_string(), |r| format!("{r:.3}"))
            );
            eprintln!("time to collision (first {TABLE_VIEW}): {}", metrics.ttc_column(TABLE_VIEW).join(", "));
            Ok(())
        }
        Command::Compare { configs, out } => {
            let cfgs = configs.iter().map(|p| load_config(p)).collect::<Result<Vec<ExperimentConfig>>>()?;
            let report = harness::compare_strategies(&cfgs, &out)?;
            print!("{}", report.summary());
            Ok(())
        }
        Command::CheckScene { snapshot, config, mode } => {
            let cfg = match config {
                Some(p) => load_config(&p)?,
                None => ExperimentConfig::default(),
            };
            let text = std::fs::read_to_string(&snapshot).map_err(|e| Error::Io {
                path: snapshot.clone(),
                source: e,
            })?;
            let scene = SceneSnapshot::<f64>::parse(&text)?.into_scene(cfg.road, cfg.traffic)?;
            let modes: &[SafetyMode] = match mode {
                ModeArg::Basic => &[SafetyMode::Basic],
                ModeArg::Robust => &[SafetyMode::Robust],
                ModeArg::Both => &[SafetyMode::Basic, SafetyMode::Robust],
            };
            for &m in modes {
                let mask = mask_actions(&scene, &cfg.env, &cfg.safety.with_mode(m))?;
                print!("{}", mask.report());
            }
            Ok(())
        }
    }
}

fn write_traces(dir: &Path, traces: &[Vec<highway_core::env::TraceRow>]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    for (k, rows) in traces.iter().enumerate() {
        let path = dir.join(format!("trace_{k:03}.csv"));
        let f = std::fs::File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        write_trace_csv(rows, std::io::BufWriter::new(f))?;
    }
    Ok(())
}
