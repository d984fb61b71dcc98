use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EvalMetrics, EvalRow, ExperimentConfig, TrainLogRow};
use super::metrics::plateau_episode;
use crate::agents::{constrained_shaped_reward, dual_update, epsilon_at, Agent, ConstrainedState, ReplayBuffer, Strategy, Transition};
use crate::env::{ActionSet, HighwayEnv, MetaAction, TraceRow};
use crate::error::{Error, Result};
use crate::neural::{Activation, Mlp};
use crate::safety::{mask_actions, SafetyMask};

/// Window and fraction of the plateau criterion.
pub const PLATEAU_WINDOW: usize = 20;
pub const PLATEAU_FRACTION: f64 = 0.9;

const TRAIN_PHASE: u64 = 0;
const EVAL_PHASE: u64 = 1;

/// Scene seed of episode `episode` in a phase. Training and evaluation draw
/// from disjoint ranges, and so do different run seeds.
pub fn episode_seed(run_seed: u64, eval: bool, episode: usize) -> u64 {
    let phase = if eval { EVAL_PHASE } else { TRAIN_PHASE };
    (run_seed << 21) | (phase << 20) | (episode as u64 & 0xF_FFFF)
}

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fresh Q-network for a run.
pub fn init_network(cfg: &ExperimentConfig, seed: u64) -> Result<Mlp<f64>> {
    Mlp::new(&cfg.network.dims(), Activation::Elu, &mut rng_stream(seed, 1))
}

/// Summary of one episode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeOutcome {
    pub total_reward: f64,
    pub reward_before_collision: f64,
    pub steps: usize,
    pub collision: bool,
    /// Number of steps up to and including the colliding one.
    pub collision_step: Option<usize>,
    /// Sum over steps of the leader / follower penetration of the chosen action.
    pub violation_sums: [f64; 2],
    /// Steps where no action passed the check and the fallback was used.
    pub fallback_steps: usize,
    pub trace: Vec<TraceRow>,
}

struct Learning<'a, R: Rng> {
    buffer: &'a mut ReplayBuffer,
    epsilon: f64,
    rng: &'a mut R,
    constrained: Option<&'a ConstrainedState>,
}

fn mask_for(cfg: &ExperimentConfig, env: &HighwayEnv) -> Result<Option<SafetyMask<f64>>> {
    let Some(mode) = cfg.strategy.safety_mode() else {
        return Ok(None);
    };
    let scene = env.scene().ok_or(Error::NotReset)?;
    mask_actions(scene, &cfg.env, &cfg.safety.with_mode(mode)).map(Some)
}

/// Runs one episode. With `learning` the agent explores and transitions are
/// stored; without it the policy is greedy.
fn run_episode<R: Rng>(
    cfg: &ExperimentConfig,
    env: &mut HighwayEnv,
    agent: &Agent,
    scene_seed: u64,
    mut learning: Option<Learning<'_, R>>,
) -> Result<EpisodeOutcome> {
    let mut obs = env.reset(scene_seed)?;
    let mut admissible = env.admissible()?;
    let mut mask = mask_for(cfg, env)?;
    let mut out = EpisodeOutcome::default();
    let mut greedy_rng = rng_stream(scene_seed, 9);
    loop {
        let safe = mask.as_ref().map_or(admissible, |m| m.safe);
        if mask.as_ref().is_some_and(|m| m.fallback.is_some()) {
            out.fallback_steps += 1;
        }
        let action = match learning.as_mut() {
            Some(l) => agent.act(&obs.normalized, &admissible, &safe, l.epsilon, l.rng)?,
            None => agent.act(&obs.normalized, &admissible, &safe, 0.0, &mut greedy_rng)?,
        };
        let violations = mask.as_ref().map_or([0.0; 2], |m| {
            let c = &m.checks[action.index()];
            [c.leader_violation(), c.follower_violation()]
        });
        let result = env.step(action)?;
        out.steps += 1;
        if !result.info.collision {
            out.reward_before_collision += result.reward;
        } else {
            out.collision = true;
            out.collision_step = Some(out.steps);
        }
        out.total_reward += result.reward;
        out.violation_sums[0] += violations[0];
        out.violation_sums[1] += violations[1];
        out.trace.push(TraceRow {
            step: out.steps - 1,
            action,
            reward: result.reward,
            ego_v: result.info.ego_v,
            ego_lane: result.info.ego_lane,
            collision: result.info.collision,
            terminal: result.terminal,
        });

        let (next_admissible, next_mask) = if result.terminal {
            (ActionSet::full(), None)
        } else {
            (env.admissible()?, mask_for(cfg, env)?)
        };
        if let Some(l) = learning.as_mut() {
            let r = match (cfg.strategy, l.constrained) {
                (Strategy::Constrained, Some(cs)) => constrained_shaped_reward(result.reward, &violations, cs),
                _ => result.reward,
            };
            l.buffer.push(Transition {
                s: obs.normalized,
                a: action.index(),
                r,
                s_next: result.obs.normalized,
                terminal: result.terminal,
                admissible,
                safe,
                admissible_next: next_admissible,
                safe_next: next_mask.as_ref().map_or(next_admissible, |m| m.safe),
            });
        }
        if result.terminal {
            return Ok(out);
        }
        obs = result.obs;
        admissible = next_admissible;
        mask = next_mask;
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub seed: u64,
    pub log: Vec<TrainLogRow>,
    pub net: Mlp<f64>,
    pub plateau: Option<usize>,
    pub constrained: Option<ConstrainedState>,
    /// Steps across training where the safety check fell back.
    pub fallback_steps: usize,
}

/// Trains one agent with the given run seed.
pub fn train(cfg: &ExperimentConfig, seed: u64) -> Result<TrainOutcome> {
    let mut env = HighwayEnv::new(cfg.highway())?;
    let mut agent = Agent::new(cfg.strategy, init_network(cfg, seed)?, cfg.train.alpha, cfg.train.gamma);
    let mut explore_rng = rng_stream(seed, 2);
    let mut replay_rng = rng_stream(seed, 3);
    let mut buffer = ReplayBuffer::new(cfg.train.buffer_capacity);
    let mut constrained = (cfg.strategy == Strategy::Constrained).then(|| ConstrainedState::from_config(&cfg.constrained));
    let mut log = Vec::with_capacity(cfg.train.episodes);
    let mut fallback_steps = 0;

    for episode in 0..cfg.train.episodes {
        let epsilon = epsilon_at(&cfg.train.epsilon, episode);
        let outcome = run_episode(
            cfg,
            &mut env,
            &agent,
            episode_seed(seed, false, episode),
            Some(Learning {
                buffer: &mut buffer,
                epsilon,
                rng: &mut explore_rng,
                constrained: constrained.as_ref(),
            }),
        )?;
        fallback_steps += outcome.fallback_steps;

        let mut losses = Vec::with_capacity(cfg.train.iterations_per_update);
        for _ in 0..cfg.train.iterations_per_update {
            let batch = buffer.sample(cfg.train.batch_size, &mut replay_rng)?;
            if let Some(loss) = agent.train_step(&batch)? {
                losses.push(loss);
            }
        }
        if !agent.net.all_finite() {
            return Err(Error::NonFinite(format!("network parameters after episode {episode}")));
        }
        if let Some(cs) = constrained.as_mut() {
            let steps = outcome.steps.max(1) as f64;
            let means = [outcome.violation_sums[0] / steps, outcome.violation_sums[1] / steps];
            let excess = cs.excess(&means);
            dual_update(cs, &excess);
        }
        let loss_mean = (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64);
        log::debug!(
            "{} seed {seed} episode {episode}: reward {:.3} steps {} collision {}",
            cfg.label,
            outcome.total_reward,
            outcome.steps,
            outcome.collision
        );
        log.push(TrainLogRow {
            episode,
            epsilon,
            total_reward: outcome.total_reward,
            steps: outcome.steps,
            collision: outcome.collision,
            loss_mean,
            lambda_norm: constrained.as_ref().map(|c| c.lambda_norm()),
        });
    }
    let rewards: Vec<f64> = log.iter().map(|r| r.total_reward).collect();
    Ok(TrainOutcome {
        seed,
        plateau: plateau_episode(&rewards, PLATEAU_WINDOW, PLATEAU_FRACTION),
        log,
        net: agent.net,
        constrained,
        fallback_steps,
    })
}

/// Greedy evaluation on scenes disjoint from training. Masking stays active for
/// the masked strategies.
pub fn evaluate(cfg: &ExperimentConfig, net: &Mlp<f64>, seed: u64, episodes: usize) -> Result<(EvalMetrics, Vec<Vec<TraceRow>>)> {
    if net.dims() != cfg.network.dims().as_slice() {
        return Err(Error::Checkpoint(format!(
            "checkpoint dims {:?} do not match configured network {:?}",
            net.dims(),
            cfg.network.dims()
        )));
    }
    let mut env = HighwayEnv::new(cfg.highway())?;
    let agent = Agent::new(cfg.strategy, net.clone(), cfg.train.alpha, cfg.train.gamma);
    let mut metrics = EvalMetrics::default();
    let mut traces = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let o = run_episode::<ChaCha8Rng>(cfg, &mut env, &agent, episode_seed(seed, true, episode), None)?;
        metrics.rows.push(EvalRow {
            episode,
            total_reward: o.total_reward,
            reward_before_collision: o.reward_before_collision,
            steps: o.steps,
            collision: o.collision,
            time_to_collision: o.collision_step.map(|k| k as f64 * cfg.env.policy_period),
        });
        traces.push(o.trace);
    }
    Ok((metrics, traces))
}

/// Action the greedy policy takes in the current state of `env`.
pub fn greedy_action(cfg: &ExperimentConfig, env: &HighwayEnv, net: &Mlp<f64>) -> Result<MetaAction> {
    let agent = Agent::new(cfg.strategy, net.clone(), cfg.train.alpha, cfg.train.gamma);
    let admissible = env.admissible()?;
    let safe = mask_for(cfg, env)?.map_or(admissible, |m| m.safe);
    let mut rng = rng_stream(0, 0);
    agent.act(&env.observation()?.normalized, &admissible, &safe, 0.0, &mut rng)
}
