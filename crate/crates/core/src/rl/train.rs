//! Option-level training against a scripted opponent, and the controller
//! that plays tables back inside the game harness. The learning team is
//! always blue; the opponent policy owns red.

use super::obs::discretize_observation;
use super::options::{option_tree, OptionId};
use super::qlearn::{double_q_update, select_option, EpsilonSchedule, QTables, Transition};
use super::reward::{compute_reward, RewardTable};
use crate::dynamics::{Action, VehicleSpec};
use crate::field::{FieldSpec, Team};
use crate::helm::{decide, DecisionDomain, HelmError};
use crate::rules::{is_terminal, step_game, StepError};
use crate::seed::split_seed;
use crate::state::{initial_state, AgentId, GameState};
use crate::strategies::{AgentDecision, RuleController, StrategyParams, TeamController, TeamStrategy};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Helm(#[from] HelmError),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Everything a training run needs; fully determines the output together
/// with nothing else.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub episodes: u32,
    /// Episode length in seconds.
    pub horizon: f64,
    pub seed: u64,
    pub opponent: TeamStrategy,
    pub rewards: RewardTable,
    pub field: FieldSpec,
    pub vehicle: VehicleSpec,
    pub domain: DecisionDomain,
    pub params: StrategyParams,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub option_commit: u32,
    pub k_segments: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            episodes: 2000,
            horizon: 120.0,
            seed: 0,
            opponent: TeamStrategy::Pav01,
            rewards: RewardTable::default(),
            field: FieldSpec::default(),
            vehicle: VehicleSpec::default(),
            domain: DecisionDomain::default(),
            params: StrategyParams::default(),
            learning_rate: 0.1,
            gamma: 0.95,
            epsilon: EpsilonSchedule::default(),
            option_commit: 10,
            k_segments: super::obs::RL_HEADING_SEGMENTS,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.horizon <= 0.0 {
            errs.push(format!("training.horizon must be > 0, got {}", self.horizon));
        }
        errs.extend(self.field.validate());
        errs.extend(self.vehicle.validate());
        if let Err(e) = self.domain.validate() {
            errs.push(e);
        }
        errs.extend(self.rewards.validate());
        errs.extend(
            QTables::new(
                self.k_segments,
                self.learning_rate,
                self.gamma,
                self.epsilon,
                self.option_commit,
            )
            .validate(),
        );
        errs
    }

    fn fresh_tables(&self) -> QTables {
        QTables::new(
            self.k_segments,
            self.learning_rate,
            self.gamma,
            self.epsilon,
            self.option_commit,
        )
    }
}

/// One learning-curve sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodePoint {
    pub episode: u32,
    /// Undiscounted team return over the episode.
    pub ret: f64,
    pub events: u32,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingOutput {
    pub q: QTables,
    pub curve: Vec<EpisodePoint>,
}

/// Per-agent option bookkeeping between decision points.
struct Slot {
    agent: AgentId,
    current: Option<(super::obs::ObservationFeatures, OptionId)>,
    acc_reward: f64,
    remaining: u32,
    interrupted: bool,
}

impl Slot {
    fn new(agent: AgentId) -> Self {
        Slot {
            agent,
            current: None,
            acc_reward: 0.0,
            remaining: 0,
            interrupted: false,
        }
    }

    fn at_boundary(&self) -> bool {
        match self.current {
            None => true,
            Some(_) => self.remaining == 0 || self.interrupted,
        }
    }
}

/// Run seeded training episodes and return the tables with the learning
/// curve. Zero episodes returns the freshly initialized tables untouched.
pub fn train(cfg: &TrainingConfig) -> Result<TrainingOutput, TrainError> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(TrainError::Invalid(errs.join("; ")));
    }
    let mut q = cfg.fresh_tables();
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut curve = Vec::with_capacity(cfg.episodes as usize);
    for episode in 0..cfg.episodes {
        let epsilon = q.epsilon.at(episode);
        let (ret, events) = learning_episode(&mut q, epsilon, cfg, &mut rng)?;
        curve.push(EpisodePoint {
            episode,
            ret,
            events,
            epsilon,
        });
    }
    Ok(TrainingOutput { q, curve })
}

fn learning_episode(
    q: &mut QTables,
    epsilon: f64,
    cfg: &TrainingConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(f64, u32), TrainError> {
    let mut world = initial_state(&cfg.field, rng);
    let mut opponent = RuleController::new(cfg.opponent, Team::Red, cfg.params.clone());
    let blue_ids = world.team_agents(Team::Blue);
    let mut slots = [Slot::new(blue_ids[0]), Slot::new(blue_ids[1])];
    let mut total = 0.0;

    while !is_terminal(&world, cfg.horizon) {
        // decision points, then one joint step
        for slot in &mut slots {
            if !slot.at_boundary() {
                continue;
            }
            let obs_now = discretize_observation(&world, slot.agent, &cfg.field, cfg.k_segments);
            if let Some((obs0, option)) = slot.current.take() {
                let t = Transition {
                    obs: obs0,
                    option,
                    reward: slot.acc_reward,
                    next_obs: obs_now,
                    terminal: false,
                };
                double_q_update(q, &t, rng);
            }
            let option = select_option(q, &obs_now, epsilon, rng);
            slot.current = Some((obs_now, option));
            slot.acc_reward = 0.0;
            slot.remaining = q.option_commit;
            slot.interrupted = false;
        }

        let mut actions = vec![Action::HALT; world.agents.len()];
        for slot in &slots {
            let (_, option) = slot.current.expect("option chosen above");
            let tree = option_tree(option, slot.agent, &world, &cfg.field, &cfg.params);
            let (action, _) =
                decide(&tree, world.agent(slot.agent), &world, &cfg.field, &cfg.domain)?;
            actions[slot.agent] = action;
        }
        for d in opponent.tick(&world, &cfg.field, &cfg.domain)? {
            actions[d.agent] = d.action;
        }

        let (next, events) = step_game(&world, &actions, &cfg.field, &cfg.vehicle)?;
        let r = compute_reward(&events, Team::Blue, &cfg.rewards);
        total += r;
        for slot in &mut slots {
            slot.acc_reward += r;
            slot.remaining = slot.remaining.saturating_sub(1);
            if !events.is_empty() {
                slot.interrupted = true;
            }
        }
        world = next;
    }

    // close both open options against the terminal observation
    for slot in &mut slots {
        if let Some((obs0, option)) = slot.current.take() {
            let next_obs = discretize_observation(&world, slot.agent, &cfg.field, cfg.k_segments);
            let t = Transition {
                obs: obs0,
                option,
                reward: slot.acc_reward,
                next_obs,
                terminal: true,
            };
            double_q_update(q, &t, rng);
        }
    }
    Ok((total, world.event_history.len() as u32))
}

/// How an evaluation episode picks options.
#[derive(Clone, Copy)]
pub enum EvalPolicy<'a> {
    /// Greedy playback of trained tables.
    Greedy(&'a QTables),
    /// Uniform-random option at every decision point; the learning baseline.
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalEpisode {
    pub ret: f64,
    /// Fraction of (step, agent) samples the learning team spent in its own
    /// half.
    pub own_zone_fraction: f64,
    pub events: u32,
}

/// Play `episodes` evaluation games without learning. Episode seeds derive
/// from `base_seed` by index, so two policies evaluated with the same base
/// seed see identical spawn draws (paired comparison).
pub fn evaluate(
    policy: EvalPolicy<'_>,
    cfg: &TrainingConfig,
    episodes: u32,
    base_seed: u64,
) -> Result<Vec<EvalEpisode>, TrainError> {
    let uniform_tables = cfg.fresh_tables();
    let (q, epsilon) = match policy {
        EvalPolicy::Greedy(q) => (q, 0.0),
        EvalPolicy::UniformRandom => (&uniform_tables, 1.0),
    };
    (0..episodes)
        .map(|e| eval_episode(q, epsilon, cfg, split_seed(base_seed, e as u64)))
        .collect()
}

fn eval_episode(
    q: &QTables,
    epsilon: f64,
    cfg: &TrainingConfig,
    seed: u64,
) -> Result<EvalEpisode, TrainError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut world = initial_state(&cfg.field, &mut rng);
    let mut opponent = RuleController::new(cfg.opponent, Team::Red, cfg.params.clone());
    let blue_ids = world.team_agents(Team::Blue);
    let mut slots = [Slot::new(blue_ids[0]), Slot::new(blue_ids[1])];
    let mut total = 0.0;
    let mut in_zone = 0u64;
    let mut samples = 0u64;

    while !is_terminal(&world, cfg.horizon) {
        for slot in &mut slots {
            if !slot.at_boundary() {
                continue;
            }
            let obs_now = discretize_observation(&world, slot.agent, &cfg.field, cfg.k_segments);
            let option = select_option(q, &obs_now, epsilon, &mut rng);
            slot.current = Some((obs_now, option));
            slot.remaining = q.option_commit;
            slot.interrupted = false;
        }
        let mut actions = vec![Action::HALT; world.agents.len()];
        for slot in &slots {
            let (_, option) = slot.current.expect("option chosen above");
            let tree = option_tree(option, slot.agent, &world, &cfg.field, &cfg.params);
            let (action, _) =
                decide(&tree, world.agent(slot.agent), &world, &cfg.field, &cfg.domain)?;
            actions[slot.agent] = action;
        }
        for d in opponent.tick(&world, &cfg.field, &cfg.domain)? {
            actions[d.agent] = d.action;
        }
        let (next, events) = step_game(&world, &actions, &cfg.field, &cfg.vehicle)?;
        total += compute_reward(&events, Team::Blue, &cfg.rewards);
        for slot in &mut slots {
            if cfg.field.in_zone(Team::Blue, next.agent(slot.agent).position) {
                in_zone += 1;
            }
            samples += 1;
            slot.remaining = slot.remaining.saturating_sub(1);
            if !events.is_empty() {
                slot.interrupted = true;
            }
        }
        world = next;
    }
    Ok(EvalEpisode {
        ret: total,
        own_zone_fraction: if samples == 0 {
            0.0
        } else {
            in_zone as f64 / samples as f64
        },
        events: world.event_history.len() as u32,
    })
}

/// Plays options inside the harness: greedy over loaded tables, or uniform
/// random as the untrained baseline. Keeps the same decision cadence and
/// interruption rule as training.
pub struct OptionsController {
    team: Team,
    q: QTables,
    epsilon: f64,
    params: StrategyParams,
    rng: ChaCha12Rng,
    slots: Option<[Slot; 2]>,
    seen_events: usize,
    label: String,
}

impl OptionsController {
    pub fn new(
        team: Team,
        q: QTables,
        epsilon: f64,
        params: StrategyParams,
        seed: u64,
        label: impl Into<String>,
    ) -> Self {
        OptionsController {
            team,
            q,
            epsilon,
            params,
            rng: ChaCha12Rng::seed_from_u64(seed),
            slots: None,
            seen_events: 0,
            label: label.into(),
        }
    }

    pub fn uniform_random(team: Team, params: StrategyParams, seed: u64) -> Self {
        let q = TrainingConfig::default().fresh_tables();
        OptionsController::new(team, q, 1.0, params, seed, "random_options")
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }
}

impl TeamController for OptionsController {
    fn tick(
        &mut self,
        world: &GameState,
        field: &FieldSpec,
        dom: &DecisionDomain,
    ) -> Result<Vec<AgentDecision>, HelmError> {
        let slots = self.slots.get_or_insert_with(|| {
            let ids = world.team_agents(self.team);
            [Slot::new(ids[0]), Slot::new(ids[1])]
        });
        let fresh_events = world.event_history.len() > self.seen_events;
        self.seen_events = world.event_history.len();
        let mut out = Vec::with_capacity(2);
        for slot in slots.iter_mut() {
            if fresh_events {
                slot.interrupted = true;
            }
            if slot.at_boundary() {
                let obs = discretize_observation(world, slot.agent, field, self.q.k_segments);
                let option = select_option(&self.q, &obs, self.epsilon, &mut self.rng);
                slot.current = Some((obs, option));
                slot.remaining = self.q.option_commit;
                slot.interrupted = false;
            }
            let (_, option) = slot.current.expect("option chosen above");
            slot.remaining = slot.remaining.saturating_sub(1);
            let tree = option_tree(option, slot.agent, world, field, &self.params);
            let (action, _) = decide(&tree, world.agent(slot.agent), world, field, dom)?;
            out.push(AgentDecision {
                agent: slot.agent,
                action,
                mode: option.name().to_string(),
            });
        }
        Ok(out)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}
