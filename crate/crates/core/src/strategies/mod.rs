//! Team policies: the scripted role archetypes, the four fixed team
//! strategies, and the observing/classifying adaptive strategy. A policy is
//! anything that can turn the current world into per-agent mode trees; the
//! helm does the rest.

pub mod classifier;
pub mod roles;

pub use classifier::{classify_opponent, select_counter_strategy, CounterPlan, OpponentModel};
pub use roles::{pav01_policy, strategy_mode_switch, DefendGate, RoleArchetype};

use crate::dynamics::Action;
use crate::field::{FieldSpec, Team};
use crate::helm::{decide, DecisionDomain, HelmError};
use crate::state::{AgentId, GameState};
use serde::{Deserialize, Serialize};

/// Calibration constants for behaviors, roles, and the classifier, exposed in
/// the config file. Defaults are the shipped tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyParams {
    /// Mandatory collision stand-off and its weight.
    pub avoid_standoff: f64,
    pub avoid_weight: f64,
    pub op_region_weight: f64,
    /// Weight for the task behavior of a leaf (waypoint/loiter/cut-range).
    pub task_weight: f64,
    pub station_weight: f64,
    /// Extra opponent-evasion ring used by the medium attacker. Keep it a few
    /// meters over the tag radius: at parity the helm's step quantization
    /// lets the ring edge dip into tag reach.
    pub evade_standoff: f64,
    pub evade_weight: f64,
    /// Defender orbit geometry: radius, and how far in front of the flag the
    /// orbit centers.
    pub loiter_radius: f64,
    pub loiter_offset: f64,
    /// Seconds without a midfield crossing before an opponent is called
    /// non-offensive.
    pub offensive_deadline: f64,
    /// Seconds the probe holds still in enemy territory.
    pub probe_pause: f64,
    /// Heading-at-flag tolerance (deg) and persistence (s) for the
    /// direct-approach test.
    pub direct_heading_tol: f64,
    pub direct_persist: f64,
    /// Seconds of engaged sidestepping before the approach counts as a
    /// circumvention.
    pub dodge_persist: f64,
    /// Blocker counts as on the approach line within this many tag radii.
    pub block_line_factor: f64,
    /// Detour wider than this many tag radii of the line is a circumvention.
    pub circumvent_factor: f64,
    /// An opponent closing inside this range during the probe is pursuing.
    pub pursuit_range: f64,
    /// Herding approach offset toward the field interior, degrees.
    pub herd_angle: f64,
    /// Attack only when the guarding opponent is at least this far from the
    /// flag under the tag-then-attack plan.
    pub capture_timing_dist: f64,
    /// Opponent-to-flag distance that opens the opportune grab window.
    pub opportune_dist: f64,
    /// Observation post stands this far on the home side of midfield.
    pub observe_hold_gap: f64,
    /// Probe point sits this far past midfield.
    pub probe_depth: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            avoid_standoff: 3.0,
            avoid_weight: 200.0,
            op_region_weight: 300.0,
            task_weight: 100.0,
            station_weight: 50.0,
            evade_standoff: 13.0,
            evade_weight: 150.0,
            loiter_radius: 15.0,
            loiter_offset: 6.0,
            offensive_deadline: 120.0,
            probe_pause: 20.0,
            direct_heading_tol: 15.0,
            direct_persist: 5.0,
            dodge_persist: 8.0,
            block_line_factor: 1.5,
            circumvent_factor: 1.2,
            pursuit_range: 25.0,
            herd_angle: 30.0,
            capture_timing_dist: 40.0,
            opportune_dist: 20.0,
            observe_hold_gap: 4.0,
            probe_depth: 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeamStrategy {
    /// Both agents hold station; useful as a null opponent.
    Inert,
    /// One easy attacker, the partner holds station; a pursuit test stub.
    EasyAttackOnly,
    Pav01,
    Strategy2,
    Strategy3,
    Strategy4,
    Classifier,
}

impl TeamStrategy {
    pub fn name(self) -> &'static str {
        match self {
            TeamStrategy::Inert => "inert",
            TeamStrategy::EasyAttackOnly => "easy_attack_only",
            TeamStrategy::Pav01 => "pav01",
            TeamStrategy::Strategy2 => "strategy2",
            TeamStrategy::Strategy3 => "strategy3",
            TeamStrategy::Strategy4 => "strategy4",
            TeamStrategy::Classifier => "classifier",
        }
    }
}

/// One agent's command for this step plus the mode that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDecision {
    pub agent: AgentId,
    pub action: Action,
    pub mode: String,
}

/// A team's half of the joint action each step. Controllers may keep state
/// (the classifier does) but must be deterministic functions of their inputs
/// and history.
pub trait TeamController: Send {
    fn tick(
        &mut self,
        world: &GameState,
        field: &FieldSpec,
        dom: &DecisionDomain,
    ) -> Result<Vec<AgentDecision>, HelmError>;

    fn label(&self) -> String;
}

/// Controller for every scripted strategy. Stateless except for the
/// classifier variant, whose per-agent observation models live here.
pub struct RuleController {
    team: Team,
    strategy: TeamStrategy,
    params: StrategyParams,
    models: Option<Vec<OpponentModel>>,
}

impl RuleController {
    pub fn new(strategy: TeamStrategy, team: Team, params: StrategyParams) -> Self {
        RuleController {
            team,
            strategy,
            params,
            models: None,
        }
    }
}

impl TeamController for RuleController {
    fn tick(
        &mut self,
        world: &GameState,
        field: &FieldSpec,
        dom: &DecisionDomain,
    ) -> Result<Vec<AgentDecision>, HelmError> {
        let ids = world.team_agents(self.team);
        let trees = match self.strategy {
            TeamStrategy::Inert => roles::inert_policy(world, self.team, field, &self.params),
            TeamStrategy::EasyAttackOnly => {
                roles::easy_attack_only_policy(world, self.team, field, &self.params)
            }
            TeamStrategy::Pav01 => pav01_policy(world, self.team, field, &self.params),
            TeamStrategy::Strategy2 | TeamStrategy::Strategy3 | TeamStrategy::Strategy4 => {
                strategy_mode_switch(self.strategy, world, self.team, field, &self.params)
            }
            TeamStrategy::Classifier => {
                let models = self.models.get_or_insert_with(|| {
                    classifier::assign_opponents(world, self.team)
                        .into_iter()
                        .map(OpponentModel::new)
                        .collect()
                });
                for (slot, id) in ids.iter().enumerate() {
                    models[slot] = classify_opponent(
                        models[slot].clone(),
                        world,
                        *id,
                        field,
                        &self.params,
                        world.time,
                    );
                }
                [
                    classifier::plan_tree(&models[0], world, ids[0], 0, field, &self.params),
                    classifier::plan_tree(&models[1], world, ids[1], 1, field, &self.params),
                ]
            }
        };
        ids.iter()
            .zip(trees.iter())
            .map(|(id, tree)| {
                let (action, mode) = decide(tree, world.agent(*id), world, field, dom)?;
                Ok(AgentDecision {
                    agent: *id,
                    action,
                    mode,
                })
            })
            .collect()
    }

    fn label(&self) -> String {
        self.strategy.name().to_string()
    }
}

impl RuleController {
    /// The classifier's current models, for tests and logging.
    pub fn opponent_models(&self) -> Option<&[OpponentModel]> {
        self.models.as_deref()
    }
}
