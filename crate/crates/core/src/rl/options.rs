//! The six behavior options. Each one is a fixed helm tree fragment, so the
//! learner picks *what* to do and the helm keeps deciding *how*, including
//! the mandatory boundary and collision handling.

use crate::field::{FieldSpec, Team};
use crate::helm::{BehaviorKind, BehaviorSpec, Condition, ModeNode, ModeTree};
use crate::state::{AgentId, GameState};
use crate::strategies::roles::{default_orbit_center, leaf_set};
use crate::strategies::StrategyParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionId {
    PickupOpponentFlag,
    GuardOwnFlag,
    TagOpponent,
    AvoidOpponents,
    Retreat,
    ShieldTeammate,
}

/// Enum order doubles as the greedy tie-break order.
pub const ALL_OPTIONS: [OptionId; 6] = [
    OptionId::PickupOpponentFlag,
    OptionId::GuardOwnFlag,
    OptionId::TagOpponent,
    OptionId::AvoidOpponents,
    OptionId::Retreat,
    OptionId::ShieldTeammate,
];

impl OptionId {
    pub fn name(self) -> &'static str {
        match self {
            OptionId::PickupOpponentFlag => "pickup_opponent_flag",
            OptionId::GuardOwnFlag => "guard_own_flag",
            OptionId::TagOpponent => "tag_opponent",
            OptionId::AvoidOpponents => "avoid_opponents",
            OptionId::Retreat => "retreat",
            OptionId::ShieldTeammate => "shield_teammate",
        }
    }

    pub fn from_name(name: &str) -> Option<OptionId> {
        ALL_OPTIONS.iter().copied().find(|o| o.name() == name)
    }

    pub fn index(self) -> usize {
        ALL_OPTIONS.iter().position(|o| *o == self).unwrap()
    }
}

impl std::fmt::Display for OptionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn single_leaf(name: &str, tasks: Vec<BehaviorSpec>, field: &FieldSpec, params: &StrategyParams) -> ModeTree {
    ModeTree::new(ModeNode::leaf(
        name,
        Condition::Always,
        leaf_set(tasks, field, params),
    ))
}

fn hold_here(name: &str, me: AgentId, world: &GameState, field: &FieldSpec, params: &StrategyParams) -> ModeTree {
    single_leaf(
        name,
        vec![BehaviorSpec::new(
            BehaviorKind::StationKeep {
                hold: world.agent(me).position,
            },
            params.station_weight,
        )],
        field,
        params,
    )
}

/// The low-level controller an option stands for, as a tree for this step.
/// Options whose referent is missing (no taggable opponent, no carrier to
/// shield) degrade to holding station.
pub fn option_tree(
    option: OptionId,
    me: AgentId,
    world: &GameState,
    field: &FieldSpec,
    params: &StrategyParams,
) -> ModeTree {
    let team = world.agent(me).team;
    match option {
        OptionId::PickupOpponentFlag => single_leaf(
            option.name(),
            vec![BehaviorSpec::new(
                BehaviorKind::Waypoint {
                    target: world.flag(team.opponent()).position,
                },
                params.task_weight,
            )],
            field,
            params,
        ),
        OptionId::GuardOwnFlag => single_leaf(
            option.name(),
            vec![BehaviorSpec::new(
                BehaviorKind::Loiter {
                    center: default_orbit_center(team, field, params),
                    radius: params.loiter_radius,
                    clockwise: true,
                },
                params.task_weight,
            )],
            field,
            params,
        ),
        OptionId::TagOpponent => match world.nearest_untagged_opponent(me) {
            Some(target) => single_leaf(
                option.name(),
                vec![BehaviorSpec::new(
                    BehaviorKind::CutRange { target },
                    params.task_weight,
                )],
                field,
                params,
            ),
            None => hold_here(option.name(), me, world, field, params),
        },
        OptionId::AvoidOpponents => single_leaf(
            option.name(),
            vec![BehaviorSpec::new(
                BehaviorKind::AvoidCollision {
                    standoff: params.evade_standoff,
                },
                params.evade_weight,
            )],
            field,
            params,
        ),
        OptionId::Retreat => single_leaf(
            option.name(),
            vec![BehaviorSpec::new(
                BehaviorKind::Waypoint {
                    target: field.flag_home(team),
                },
                params.task_weight,
            )],
            field,
            params,
        ),
        OptionId::ShieldTeammate => match shield_midpoint(team, me, world) {
            Some(mid) => single_leaf(
                option.name(),
                vec![BehaviorSpec::new(
                    BehaviorKind::Waypoint { target: mid },
                    params.task_weight,
                )],
                field,
                params,
            ),
            None => hold_here(option.name(), me, world, field, params),
        },
    }
}

/// Midpoint of the carrier-to-threat segment; the shield station. None when
/// no teammate carries the flag or no untagged opponent menaces it.
fn shield_midpoint(team: Team, me: AgentId, world: &GameState) -> Option<crate::geom::Vec2> {
    let carrier = world
        .team_agents(team)
        .into_iter()
        .find(|id| *id != me && world.agents[*id].has_flag)?;
    let threat = world.nearest_untagged_opponent(carrier)?;
    Some(
        world.agents[carrier]
            .position
            .midpoint(world.agents[threat].position),
    )
}
