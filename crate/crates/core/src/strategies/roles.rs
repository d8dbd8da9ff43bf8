//! Role archetypes and the fixed team strategies built from them.
//!
//! A role is a mode-tree builder. Trees are cheap value objects rebuilt every
//! step, which is how a pursuit leaf can name the nearest intruder by id: the
//! id is resolved here, in plain code, and the emitted tree stays a static
//! description the helm can evaluate and a log can replay.

use super::{StrategyParams, TeamStrategy};
use crate::field::{FieldSpec, Team};
use crate::geom::Vec2;
use crate::helm::{BehaviorKind, BehaviorSpec, Condition, ModeNode, ModeTree};
use crate::state::{AgentId, GameState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleArchetype {
    EasyAttacker,
    EasyDefender,
    MediumAttacker,
    MediumDefender,
}

impl RoleArchetype {
    pub fn name(self) -> &'static str {
        match self {
            RoleArchetype::EasyAttacker => "easy_attacker",
            RoleArchetype::EasyDefender => "easy_defender",
            RoleArchetype::MediumAttacker => "medium_attacker",
            RoleArchetype::MediumDefender => "medium_defender",
        }
    }

    pub fn tree(
        self,
        me: AgentId,
        team: Team,
        world: &GameState,
        field: &FieldSpec,
        params: &StrategyParams,
    ) -> ModeTree {
        match self {
            RoleArchetype::EasyAttacker => easy_attacker_tree(team, field, params),
            RoleArchetype::EasyDefender => easy_defender_tree(team, field, params, None),
            RoleArchetype::MediumAttacker => medium_attacker_tree(team, field, params),
            RoleArchetype::MediumDefender => {
                medium_defender_tree(me, team, world, field, params, None, DefendGate::FlagApproach)
            }
        }
    }
}

/// The mandatory pair appended to every leaf.
pub fn safety_set(field: &FieldSpec, params: &StrategyParams) -> Vec<BehaviorSpec> {
    vec![
        BehaviorSpec::new(
            BehaviorKind::OpRegion {
                region: field.bounds(),
            },
            params.op_region_weight,
        ),
        BehaviorSpec::new(
            BehaviorKind::AvoidCollision {
                standoff: params.avoid_standoff,
            },
            params.avoid_weight,
        ),
    ]
}

/// Task behaviors plus the safety pair, in priority-weight form.
pub fn leaf_set(
    tasks: Vec<BehaviorSpec>,
    field: &FieldSpec,
    params: &StrategyParams,
) -> Vec<BehaviorSpec> {
    let mut set = tasks;
    set.extend(safety_set(field, params));
    set
}

fn waypoint(target: Vec2, weight: f64) -> BehaviorSpec {
    BehaviorSpec::new(BehaviorKind::Waypoint { target }, weight)
}

/// Direction of travel from this team's back line toward midfield (+1 east
/// for blue, -1 for red).
pub fn advance_sign(team: Team) -> f64 {
    match team {
        Team::Blue => 1.0,
        Team::Red => -1.0,
    }
}

/// Orbit center a defender patrols: in front of the flag, toward midfield.
pub fn default_orbit_center(team: Team, field: &FieldSpec, params: &StrategyParams) -> Vec2 {
    let home = field.flag_home(team);
    Vec2::new(home.x + advance_sign(team) * params.loiter_offset, home.y)
}

/// Edge of the own base circle, offset off the centerline. Homebound traffic
/// aims here instead of the flag spot proper: the two teams' return lanes
/// then clear each other, where shared head-on lanes would lock opposing
/// hulls inside the collision stand-off. Blue rallies north, red south.
const RALLY_OFFSET: f64 = 9.0;

pub fn rally_point(team: Team, field: &FieldSpec) -> Vec2 {
    let home = field.flag_home(team);
    Vec2::new(home.x, home.y + advance_sign(team) * RALLY_OFFSET)
}

/// Untagged opponent inside `team`'s zone nearest to `me`, ties by id.
pub fn nearest_intruder(
    me: AgentId,
    team: Team,
    world: &GameState,
    field: &FieldSpec,
) -> Option<AgentId> {
    let mine = world.agent(me).position;
    world
        .intruders(team, field)
        .into_iter()
        .min_by(|a, b| {
            let da = world.agents[*a].position.dist(mine);
            let db = world.agents[*b].position.dist(mine);
            da.partial_cmp(&db).unwrap().then(a.cmp(b))
        })
}

pub(super) fn return_home_leaf(team: Team, field: &FieldSpec, params: &StrategyParams) -> ModeNode {
    ModeNode::leaf(
        "return",
        Condition::Any {
            of: vec![Condition::HasFlag, Condition::Tagged],
        },
        leaf_set(
            vec![waypoint(rally_point(team, field), params.task_weight)],
            field,
            params,
        ),
    )
}

/// Heads straight for the opposing flag home; carries or resets straight back.
pub fn easy_attacker_tree(team: Team, field: &FieldSpec, params: &StrategyParams) -> ModeTree {
    let enemy_home = field.flag_home(team.opponent());
    ModeTree::new(ModeNode::branch(
        "root",
        Condition::Always,
        vec![
            return_home_leaf(team, field, params),
            ModeNode::leaf(
                "attack",
                Condition::Always,
                leaf_set(
                    vec![waypoint(enemy_home, params.task_weight)],
                    field,
                    params,
                ),
            ),
        ],
    ))
}

/// Orbits a fixed circle in front of the own flag and never reacts to anything
/// else. `center` overrides the default orbit for scripted fixtures.
pub fn easy_defender_tree(
    team: Team,
    field: &FieldSpec,
    params: &StrategyParams,
    center: Option<Vec2>,
) -> ModeTree {
    let center = center.unwrap_or_else(|| default_orbit_center(team, field, params));
    ModeTree::new(ModeNode::leaf(
        "patrol",
        Condition::Always,
        leaf_set(
            vec![BehaviorSpec::new(
                BehaviorKind::Loiter {
                    center,
                    radius: params.loiter_radius,
                    clockwise: true,
                },
                params.task_weight,
            )],
            field,
            params,
        ),
    ))
}

pub(super) fn evade_ring(params: &StrategyParams) -> BehaviorSpec {
    BehaviorSpec::new(
        BehaviorKind::AvoidCollision {
            standoff: params.evade_standoff,
        },
        params.evade_weight,
    )
}

/// Like the easy attacker but with a wide extra evasion ring on the approach,
/// so it swerves around defenders instead of plowing into tag range. Once it
/// holds the flag (or a tag) it drops the ring and bolts: lingering in a
/// defender's stand-off band near the flag is what loses carriers.
pub fn medium_attacker_tree(team: Team, field: &FieldSpec, params: &StrategyParams) -> ModeTree {
    let enemy_home = field.flag_home(team.opponent());
    ModeTree::new(ModeNode::branch(
        "root",
        Condition::Always,
        vec![
            return_home_leaf(team, field, params),
            ModeNode::leaf(
                "attack",
                Condition::Always,
                leaf_set(
                    vec![
                        waypoint(enemy_home, params.task_weight),
                        evade_ring(params),
                    ],
                    field,
                    params,
                ),
            ),
        ],
    ))
}

/// When the medium defender leaves its post to chase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefendGate {
    /// Chase only an intruder that nears the flag home, or the flag carrier
    /// while it is still inside the zone.
    FlagApproach,
    /// Chase any untagged opponent as soon as it crosses into the zone.
    ZoneEntry,
}

/// Lateral shift of the default post off the zone centerline. Transit between
/// the bases runs along the centerline, so a defender parked exactly there
/// tags every passer-by and never lets a raid develop.
const DEFEND_POST_SIDESTEP: f64 = 14.0;

fn defend_target(
    me: AgentId,
    team: Team,
    world: &GameState,
    field: &FieldSpec,
    params: &StrategyParams,
    gate: DefendGate,
) -> Option<AgentId> {
    let carrier = world.flag(team).carrier;
    match gate {
        DefendGate::ZoneEntry => {
            if let Some(c) = carrier {
                if field.zone(team).contains(world.agents[c].position) {
                    return Some(c);
                }
            }
            nearest_intruder(me, team, world, field)
        }
        // Only threats near the flag home are worth leaving the post for: a
        // carrier past that circle has a clean lead at equal speed, and deep
        // chases drag the defender across the opponents' transit lane.
        DefendGate::FlagApproach => {
            let home = field.flag_home(team);
            let near: Vec<(AgentId, f64)> = world
                .intruders(team, field)
                .into_iter()
                .map(|id| (id, world.agents[id].position.dist(home)))
                .filter(|(_, d)| *d <= params.pursuit_range)
                .collect();
            if let Some(c) = carrier {
                if near.iter().any(|(id, _)| *id == c) {
                    return Some(c);
                }
            }
            near.into_iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .map(|(id, _)| id)
        }
    }
}

/// Holds a post beside the zone center, chases per `gate`, and resets via the
/// home base when tagged. `hold` overrides the post.
pub fn medium_defender_tree(
    me: AgentId,
    team: Team,
    world: &GameState,
    field: &FieldSpec,
    params: &StrategyParams,
    hold: Option<Vec2>,
    gate: DefendGate,
) -> ModeTree {
    let hold = hold.unwrap_or_else(|| {
        let c = field.zone(team).center();
        Vec2::new(c.x, c.y - DEFEND_POST_SIDESTEP * advance_sign(team))
    });
    let mut children = vec![ModeNode::leaf(
        "reset",
        Condition::Tagged,
        leaf_set(
            vec![waypoint(rally_point(team, field), params.task_weight)],
            field,
            params,
        ),
    )];
    if let Some(target) = defend_target(me, team, world, field, params, gate) {
        children.push(ModeNode::leaf(
            "pursue",
            Condition::IntruderInOwnZone,
            leaf_set(
                vec![
                    BehaviorSpec::new(BehaviorKind::CutRange { target }, params.task_weight),
                    // lead pursuit happily overshoots the midfield line; a
                    // defender that crosses is just a fresh target
                    BehaviorSpec::new(
                        BehaviorKind::OpRegion {
                            region: field.zone(team),
                        },
                        params.op_region_weight,
                    ),
                ],
                field,
                params,
            ),
        ));
    }
    children.push(ModeNode::leaf(
        "hold",
        Condition::Always,
        leaf_set(
            vec![BehaviorSpec::new(
                BehaviorKind::StationKeep { hold },
                params.station_weight,
            )],
            field,
            params,
        ),
    ));
    ModeTree::new(ModeNode::branch("root", Condition::Always, children))
}

/// Dual attacker with a team defense switch: the whole team drops into the
/// defend branch exactly when an untagged opponent stands in the own zone, so
/// the two agents flip together or not at all.
pub fn strategy4_tree(
    me: AgentId,
    team: Team,
    world: &GameState,
    field: &FieldSpec,
    params: &StrategyParams,
) -> ModeTree {
    let enemy_home = field.flag_home(team.opponent());
    let mut defend_children = vec![ModeNode::leaf(
        "reset",
        Condition::Tagged,
        leaf_set(
            vec![waypoint(rally_point(team, field), params.task_weight)],
            field,
            params,
        ),
    )];
    if let Some(target) = nearest_intruder(me, team, world, field) {
        defend_children.push(ModeNode::leaf(
            "pursue",
            Condition::Always,
            leaf_set(
                vec![
                    BehaviorSpec::new(BehaviorKind::CutRange { target }, params.task_weight),
                    BehaviorSpec::new(
                        BehaviorKind::OpRegion {
                            region: field.zone(team),
                        },
                        params.op_region_weight,
                    ),
                ],
                field,
                params,
            ),
        ));
    }
    ModeTree::new(ModeNode::branch(
        "root",
        Condition::Always,
        vec![
            ModeNode::branch("defend", Condition::IntruderInOwnZone, defend_children),
            ModeNode::branch(
                "attack",
                Condition::Always,
                vec![
                    return_home_leaf(team, field, params),
                    ModeNode::leaf(
                        "advance",
                        Condition::Always,
                        leaf_set(
                            vec![
                                waypoint(enemy_home, params.task_weight),
                                evade_ring(params),
                            ],
                            field,
                            params,
                        ),
                    ),
                ],
            ),
        ],
    ))
}

/// Stay-put tree used by the inert stub team.
fn hold_here_tree(
    me: AgentId,
    world: &GameState,
    field: &FieldSpec,
    params: &StrategyParams,
) -> ModeTree {
    ModeTree::new(ModeNode::leaf(
        "idle",
        Condition::Always,
        leaf_set(
            vec![BehaviorSpec::new(
                BehaviorKind::StationKeep {
                    hold: world.agent(me).position,
                },
                params.station_weight,
            )],
            field,
            params,
        ),
    ))
}

/// The baseline pairing: one easy attacker, one easy defender, roles fixed by
/// slot for the whole game.
pub fn pav01_policy(
    world: &GameState,
    team: Team,
    field: &FieldSpec,
    params: &StrategyParams,
) -> [ModeTree; 2] {
    let ids = world.team_agents(team);
    [
        RoleArchetype::EasyAttacker.tree(ids[0], team, world, field, params),
        RoleArchetype::EasyDefender.tree(ids[1], team, world, field, params),
    ]
}

/// Per-step trees for the numbered strategies. Panics on strategies that are
/// not plain role pairings (the classifier keeps state and lives elsewhere).
pub fn strategy_mode_switch(
    strategy: TeamStrategy,
    world: &GameState,
    team: Team,
    field: &FieldSpec,
    params: &StrategyParams,
) -> [ModeTree; 2] {
    let ids = world.team_agents(team);
    match strategy {
        TeamStrategy::Pav01 => pav01_policy(world, team, field, params),
        TeamStrategy::Strategy2 => [
            RoleArchetype::EasyAttacker.tree(ids[0], team, world, field, params),
            RoleArchetype::MediumDefender.tree(ids[1], team, world, field, params),
        ],
        TeamStrategy::Strategy3 => [
            RoleArchetype::MediumAttacker.tree(ids[0], team, world, field, params),
            RoleArchetype::MediumDefender.tree(ids[1], team, world, field, params),
        ],
        TeamStrategy::Strategy4 => [
            strategy4_tree(ids[0], team, world, field, params),
            strategy4_tree(ids[1], team, world, field, params),
        ],
        other => panic!("{} is not a fixed role pairing", other.name()),
    }
}

pub(super) fn inert_policy(
    world: &GameState,
    team: Team,
    field: &FieldSpec,
    params: &StrategyParams,
) -> [ModeTree; 2] {
    let ids = world.team_agents(team);
    [
        hold_here_tree(ids[0], world, field, params),
        hold_here_tree(ids[1], world, field, params),
    ]
}

pub(super) fn easy_attack_only_policy(
    world: &GameState,
    team: Team,
    field: &FieldSpec,
    params: &StrategyParams,
) -> [ModeTree; 2] {
    let ids = world.team_agents(team);
    [
        RoleArchetype::EasyAttacker.tree(ids[0], team, world, field, params),
        hold_here_tree(ids[1], world, field, params),
    ]
}
