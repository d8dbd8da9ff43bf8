//! Opponent classification and the counters built on it.
//!
//! Each agent watches exactly one opposing agent and estimates two traits.
//! Offensive: does it cross into our half? Decided by observation, or by a
//! deadline expiring without a crossing. Aggressive: does it press on despite
//! opposition? For offensive opponents this is read off its approach while we
//! block the line to our flag; for non-offensive ones we probe its territory
//! and see whether it comes after us. Once both bits are known the agent
//! commits to a counter plan for the rest of the game.

use super::roles::{
    advance_sign, evade_ring, leaf_set, nearest_intruder, return_home_leaf,
};
use super::StrategyParams;
use crate::field::{FieldSpec, Team};
use crate::geom::{angle_sep, bearing, heading_unit, Vec2};
use crate::helm::{BehaviorKind, BehaviorSpec, Condition, ModeNode, ModeTree};
use crate::state::{AgentId, GameState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How close the probe has to get to its mark before the pause starts.
const PROBE_ARRIVAL: f64 = 3.0;
/// Herding flank point stands this far from the evader.
const HERD_FLANK_DIST: f64 = 6.0;
/// A press has real way on; hovering at the edge of an evasion ring with the
/// bow pointed at the flag is a stall, not an approach.
const PRESS_MIN_SPEED: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ProbePhase {
    Idle,
    Transit { mark: Vec2 },
    Pause { mark: Vec2, since: f64 },
}

/// Running estimate of one opposing agent's traits, plus the bookkeeping the
/// observation procedure needs. `None` bits are still unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentModel {
    pub opponent: AgentId,
    pub offensive: Option<bool>,
    pub aggressive: Option<bool>,
    /// Where the opponent last entered our half; anchors the approach line.
    entry_point: Option<Vec2>,
    /// Engaged time spent pressing at our flag, cumulative across sorties.
    press_time: f64,
    /// Engaged time spent sidestepping instead, likewise cumulative.
    dodge_time: f64,
    /// Whether the last engaged observation was a press; a tag landed right
    /// after one means the opponent ran into the defender rather than around.
    pressing_last: bool,
    /// Timestamp of the previous observation, for accrual increments.
    last_obs: Option<f64>,
    probe: ProbePhase,
}

impl OpponentModel {
    pub fn new(opponent: AgentId) -> Self {
        OpponentModel {
            opponent,
            offensive: None,
            aggressive: None,
            entry_point: None,
            press_time: 0.0,
            dodge_time: 0.0,
            pressing_last: false,
            last_obs: None,
            probe: ProbePhase::Idle,
        }
    }

    /// Both traits once known, in (offensive, aggressive) order.
    pub fn label(&self) -> Option<(bool, bool)> {
        Some((self.offensive?, self.aggressive?))
    }
}

/// Pair each of `team`'s agents with a distinct opposing agent: in id order,
/// every agent takes the not-yet-assigned opponent nearest in the cross-field
/// coordinate, ties by id. At spawn the teams face each other across the full
/// field length, so range is all jitter and lane alignment is all signal.
pub fn assign_opponents(world: &GameState, team: Team) -> Vec<AgentId> {
    let mut free = world.team_agents(team.opponent());
    world
        .team_agents(team)
        .into_iter()
        .map(|id| {
            let mine = world.agent(id).position;
            let pick = free
                .iter()
                .copied()
                .min_by(|a, b| {
                    let da = (world.agents[*a].position.y - mine.y).abs();
                    let db = (world.agents[*b].position.y - mine.y).abs();
                    da.partial_cmp(&db).unwrap().then(a.cmp(b))
                })
                .expect("two agents per team");
            free.retain(|f| *f != pick);
            pick
        })
        .collect()
}

/// Advance the model one observation step. Pure in (model, world, time): call
/// once per tick with the watching agent's id. Decided bits never change.
pub fn classify_opponent(
    mut model: OpponentModel,
    world: &GameState,
    me: AgentId,
    field: &FieldSpec,
    params: &StrategyParams,
    elapsed: f64,
) -> OpponentModel {
    if model.label().is_some() {
        return model;
    }
    let dt = model.last_obs.map_or(0.0, |t| (elapsed - t).max(0.0));
    model.last_obs = Some(elapsed);
    let my_team = world.agent(me).team;
    let opp = &world.agents[model.opponent];
    let opp_in_our_half = field.in_zone(my_team, opp.position);

    if model.offensive.is_none() {
        if opp_in_our_half {
            model.offensive = Some(true);
            model.entry_point = Some(opp.position);
        } else if elapsed >= params.offensive_deadline {
            model.offensive = Some(false);
        }
    }

    match model.offensive {
        Some(true) if model.aggressive.is_none() => {
            if !opp_in_our_half {
                // Retreated; the approach line re-anchors on the next
                // crossing, but engaged evidence carries over.
                model.entry_point = None;
                model.pressing_last = false;
                return model;
            }
            if opp.tagged {
                // Walked into the defender mid-press: the tag itself is the
                // verdict. A tag out of a sidestep, or one inherited from a
                // teammate's reach, proves nothing; the walk home is
                // rule-forced either way, so the evidence clock stops.
                if model.pressing_last {
                    model.aggressive = Some(true);
                }
                model.pressing_last = false;
                return model;
            }
            if opp.has_flag {
                // Got past us entirely; outbound carries say nothing.
                model.pressing_last = false;
                return model;
            }
            let entry = *model.entry_point.get_or_insert(opp.position);
            let flag = field.flag_home(my_team);
            let detour = opp.position.dist_to_segment(entry, flag);
            if detour > params.circumvent_factor * field.tag_radius {
                model.aggressive = Some(false);
                return model;
            }
            let me_st = world.agent(me);
            let blocking = me_st.position.dist_to_segment(entry, flag)
                <= params.block_line_factor * field.tag_radius;
            // straight running far from anyone proves nothing; the trait
            // shows in what the approach does inside contact range of the
            // blocker, and totals matter while single stretches do not
            let engaged = opp.position.dist(me_st.position) <= 2.0 * field.tag_radius;
            if !(engaged && blocking) {
                model.pressing_last = false;
                return model;
            }
            let pressing = opp.speed > PRESS_MIN_SPEED
                && angle_sep(opp.heading, bearing(opp.position, flag)) <= params.direct_heading_tol;
            model.pressing_last = pressing;
            if pressing {
                model.press_time += dt;
                if model.press_time >= params.direct_persist {
                    model.aggressive = Some(true);
                }
            } else {
                model.dodge_time += dt;
                if model.dodge_time >= params.dodge_persist {
                    model.aggressive = Some(false);
                }
            }
        }
        Some(false) if model.aggressive.is_none() => {
            let me_st = world.agent(me);
            let in_their_half = field.in_zone(my_team.opponent(), me_st.position);
            let pursued = in_their_half
                && opp.position.dist(me_st.position) < params.pursuit_range;
            match model.probe {
                ProbePhase::Idle => {
                    model.probe = ProbePhase::Transit {
                        mark: probe_mark(me_st.position, my_team, field, params),
                    };
                }
                ProbePhase::Transit { mark } => {
                    if pursued {
                        model.aggressive = Some(true);
                    } else if me_st.position.dist(mark) <= PROBE_ARRIVAL {
                        model.probe = ProbePhase::Pause {
                            mark,
                            since: elapsed,
                        };
                    }
                }
                ProbePhase::Pause { since, .. } => {
                    if pursued {
                        model.aggressive = Some(true);
                    } else if elapsed - since >= params.probe_pause {
                        model.aggressive = Some(false);
                    }
                }
            }
        }
        _ => {}
    }
    model
}

fn probe_mark(from: Vec2, team: Team, field: &FieldSpec, params: &StrategyParams) -> Vec2 {
    let x = field.midfield_x() + advance_sign(team) * params.probe_depth;
    let y = from.y.clamp(field.depth * 0.125, field.depth * 0.875);
    Vec2::new(x, y)
}

/// Post an observer holds while the opponent's first trait is still open.
/// Slots take vertically split posts so teammates stay clear of each other
/// and, more to the point, clear of the usual crossing lanes: a post inside
/// tag reach of an inbound track ends the observation with an instant tag.
fn observation_post(slot: usize, team: Team, field: &FieldSpec, params: &StrategyParams) -> Vec2 {
    let x = field.midfield_x() - advance_sign(team) * params.observe_hold_gap;
    let spread = field.depth * 0.2;
    let y = field.depth / 2.0 + if slot == 0 { spread } else { -spread };
    Vec2::new(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterPlan {
    /// Offensive + aggressive: intercept in our half, then strike while the
    /// opponent is far from the flag it guards.
    TagThenTimedAttack,
    /// Offensive + evasive: shepherd the intruder toward the boundary, attack
    /// once it is out of the way.
    HerdThenAttack,
    /// Home-guard + aggressive: bait the pursuer out of position, strike the
    /// opening, defend our half in between.
    LureThenStrike,
    /// Home-guard + passive: squat in their half and wait for the flag to be
    /// left open.
    CampForOpening,
}

impl CounterPlan {
    pub fn name(self) -> &'static str {
        match self {
            CounterPlan::TagThenTimedAttack => "tag_then_timed_attack",
            CounterPlan::HerdThenAttack => "herd_then_attack",
            CounterPlan::LureThenStrike => "lure_then_strike",
            CounterPlan::CampForOpening => "camp_for_opening",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("opponent model still has undecided traits")]
    Unclassified,
}

pub fn select_counter_strategy(model: &OpponentModel) -> Result<CounterPlan, ClassifierError> {
    match model.label() {
        Some((true, true)) => Ok(CounterPlan::TagThenTimedAttack),
        Some((true, false)) => Ok(CounterPlan::HerdThenAttack),
        Some((false, true)) => Ok(CounterPlan::LureThenStrike),
        Some((false, false)) => Ok(CounterPlan::CampForOpening),
        None => Err(ClassifierError::Unclassified),
    }
}

/// The tree a classifying agent runs this step: observation posture while a
/// trait is open, the committed counter plan afterwards.
pub fn plan_tree(
    model: &OpponentModel,
    world: &GameState,
    me: AgentId,
    slot: usize,
    field: &FieldSpec,
    params: &StrategyParams,
) -> ModeTree {
    match select_counter_strategy(model) {
        Ok(plan) => counter_tree(plan, model, world, me, field, params),
        Err(_) => observe_tree(model, world, me, slot, field, params),
    }
}

fn station_leaf(
    name: &str,
    hold: Vec2,
    field: &FieldSpec,
    params: &StrategyParams,
) -> ModeNode {
    ModeNode::leaf(
        name,
        Condition::Always,
        leaf_set(
            vec![BehaviorSpec::new(
                BehaviorKind::StationKeep { hold },
                params.station_weight,
            )],
            field,
            params,
        ),
    )
}

fn waypoint_leaf(
    name: &str,
    target: Vec2,
    extra: Vec<BehaviorSpec>,
    field: &FieldSpec,
    params: &StrategyParams,
) -> ModeNode {
    let mut tasks = vec![BehaviorSpec::new(
        BehaviorKind::Waypoint { target },
        params.task_weight,
    )];
    tasks.extend(extra);
    ModeNode::leaf(name, Condition::Always, leaf_set(tasks, field, params))
}

fn cut_leaf(name: &str, target: AgentId, field: &FieldSpec, params: &StrategyParams) -> ModeNode {
    ModeNode::leaf(
        name,
        Condition::Always,
        leaf_set(
            vec![BehaviorSpec::new(
                BehaviorKind::CutRange { target },
                params.task_weight,
            )],
            field,
            params,
        ),
    )
}

fn observe_tree(
    model: &OpponentModel,
    world: &GameState,
    me: AgentId,
    slot: usize,
    field: &FieldSpec,
    params: &StrategyParams,
) -> ModeTree {
    let my_team = world.agent(me).team;
    let posture = match (model.offensive, &model.probe) {
        // Crossing seen: stand on the approach line between intruder and flag.
        (Some(true), _) => {
            let opp = &world.agents[model.opponent];
            let flag = field.flag_home(my_team);
            if field.in_zone(my_team, opp.position) {
                let anchor = model.entry_point.unwrap_or(opp.position);
                waypoint_leaf("block", block_point(anchor, opp.position, flag), Vec::new(), field, params)
            } else {
                station_leaf(
                    "post",
                    observation_post(slot, my_team, field, params),
                    field,
                    params,
                )
            }
        }
        (Some(false), ProbePhase::Transit { mark }) => {
            waypoint_leaf("probe", *mark, Vec::new(), field, params)
        }
        (Some(false), ProbePhase::Pause { mark, .. }) => station_leaf("pause", *mark, field, params),
        _ => station_leaf(
            "post",
            observation_post(slot, my_team, field, params),
            field,
            params,
        ),
    };
    ModeTree::new(ModeNode::branch(
        "observe",
        Condition::Always,
        vec![return_home_leaf(my_team, field, params), posture],
    ))
}

/// Point on the approach line, a little flag-side of the intruder.
fn block_point(entry: Vec2, opp: Vec2, flag: Vec2) -> Vec2 {
    let axis = flag.sub(entry);
    let len = axis.len();
    if len < 1e-9 {
        return flag;
    }
    let u = axis.scale(1.0 / len);
    let along = (opp.sub(entry).x * u.x + opp.sub(entry).y * u.y).clamp(0.0, len);
    let stand = (along + 10.0).min(len - 5.0).max(0.0);
    entry.add(u.scale(stand))
}

fn counter_tree(
    plan: CounterPlan,
    model: &OpponentModel,
    world: &GameState,
    me: AgentId,
    field: &FieldSpec,
    params: &StrategyParams,
) -> ModeTree {
    let my_team = world.agent(me).team;
    let me_st = world.agent(me);
    let opp = &world.agents[model.opponent];
    let enemy_home = field.flag_home(my_team.opponent());
    let opp_guard_dist = opp.position.dist(enemy_home);
    let opp_intrudes = !opp.tagged && field.in_zone(my_team, opp.position);

    let mut children = vec![return_home_leaf(my_team, field, params)];
    match plan {
        CounterPlan::TagThenTimedAttack => {
            if opp_intrudes {
                children.push(cut_leaf("intercept", model.opponent, field, params));
            } else if opp_guard_dist > params.capture_timing_dist {
                children.push(waypoint_leaf(
                    "strike",
                    enemy_home,
                    vec![evade_ring(params)],
                    field,
                    params,
                ));
            }
            let stage = Vec2::new(
                field.midfield_x() - advance_sign(my_team) * params.observe_hold_gap,
                field.flag_home(my_team).y,
            );
            children.push(station_leaf("stage", stage, field, params));
        }
        CounterPlan::HerdThenAttack => {
            if opp_intrudes {
                children.push(waypoint_leaf(
                    "herd",
                    herd_point(opp.position, my_team, field, params),
                    Vec::new(),
                    field,
                    params,
                ));
            }
            // plain attacker: the evader poses no tag threat once shepherded off
            children.push(waypoint_leaf("attack", enemy_home, Vec::new(), field, params));
        }
        CounterPlan::LureThenStrike => {
            let in_their_half = field.in_zone(my_team.opponent(), me_st.position);
            let pursued =
                in_their_half && opp.position.dist(me_st.position) < params.pursuit_range;
            if let Some(target) = nearest_intruder(me, my_team, world, field) {
                children.push(cut_leaf("pursue", target, field, params));
            } else if pursued && !me_st.has_flag {
                let fallback = Vec2::new(
                    field.midfield_x() - advance_sign(my_team) * 15.0,
                    me_st.position.y,
                );
                children.push(waypoint_leaf("bait", fallback, Vec::new(), field, params));
            } else if opp_guard_dist > params.opportune_dist {
                children.push(waypoint_leaf(
                    "strike",
                    enemy_home,
                    vec![evade_ring(params)],
                    field,
                    params,
                ));
            }
            children.push(waypoint_leaf(
                "lure",
                probe_mark(me_st.position, my_team, field, params),
                Vec::new(),
                field,
                params,
            ));
        }
        CounterPlan::CampForOpening => {
            if let Some(target) = nearest_intruder(me, my_team, world, field) {
                children.push(cut_leaf("pursue", target, field, params));
            } else if opp_guard_dist > params.opportune_dist {
                children.push(waypoint_leaf("strike", enemy_home, Vec::new(), field, params));
            }
            let camp = Vec2::new(
                field.midfield_x() + advance_sign(my_team) * 25.0,
                field.depth / 2.0,
            );
            children.push(ModeNode::leaf(
                "camp",
                Condition::Always,
                leaf_set(
                    vec![BehaviorSpec::new(
                        BehaviorKind::Loiter {
                            center: camp,
                            radius: params.loiter_radius,
                            clockwise: true,
                        },
                        params.task_weight,
                    )],
                    field,
                    params,
                ),
            ));
        }
    }
    ModeTree::new(ModeNode::branch(plan.name(), Condition::Always, children))
}

/// Flank point for herding: flag-side of the evader, swung toward the field
/// interior so the evader gets driven at the boundary.
fn herd_point(evader: Vec2, team: Team, field: &FieldSpec, params: &StrategyParams) -> Vec2 {
    let toward_flag = bearing(evader, field.flag_home(team));
    let toward_center = bearing(
        evader,
        Vec2::new(field.width / 2.0, field.depth / 2.0),
    );
    let swing = crate::geom::angle_diff(toward_flag, toward_center).signum() * params.herd_angle;
    evader.add(heading_unit(toward_flag + swing).scale(HERD_FLANK_DIST))
}
