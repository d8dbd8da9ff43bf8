//! Game rules: tagging, grabs, captures, boundary handling, and the step
//! transition. Event resolution runs in a fixed order (out-of-bounds, tags,
//! untags, grabs, captures) with ties broken by ascending agent id, so
//! simultaneous events resolve deterministically.

use crate::dynamics::{clamp_action, integrate_motion, Action, ActionError, VehicleSpec};
use crate::field::{FieldSpec, Team};
use crate::state::{AgentId, AgentState, EventKind, GameEvent, GameState};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StepError {
    #[error("expected {expected} actions, got {got}")]
    ActionArity { expected: usize, got: usize },
    #[error("agent {agent}: {source}")]
    BadAction {
        agent: AgentId,
        source: ActionError,
    },
}

/// True iff `tagger` may tag `target` right now: opposing teams, tagger
/// untagged and inside its own zone, target untagged and inside the tagger's
/// zone, and separation within the tag radius (boundary inclusive).
pub fn check_tag_eligibility(tagger: &AgentState, target: &AgentState, field: &FieldSpec) -> bool {
    tagger.team != target.team
        && !tagger.tagged
        && !target.tagged
        && field.in_zone(tagger.team, tagger.position)
        && field.in_zone(tagger.team, target.position)
        && tagger.position.dist(target.position) <= field.tag_radius
}

fn return_flag_home(state: &mut GameState, flag_team: Team, field: &FieldSpec) {
    let home = field.flag_home(flag_team);
    let flag = state.flag_mut(flag_team);
    flag.position = home;
    flag.carrier = None;
    flag.at_home = true;
}

/// Drop whatever flag agent `id` carries; it teleports home.
fn drop_carried_flag(state: &mut GameState, id: AgentId, field: &FieldSpec) {
    if !state.agents[id].has_flag {
        return;
    }
    state.agents[id].has_flag = false;
    let opposing = state.agents[id].team.opponent();
    if state.flag(opposing).carrier == Some(id) {
        return_flag_home(state, opposing, field);
    }
}

/// Apply the rule pass to an already-integrated state. Order per step:
///
/// 1. boundary: an agent newly outside the field is auto-tagged (dropping any
///    carried flag) and emits one `OutOfBounds` event for the excursion;
/// 2. tags: every eligible (tagger, target) pair fires, taggers then targets
///    in ascending id; a tagged carrier loses the flag, which returns home;
/// 3. untag: a tagged agent within its own home-flag region becomes untagged;
/// 4. grabs: an untagged, flagless agent within the grab radius of the
///    opposing at-home flag takes it (+1 point);
/// 5. captures: a carrier inside its own base scores (+2 points), flag home.
///
/// Scores update atomically with the emitted events.
pub fn resolve_events(state: &mut GameState, field: &FieldSpec) -> Vec<GameEvent> {
    let mut events = Vec::new();
    let time = state.time;
    let n = state.agents.len();

    // 1. boundary
    for id in 0..n {
        let inside = field.in_bounds(state.agents[id].position);
        if inside {
            state.agents[id].oob = false;
            continue;
        }
        if state.agents[id].oob {
            continue; // already accounted for this excursion
        }
        state.agents[id].oob = true;
        state.agents[id].tagged = true;
        drop_carried_flag(state, id, field);
        events.push(GameEvent {
            kind: EventKind::OutOfBounds,
            actor: id,
            team: state.agents[id].team,
            victim: None,
            time,
        });
    }

    // 2. tags
    for tagger in 0..n {
        for target in 0..n {
            if !check_tag_eligibility(&state.agents[tagger], &state.agents[target], field) {
                continue;
            }
            let kind = if state.agents[target].has_flag {
                EventKind::TagWithFlag
            } else {
                EventKind::TagNoFlag
            };
            state.agents[target].tagged = true;
            drop_carried_flag(state, target, field);
            events.push(GameEvent {
                kind,
                actor: tagger,
                team: state.agents[tagger].team,
                victim: Some(target),
                time,
            });
        }
    }

    // 3. untag
    for id in 0..n {
        let a = &state.agents[id];
        if a.tagged && !a.oob && field.untag_region(a.team).contains(a.position) {
            state.agents[id].tagged = false;
        }
    }

    // 4. grabs
    for id in 0..n {
        let a = &state.agents[id];
        if a.tagged || a.has_flag {
            continue;
        }
        let team = a.team;
        let opposing = team.opponent();
        let pos = a.position;
        let flag = state.flag(opposing);
        if flag.at_home && pos.dist(flag.position) <= field.grab_radius {
            let flag = state.flag_mut(opposing);
            flag.at_home = false;
            flag.carrier = Some(id);
            flag.position = pos;
            state.agents[id].has_flag = true;
            state.scores.add(team, EventKind::Grab.points());
            events.push(GameEvent {
                kind: EventKind::Grab,
                actor: id,
                team,
                victim: None,
                time,
            });
        }
    }

    // 5. captures
    for id in 0..n {
        let a = &state.agents[id];
        if !a.has_flag {
            continue;
        }
        let team = a.team;
        if field.base(team).contains(a.position) {
            state.agents[id].has_flag = false;
            return_flag_home(state, team.opponent(), field);
            state.scores.add(team, EventKind::Capture.points());
            events.push(GameEvent {
                kind: EventKind::Capture,
                actor: id,
                team,
                victim: None,
                time,
            });
        }
    }

    state.event_history.extend(events.iter().cloned());
    events
}

/// One transition of the game: clamp and integrate every agent's action,
/// carry flags with their carriers, then run the rule pass. Deterministic
/// given (state, actions, specs).
pub fn step_game(
    state: &GameState,
    joint_action: &[Action],
    field: &FieldSpec,
    vehicle: &VehicleSpec,
) -> Result<(GameState, Vec<GameEvent>), StepError> {
    if joint_action.len() != state.agents.len() {
        return Err(StepError::ActionArity {
            expected: state.agents.len(),
            got: joint_action.len(),
        });
    }
    let mut next = state.clone();
    next.step_index = state.step_index + 1;
    next.time = next.step_index as f64 * vehicle.dt;

    for (agent, action) in next.agents.iter_mut().zip(joint_action) {
        let a = clamp_action(*action, vehicle).map_err(|source| StepError::BadAction {
            agent: agent.id,
            source,
        })?;
        *agent = integrate_motion(agent, a, vehicle);
    }
    for flag in next.flags.iter_mut() {
        if let Some(carrier) = flag.carrier {
            flag.position = next.agents[carrier].position;
        }
    }
    let events = resolve_events(&mut next, field);
    Ok((next, events))
}

/// True once the clock reaches the horizon.
pub fn is_terminal(state: &GameState, horizon: f64) -> bool {
    state.time >= horizon
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::state::Scores;

    fn agent(id: AgentId, team: Team, x: f64, y: f64) -> AgentState {
        AgentState {
            id,
            team,
            position: Vec2::new(x, y),
            heading: 90.0,
            speed: 0.0,
            has_flag: false,
            tagged: false,
            oob: false,
        }
    }

    fn base_state(field: &FieldSpec) -> GameState {
        GameState {
            time: 0.0,
            step_index: 0,
            agents: vec![
                agent(0, Team::Blue, 20.0, 40.0),
                agent(1, Team::Blue, 20.0, 30.0),
                agent(2, Team::Red, 140.0, 40.0),
                agent(3, Team::Red, 140.0, 30.0),
            ],
            flags: [
                crate::state::FlagState {
                    team: Team::Blue,
                    position: field.blue_flag_home,
                    carrier: None,
                    at_home: true,
                },
                crate::state::FlagState {
                    team: Team::Red,
                    position: field.red_flag_home,
                    carrier: None,
                    at_home: true,
                },
            ],
            scores: Scores::default(),
            event_history: Vec::new(),
        }
    }

    #[test]
    fn tag_eligibility_basic() {
        let field = FieldSpec::default();
        // untagged blue defender in blue zone, red intruder 8 m away in blue zone
        let defender = agent(0, Team::Blue, 40.0, 40.0);
        let intruder = agent(2, Team::Red, 48.0, 40.0);
        assert!(check_tag_eligibility(&defender, &intruder, &field));
    }

    #[test]
    fn tagged_tagger_is_ineligible() {
        let field = FieldSpec::default();
        let mut defender = agent(0, Team::Blue, 40.0, 40.0);
        defender.tagged = true;
        let intruder = agent(2, Team::Red, 48.0, 40.0);
        assert!(!check_tag_eligibility(&defender, &intruder, &field));
    }

    #[test]
    fn tag_boundary_is_inclusive() {
        let field = FieldSpec::default();
        let defender = agent(0, Team::Blue, 40.0, 40.0);
        let at_radius = agent(2, Team::Red, 50.0, 40.0); // exactly 10 m
        assert!(check_tag_eligibility(&defender, &at_radius, &field));
        let beyond = agent(2, Team::Red, 50.001, 40.0);
        assert!(!check_tag_eligibility(&defender, &beyond, &field));
    }

    #[test]
    fn tag_requires_intrusion() {
        let field = FieldSpec::default();
        // Blue agent in red zone can never be the tagger.
        let blue_in_red = agent(0, Team::Blue, 90.0, 40.0);
        let red_home = agent(2, Team::Red, 95.0, 40.0);
        assert!(!check_tag_eligibility(&blue_in_red, &red_home, &field));
        // But the red agent can tag it.
        assert!(check_tag_eligibility(&red_home, &blue_in_red, &field));
    }

    #[test]
    fn grab_scores_one_point() {
        let field = FieldSpec::default();
        let mut s = base_state(&field);
        s.agents[0].position = Vec2::new(145.0, 40.0); // within 10 m of red flag home
        s.agents[2].position = Vec2::new(90.0, 70.0); // defenders out of tag range
        s.agents[3].position = Vec2::new(90.0, 10.0);
        let events = resolve_events(&mut s, &field);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::Grab);
        assert_eq!(events[0].actor, 0);
        assert_eq!(s.scores.blue, 1);
        assert!(s.agents[0].has_flag);
        assert!(!s.flag(Team::Red).at_home);
        assert_eq!(s.flag(Team::Red).carrier, Some(0));
    }

    #[test]
    fn capture_scores_two_points_and_resets_flag() {
        let field = FieldSpec::default();
        let mut s = base_state(&field);
        // Blue agent 0 already carrying the red flag, inside blue base.
        s.agents[0].position = Vec2::new(12.0, 40.0);
        s.agents[0].has_flag = true;
        s.flags[1].at_home = false;
        s.flags[1].carrier = Some(0);
        s.flags[1].position = s.agents[0].position;
        let events = resolve_events(&mut s, &field);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::Capture);
        assert_eq!(s.scores.blue, 2);
        assert!(!s.agents[0].has_flag);
        assert!(s.flag(Team::Red).at_home);
        assert_eq!(s.flag(Team::Red).position, field.red_flag_home);
    }

    #[test]
    fn quiet_state_is_a_fixed_point() {
        let field = FieldSpec::default();
        let mut s = base_state(&field);
        let before = s.clone();
        let events = resolve_events(&mut s, &field);
        assert!(events.is_empty());
        assert_eq!(s, before);
    }

    #[test]
    fn tagging_a_carrier_returns_the_flag() {
        let field = FieldSpec::default();
        let mut s = base_state(&field);
        // Red agent 2 carries the blue flag, intruding in blue zone next to blue 0.
        s.agents[0].position = Vec2::new(40.0, 40.0);
        s.agents[2].position = Vec2::new(46.0, 40.0);
        s.agents[2].has_flag = true;
        s.flags[0].at_home = false;
        s.flags[0].carrier = Some(2);
        s.flags[0].position = s.agents[2].position;
        let events = resolve_events(&mut s, &field);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::TagWithFlag);
        assert_eq!(events[0].actor, 0);
        assert_eq!(events[0].victim, Some(2));
        assert!(s.agents[2].tagged);
        assert!(!s.agents[2].has_flag);
        assert!(s.flag(Team::Blue).at_home);
        assert_eq!(s.scores, Scores::default()); // tags score no game points
    }

    #[test]
    fn untag_at_home_flag_region() {
        let field = FieldSpec::default();
        let mut s = base_state(&field);
        s.agents[2].tagged = true;
        s.agents[2].position = Vec2::new(145.0, 40.0); // within red base radius of red flag home
        let events = resolve_events(&mut s, &field);
        assert!(events.is_empty());
        assert!(!s.agents[2].tagged);
    }

    #[test]
    fn oob_auto_tags_once_per_excursion() {
        let field = FieldSpec::default();
        let mut s = base_state(&field);
        s.agents[0].position = Vec2::new(-3.0, 40.0);
        let events = resolve_events(&mut s, &field);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::OutOfBounds);
        assert!(s.agents[0].tagged && s.agents[0].oob);
        // Still outside next pass: no duplicate event.
        let events2 = resolve_events(&mut s, &field);
        assert!(events2.is_empty());
        // Re-entering clears the excursion latch (still tagged).
        s.agents[0].position = Vec2::new(30.0, 40.0);
        let events3 = resolve_events(&mut s, &field);
        assert!(events3.is_empty());
        assert!(!s.agents[0].oob && s.agents[0].tagged);
    }

    #[test]
    fn step_rejects_wrong_arity() {
        let field = FieldSpec::default();
        let vehicle = VehicleSpec::default();
        let s = base_state(&field);
        let err = step_game(&s, &[Action::HALT; 3], &field, &vehicle).unwrap_err();
        assert_eq!(err, StepError::ActionArity { expected: 4, got: 3 });
    }

    #[test]
    fn zero_speed_step_only_advances_clock() {
        let field = FieldSpec::default();
        let vehicle = VehicleSpec::default();
        let s = base_state(&field);
        let halts: Vec<Action> = s
            .agents
            .iter()
            .map(|a| Action::new(0.0, a.heading))
            .collect();
        let (next, events) = step_game(&s, &halts, &field, &vehicle).unwrap();
        assert!(events.is_empty());
        assert_eq!(next.step_index, 1);
        assert!((next.time - vehicle.dt).abs() < 1e-12);
        for (a, b) in s.agents.iter().zip(&next.agents) {
            assert_eq!(a.position, b.position);
        }
    }

    #[test]
    fn commanding_across_the_boundary_auto_tags() {
        let field = FieldSpec::default();
        let vehicle = VehicleSpec::default();
        let mut s = base_state(&field);
        s.agents[0].position = Vec2::new(0.1, 40.0);
        s.agents[0].heading = 270.0; // facing out
        s.agents[0].speed = 2.5;
        let mut actions = vec![Action::HALT; 4];
        actions[0] = Action::new(2.5, 270.0);
        let (next, events) = step_game(&s, &actions, &field, &vehicle).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::OutOfBounds);
        assert!(next.agents[0].tagged);
    }

    #[test]
    fn terminal_boundary() {
        let field = FieldSpec::default();
        let mut s = base_state(&field);
        assert!(!is_terminal(&s, 600.0));
        s.time = 600.0;
        assert!(is_terminal(&s, 600.0));
        s.time = 600.0 - 0.1;
        assert!(!is_terminal(&s, 600.0));
    }

    #[test]
    fn converging_opponents_produce_one_asymmetric_tag() {
        let field = FieldSpec::default();
        let mut s = base_state(&field);
        // Both inside blue zone: only the blue agent is an eligible tagger.
        s.agents[0].position = Vec2::new(60.0, 40.0);
        s.agents[2].position = Vec2::new(66.0, 40.0);
        let events = resolve_events(&mut s, &field);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, EventKind::TagNoFlag);
        assert_eq!(events[0].actor, 0);
        assert_eq!(events[0].victim, Some(2));
        assert!(!s.agents[0].tagged);
        assert!(s.agents[2].tagged);
    }
}
