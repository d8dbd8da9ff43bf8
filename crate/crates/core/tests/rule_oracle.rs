//! Cross-checks resolve_events against a from-scratch reference evaluator on
//! an enumerated grid of joint configurations (positions x tag status x flag
//! possession for one agent of each team), and property-tests the structural
//! game invariants on randomized states.

use flagship_core::field::{FieldSpec, Team};
use flagship_core::geom::Vec2;
use flagship_core::rules::resolve_events;
use flagship_core::state::{
    AgentState, EventKind, FlagState, GameEvent, GameState, Scores,
};
use proptest::prelude::*;

/// Reference rule pass, transcribed independently from the game rules with
/// no shared code beyond the state types: boundary auto-tag, then tags, then
/// untag, then grabs, then captures, ids ascending throughout.
fn reference_resolve(state: &GameState, field: &FieldSpec) -> (GameState, Vec<GameEvent>) {
    let mut s = state.clone();
    let mut events = Vec::new();
    let mid = field.width / 2.0;
    let in_own_half = |team: Team, p: Vec2| match team {
        Team::Blue => p.x < mid,
        Team::Red => p.x >= mid,
    };
    let drop_flag = |s: &mut GameState, i: usize| {
        if s.agents[i].has_flag {
            s.agents[i].has_flag = false;
            let f = match s.agents[i].team {
                Team::Blue => &mut s.flags[1],
                Team::Red => &mut s.flags[0],
            };
            f.carrier = None;
            f.at_home = true;
            f.position = match s.agents[i].team {
                Team::Blue => field.red_flag_home,
                Team::Red => field.blue_flag_home,
            };
        }
    };

    // boundary
    for i in 0..s.agents.len() {
        let p = s.agents[i].position;
        let outside =
            p.x < 0.0 || p.x > field.width || p.y < 0.0 || p.y > field.depth;
        if !outside {
            s.agents[i].oob = false;
        } else if !s.agents[i].oob {
            s.agents[i].oob = true;
            s.agents[i].tagged = true;
            drop_flag(&mut s, i);
            events.push(GameEvent {
                kind: EventKind::OutOfBounds,
                actor: i,
                team: s.agents[i].team,
                victim: None,
                time: s.time,
            });
        }
    }

    // tags
    for tagger in 0..s.agents.len() {
        for target in 0..s.agents.len() {
            let (tg, tt) = (&s.agents[tagger], &s.agents[target]);
            if tg.team == tt.team
                || tg.tagged
                || tt.tagged
                || !in_own_half(tg.team, tg.position)
                || !in_own_half(tg.team, tt.position)
                || tg.position.dist(tt.position) > field.tag_radius
            {
                continue;
            }
            let kind = if tt.has_flag {
                EventKind::TagWithFlag
            } else {
                EventKind::TagNoFlag
            };
            let team = s.agents[tagger].team;
            s.agents[target].tagged = true;
            drop_flag(&mut s, target);
            events.push(GameEvent {
                kind,
                actor: tagger,
                team,
                victim: Some(target),
                time: s.time,
            });
        }
    }

    // untag
    for i in 0..s.agents.len() {
        let a = &s.agents[i];
        let home = match a.team {
            Team::Blue => field.blue_flag_home,
            Team::Red => field.red_flag_home,
        };
        let base_r = match a.team {
            Team::Blue => field.blue_base.radius,
            Team::Red => field.red_base.radius,
        };
        if a.tagged && !a.oob && a.position.dist(home) <= base_r {
            s.agents[i].tagged = false;
        }
    }

    // grabs
    for i in 0..s.agents.len() {
        let a = &s.agents[i];
        if a.tagged || a.has_flag {
            continue;
        }
        let (fidx, team) = match a.team {
            Team::Blue => (1usize, Team::Blue),
            Team::Red => (0usize, Team::Red),
        };
        if s.flags[fidx].at_home && a.position.dist(s.flags[fidx].position) <= field.grab_radius
        {
            let pos = a.position;
            s.flags[fidx].at_home = false;
            s.flags[fidx].carrier = Some(i);
            s.flags[fidx].position = pos;
            s.agents[i].has_flag = true;
            match team {
                Team::Blue => s.scores.blue += 1,
                Team::Red => s.scores.red += 1,
            }
            events.push(GameEvent {
                kind: EventKind::Grab,
                actor: i,
                team,
                victim: None,
                time: s.time,
            });
        }
    }

    // captures
    for i in 0..s.agents.len() {
        let a = &s.agents[i];
        if !a.has_flag {
            continue;
        }
        let team = a.team;
        let base = match team {
            Team::Blue => field.blue_base,
            Team::Red => field.red_base,
        };
        if a.position.dist(base.center) <= base.radius {
            s.agents[i].has_flag = false;
            let fidx = match team {
                Team::Blue => 1usize,
                Team::Red => 0usize,
            };
            s.flags[fidx].carrier = None;
            s.flags[fidx].at_home = true;
            s.flags[fidx].position = match team {
                Team::Blue => field.red_flag_home,
                Team::Red => field.blue_flag_home,
            };
            match team {
                Team::Blue => s.scores.blue += 2,
                Team::Red => s.scores.red += 2,
            }
            events.push(GameEvent {
                kind: EventKind::Capture,
                actor: i,
                team,
                victim: None,
                time: s.time,
            });
        }
    }

    s.event_history.extend(events.iter().cloned());
    (s, events)
}

fn agent(id: usize, team: Team, pos: Vec2) -> AgentState {
    AgentState {
        id,
        team,
        position: pos,
        heading: 0.0,
        speed: 0.0,
        has_flag: false,
        tagged: false,
        oob: false,
    }
}

fn fresh_state(field: &FieldSpec, blue_pos: Vec2, red_pos: Vec2) -> GameState {
    GameState {
        time: 7.5,
        step_index: 75,
        agents: vec![
            agent(0, Team::Blue, blue_pos),
            agent(1, Team::Blue, Vec2::new(20.0, 70.0)), // parked clear of everything
            agent(2, Team::Red, red_pos),
            agent(3, Team::Red, Vec2::new(140.0, 70.0)),
        ],
        flags: [
            FlagState {
                team: Team::Blue,
                position: field.blue_flag_home,
                carrier: None,
                at_home: true,
            },
            FlagState {
                team: Team::Red,
                position: field.red_flag_home,
                carrier: None,
                at_home: true,
            },
        ],
        scores: Scores { blue: 3, red: 1 },
        event_history: Vec::new(),
    }
}

/// Give agent `id` its opposing flag if the combination is legal; returns
/// false for combinations the game can never reach (tagged carriers).
fn try_give_flag(s: &mut GameState, id: usize) -> bool {
    if s.agents[id].tagged {
        return false;
    }
    let fidx = match s.agents[id].team {
        Team::Blue => 1usize,
        Team::Red => 0usize,
    };
    s.agents[id].has_flag = true;
    s.flags[fidx].at_home = false;
    s.flags[fidx].carrier = Some(id);
    s.flags[fidx].position = s.agents[id].position;
    true
}

#[test]
fn resolve_events_matches_reference_on_enumerated_grid() {
    let field = FieldSpec::default();
    let blue_positions = [
        Vec2::new(10.0, 40.0),  // own flag home
        Vec2::new(40.0, 40.0),  // own zone
        Vec2::new(79.0, 40.0),  // own side of midfield
        Vec2::new(145.0, 40.0), // enemy flag in grab range
        Vec2::new(120.0, 40.0), // enemy zone
        Vec2::new(-5.0, 40.0),  // out of bounds
    ];
    let red_positions = [
        Vec2::new(150.0, 40.0),
        Vec2::new(120.0, 40.0),
        Vec2::new(81.0, 40.0),
        Vec2::new(15.0, 40.0),
        Vec2::new(40.0, 40.0),
        Vec2::new(165.0, 40.0),
    ];
    // the second blue agent either idles out of range or sits tagged on its
    // own flag home, which exercises untagging alongside everything else
    let helper_variants = [
        (Vec2::new(20.0, 70.0), false),
        (Vec2::new(10.0, 40.0), true),
    ];
    let mut configs = 0usize;
    for (helper_pos, helper_tagged) in helper_variants {
        for bp in blue_positions {
            for rp in red_positions {
                for blue_tagged in [false, true] {
                    for red_tagged in [false, true] {
                        for blue_carries in [false, true] {
                            for red_carries in [false, true] {
                                let mut s = fresh_state(&field, bp, rp);
                                s.agents[0].tagged = blue_tagged;
                                s.agents[2].tagged = red_tagged;
                                s.agents[1].position = helper_pos;
                                s.agents[1].tagged = helper_tagged;
                                if blue_carries && !try_give_flag(&mut s, 0) {
                                    continue;
                                }
                                if red_carries && !try_give_flag(&mut s, 2) {
                                    continue;
                                }
                                let (ref_state, ref_events) = reference_resolve(&s, &field);
                                let mut impl_state = s.clone();
                                let impl_events = resolve_events(&mut impl_state, &field);
                                assert_eq!(
                                    impl_events, ref_events,
                                    "events diverge at blue {bp:?} red {rp:?} \
                                     tags ({blue_tagged},{red_tagged}) carry ({blue_carries},{red_carries})"
                                );
                                assert_eq!(
                                    impl_state, ref_state,
                                    "states diverge at blue {bp:?} red {rp:?}"
                                );
                                configs += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(configs > 600, "grid shrank to {configs} configurations");
    assert!(configs <= 10_000);
}

fn arb_position() -> impl Strategy<Value = Vec2> {
    (-20.0..180.0f64, -20.0..100.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

fn arb_state() -> impl Strategy<Value = GameState> {
    (
        proptest::collection::vec(arb_position(), 4),
        proptest::collection::vec(any::<bool>(), 4),
        0usize..3,
        0usize..3,
    )
        .prop_map(|(positions, tagged, blue_carry_sel, red_carry_sel)| {
            let field = FieldSpec::default();
            let mut s = fresh_state(&field, positions[0], positions[2]);
            s.agents[1].position = positions[1];
            s.agents[3].position = positions[3];
            for (i, t) in tagged.iter().enumerate() {
                s.agents[i].tagged = *t;
            }
            // carry selector: 0/1 pick a team member as carrier, 2 = nobody
            if blue_carry_sel < 2 {
                try_give_flag(&mut s, blue_carry_sel);
            }
            if red_carry_sel < 2 {
                try_give_flag(&mut s, 2 + red_carry_sel);
            }
            s
        })
}

proptest! {
    /// Score deltas come only from grabs (+1) and captures (+2).
    #[test]
    fn score_delta_matches_event_points(s in arb_state()) {
        let field = FieldSpec::default();
        let before = s.scores;
        let mut after = s.clone();
        let events = resolve_events(&mut after, &field);
        for team in [Team::Blue, Team::Red] {
            let expected: u32 = events
                .iter()
                .filter(|e| e.team == team)
                .map(|e| e.kind.points())
                .sum();
            prop_assert_eq!(after.scores.get(team), before.get(team) + expected);
        }
    }

    /// Every flag is at home or carried by exactly one untagged opponent
    /// standing at the flag's position.
    #[test]
    fn flag_integrity_after_resolution(s in arb_state()) {
        let field = FieldSpec::default();
        let mut after = s.clone();
        resolve_events(&mut after, &field);
        for flag in &after.flags {
            match flag.carrier {
                None => {
                    prop_assert!(flag.at_home);
                    let home = field.flag_home(flag.team);
                    prop_assert_eq!(flag.position, home);
                }
                Some(c) => {
                    prop_assert!(!flag.at_home);
                    let carrier = &after.agents[c];
                    prop_assert!(carrier.has_flag);
                    prop_assert!(!carrier.tagged);
                    prop_assert_ne!(carrier.team, flag.team);
                    prop_assert_eq!(flag.position, carrier.position);
                }
            }
        }
        let blue_carriers = after.agents.iter().filter(|a| a.team == Team::Blue && a.has_flag).count();
        let red_carriers = after.agents.iter().filter(|a| a.team == Team::Red && a.has_flag).count();
        prop_assert!(blue_carriers <= 1 && red_carriers <= 1);
    }

    /// An agent standing in its opponents' half never emits a tag.
    #[test]
    fn no_tags_from_enemy_territory(s in arb_state()) {
        let field = FieldSpec::default();
        let mut after = s.clone();
        let events = resolve_events(&mut after, &field);
        for e in &events {
            if matches!(e.kind, EventKind::TagNoFlag | EventKind::TagWithFlag) {
                let tagger = &s.agents[e.actor];
                prop_assert!(field.in_zone(tagger.team, tagger.position));
            }
        }
    }

    /// Tagged agents never hold a flag once events settle.
    #[test]
    fn tagged_agents_hold_nothing(s in arb_state()) {
        let field = FieldSpec::default();
        let mut after = s.clone();
        resolve_events(&mut after, &field);
        for a in &after.agents {
            prop_assert!(!(a.tagged && a.has_flag));
        }
    }
}
