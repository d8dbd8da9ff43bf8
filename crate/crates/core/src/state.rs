//! Joint game state: agents, flags, scores, clock, and the event record.

use crate::field::{FieldSpec, Team};
use crate::geom::Vec2;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Global agent index. Blue agents come first, then red; within a team the
/// slot order is stable for a whole game.
pub type AgentId = usize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    pub team: Team,
    pub position: Vec2,
    /// Compass degrees in `[0, 360)`. Stored continuously; discretized only at
    /// the helm decision domain and the learning observation boundary.
    pub heading: f64,
    /// Realized speed, m/s.
    pub speed: f64,
    pub has_flag: bool,
    pub tagged: bool,
    /// True while the agent is outside the play boundary. Used to emit the
    /// boundary event once per excursion.
    pub oob: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagState {
    pub team: Team,
    pub position: Vec2,
    pub carrier: Option<AgentId>,
    pub at_home: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// Tagger neutralized an intruder not carrying a flag.
    TagNoFlag,
    /// Tagger neutralized a flag carrier; the flag was returned home.
    TagWithFlag,
    /// Agent took the opposing flag from its home (+1 point).
    Grab,
    /// Carrier returned the flag to its own base (+2 points).
    Capture,
    /// Agent left the play boundary and was auto-tagged.
    OutOfBounds,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::TagNoFlag => "tag_no_flag",
            EventKind::TagWithFlag => "tag_with_flag",
            EventKind::Grab => "grab",
            EventKind::Capture => "capture",
            EventKind::OutOfBounds => "out_of_bounds",
        }
    }

    /// Game points awarded to the acting team.
    pub fn points(self) -> u32 {
        match self {
            EventKind::Grab => 1,
            EventKind::Capture => 2,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    pub kind: EventKind,
    pub actor: AgentId,
    /// Acting team (the tagger's team for tags, the moving agent's otherwise).
    pub team: Team,
    /// Tag events carry the tagged agent; other kinds never do.
    pub victim: Option<AgentId>,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub blue: u32,
    pub red: u32,
}

impl Scores {
    pub fn get(&self, team: Team) -> u32 {
        match team {
            Team::Blue => self.blue,
            Team::Red => self.red,
        }
    }

    pub fn add(&mut self, team: Team, points: u32) {
        match team {
            Team::Blue => self.blue += points,
            Team::Red => self.red += points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    /// Seconds since game start; always `step_index * dt`.
    pub time: f64,
    pub step_index: u64,
    pub agents: Vec<AgentState>,
    /// Indexed by team: `[blue flag, red flag]`.
    pub flags: [FlagState; 2],
    pub scores: Scores,
    pub event_history: Vec<GameEvent>,
}

impl GameState {
    pub fn flag(&self, team: Team) -> &FlagState {
        match team {
            Team::Blue => &self.flags[0],
            Team::Red => &self.flags[1],
        }
    }

    pub fn flag_mut(&mut self, team: Team) -> &mut FlagState {
        match team {
            Team::Blue => &mut self.flags[0],
            Team::Red => &mut self.flags[1],
        }
    }

    pub fn agent(&self, id: AgentId) -> &AgentState {
        &self.agents[id]
    }

    /// Ids of `team`'s agents in ascending order.
    pub fn team_agents(&self, team: Team) -> Vec<AgentId> {
        self.agents
            .iter()
            .filter(|a| a.team == team)
            .map(|a| a.id)
            .collect()
    }

    /// The other agent on `id`'s team, if any.
    pub fn teammate_of(&self, id: AgentId) -> Option<&AgentState> {
        let team = self.agents[id].team;
        self.agents.iter().find(|a| a.team == team && a.id != id)
    }

    /// Untagged opponents of `team` currently inside `team`'s zone.
    pub fn intruders(&self, team: Team, field: &FieldSpec) -> Vec<AgentId> {
        self.agents
            .iter()
            .filter(|a| a.team != team && !a.tagged && field.in_zone(team, a.position))
            .map(|a| a.id)
            .collect()
    }

    /// Nearest untagged opponent of agent `id`, by ascending distance then id.
    pub fn nearest_untagged_opponent(&self, id: AgentId) -> Option<AgentId> {
        let me = &self.agents[id];
        self.agents
            .iter()
            .filter(|a| a.team != me.team && !a.tagged)
            .min_by(|a, b| {
                let da = a.position.dist(me.position);
                let db = b.position.dist(me.position);
                da.partial_cmp(&db).unwrap().then(a.id.cmp(&b.id))
            })
            .map(|a| a.id)
    }
}

/// Deterministic per-slot spawn offsets keep teammates apart inside the base.
/// Red's offsets are negated so the joint layout is invariant under a 180
/// degree rotation about field center; an axis mirror alone would not be,
/// because loiter orbits keep their turn direction.
const SPAWN_SLOT_OFFSETS: [Vec2; 2] = [Vec2 { x: 0.0, y: 6.0 }, Vec2 { x: 0.0, y: -6.0 }];

/// Build the initial joint state: two agents per team inside their base,
/// facing midfield, flags at home. `rng` jitters spawn positions by up to
/// ±2 m per axis so seeded games differ.
pub fn initial_state<R: Rng>(field: &FieldSpec, rng: &mut R) -> GameState {
    let mut agents = Vec::with_capacity(4);
    for (idx, team) in [(0, Team::Blue), (1, Team::Blue), (0, Team::Red), (1, Team::Red)]
        .iter()
        .map(|&(slot, team)| (slot, team))
    {
        let base = field.base(team);
        let jitter = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let slot_sign = match team {
            Team::Blue => 1.0,
            Team::Red => -1.0,
        };
        let position = base
            .center
            .add(SPAWN_SLOT_OFFSETS[idx].scale(slot_sign))
            .add(jitter);
        let heading = match team {
            Team::Blue => 90.0,
            Team::Red => 270.0,
        };
        agents.push(AgentState {
            id: agents.len(),
            team,
            position,
            heading,
            speed: 0.0,
            has_flag: false,
            tagged: false,
            oob: false,
        });
    }
    GameState {
        time: 0.0,
        step_index: 0,
        agents,
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
        scores: Scores::default(),
        event_history: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn spawns_inside_own_base() {
        let field = FieldSpec::default();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let s = initial_state(&field, &mut rng);
        assert_eq!(s.agents.len(), 4);
        for a in &s.agents {
            assert!(field.base(a.team).contains(a.position), "agent {} outside base", a.id);
            assert!(!a.tagged && !a.has_flag && !a.oob);
        }
        assert!(s.flags[0].at_home && s.flags[1].at_home);
        assert_eq!(s.scores, Scores::default());
    }

    #[test]
    fn seeded_spawns_reproduce() {
        let field = FieldSpec::default();
        let a = initial_state(&field, &mut ChaCha12Rng::seed_from_u64(3));
        let b = initial_state(&field, &mut ChaCha12Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }
}
