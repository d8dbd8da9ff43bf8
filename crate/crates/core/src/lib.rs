//! Core engine for a 2-v-2 maritime capture-the-flag game: deterministic
//! vehicle dynamics, game rules, a multi-objective helm, scripted and
//! adaptive opposing strategies, and a tabular reinforcement-learning layer.

pub mod dynamics;
pub mod field;
pub mod geom;
pub mod harness;
pub mod helm;
pub mod rl;
pub mod rules;
pub mod seed;
pub mod state;
pub mod strategies;

pub use dynamics::{Action, VehicleSpec};
pub use field::{FieldSpec, Team};
pub use geom::Vec2;
pub use rules::{is_terminal, resolve_events, step_game};
pub use state::{AgentId, AgentState, EventKind, FlagState, GameEvent, GameState, Scores};
