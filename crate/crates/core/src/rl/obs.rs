//! Discretized observations for tabular learning. Everything an agent senses
//! is bucketed into a small hashable key: a coarse position cell, a heading
//! segment, own status bits, a (bearing segment, range bucket, status) triple
//! per other agent, and both flags' at-home bits.

use crate::field::FieldSpec;
use crate::geom::{bearing, normalize_deg};
use crate::state::{AgentId, GameState};
use serde::{Deserialize, Serialize};

/// Position grid laid over the field, x by y.
pub const POSITION_CELLS_X: usize = 8;
pub const POSITION_CELLS_Y: usize = 4;

/// Range bucket upper edges in meters; everything beyond the last edge lands
/// in the final bucket.
pub const RANGE_EDGES: [f64; 3] = [10.0, 25.0, 60.0];

/// Heading segment count used by the learner (coarser than the helm grid).
pub const RL_HEADING_SEGMENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OtherAgent {
    /// Bearing to the agent, relative to own heading, bucketed like headings.
    pub bearing_segment: u8,
    pub range_bucket: u8,
    pub has_flag: bool,
    pub tagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObservationFeatures {
    pub position_cell: u8,
    pub heading_segment: u8,
    pub has_flag: bool,
    pub tagged: bool,
    /// Other agents in ascending id order, self excluded.
    pub others: [OtherAgent; 3],
    pub own_flag_at_home: bool,
    pub enemy_flag_at_home: bool,
}

/// floor(theta * k / 360) over the wrapped heading, so segment i spans
/// [i*360/k, (i+1)*360/k).
pub fn heading_segment(heading_deg: f64, k: usize) -> u8 {
    let h = normalize_deg(heading_deg);
    let seg = (h * k as f64 / 360.0).floor() as usize;
    seg.min(k - 1) as u8
}

fn range_bucket(dist: f64) -> u8 {
    RANGE_EDGES.iter().position(|edge| dist < *edge).unwrap_or(RANGE_EDGES.len()) as u8
}

fn position_cell(p: crate::geom::Vec2, field: &FieldSpec) -> u8 {
    let cx = ((p.x / field.width * POSITION_CELLS_X as f64).floor() as isize)
        .clamp(0, POSITION_CELLS_X as isize - 1) as usize;
    let cy = ((p.y / field.depth * POSITION_CELLS_Y as f64).floor() as isize)
        .clamp(0, POSITION_CELLS_Y as isize - 1) as usize;
    (cy * POSITION_CELLS_X + cx) as u8
}

/// Deterministic bucketing of one agent's view of the world. `k_segments`
/// controls heading and relative-bearing resolution.
pub fn discretize_observation(
    world: &GameState,
    agent: AgentId,
    field: &FieldSpec,
    k_segments: usize,
) -> ObservationFeatures {
    let me = world.agent(agent);
    let mut others = [OtherAgent {
        bearing_segment: 0,
        range_bucket: 0,
        has_flag: false,
        tagged: false,
    }; 3];
    let mut slot = 0;
    for other in &world.agents {
        if other.id == agent {
            continue;
        }
        let rel = normalize_deg(bearing(me.position, other.position) - me.heading);
        others[slot] = OtherAgent {
            bearing_segment: heading_segment(rel, k_segments),
            range_bucket: range_bucket(me.position.dist(other.position)),
            has_flag: other.has_flag,
            tagged: other.tagged,
        };
        slot += 1;
    }
    ObservationFeatures {
        position_cell: position_cell(me.position, field),
        heading_segment: heading_segment(me.heading, k_segments),
        has_flag: me.has_flag,
        tagged: me.tagged,
        others,
        own_flag_at_home: world.flag(me.team).at_home,
        enemy_flag_at_home: world.flag(me.team.opponent()).at_home,
    }
}
