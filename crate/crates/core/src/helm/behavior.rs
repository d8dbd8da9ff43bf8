//! Behavior utility functions. Each behavior maps its parameters plus the
//! current world into a utility surface over the decision domain. Values stay
//! in [0,100]; weighting happens later in the solver.

use super::{DecisionDomain, ObjectiveSurface};
use crate::field::Rect;
use crate::geom::{angle_diff, bearing, heading_unit, Vec2};
use crate::state::{AgentId, AgentState, GameState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Distance at which Waypoint starts trading speed for arrival precision.
const WAYPOINT_SLOW_RADIUS: f64 = 5.0;
/// Loiter steers at the circle point this many degrees ahead of the agent's
/// current angular position, which produces the orbit without any memory.
const LOITER_LEAD_DEG: f64 = 30.0;
/// CutRange aims where the target will be this many seconds from now.
const CUT_RANGE_LEAD_S: f64 = 3.0;
/// OpRegion wakes up inside this buffer of the boundary, not only beyond it.
const OP_REGION_MARGIN: f64 = 5.0;
/// StationKeep holds position when within this radius of the hold point.
const STATION_KEEP_RADIUS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BehaviorKind {
    Waypoint { target: Vec2 },
    Loiter { center: Vec2, radius: f64, clockwise: bool },
    CutRange { target: AgentId },
    AvoidCollision { standoff: f64 },
    OpRegion { region: Rect },
    StationKeep { hold: Vec2 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorSpec {
    #[serde(flatten)]
    pub kind: BehaviorKind,
    pub priority_weight: f64,
}

impl BehaviorSpec {
    pub fn new(kind: BehaviorKind, priority_weight: f64) -> Self {
        BehaviorSpec {
            kind,
            priority_weight,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            BehaviorKind::Waypoint { .. } => "waypoint",
            BehaviorKind::Loiter { .. } => "loiter",
            BehaviorKind::CutRange { .. } => "cut_range",
            BehaviorKind::AvoidCollision { .. } => "avoid_collision",
            BehaviorKind::OpRegion { .. } => "op_region",
            BehaviorKind::StationKeep { .. } => "station_keep",
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.priority_weight.is_finite() || self.priority_weight < 0.0 {
            return Err(format!("bad priority weight {}", self.priority_weight));
        }
        match &self.kind {
            BehaviorKind::Loiter { radius, .. } if *radius <= 0.0 => {
                Err(format!("loiter radius {radius} must be positive"))
            }
            BehaviorKind::AvoidCollision { standoff } if *standoff <= 0.0 => {
                Err(format!("standoff {standoff} must be positive"))
            }
            BehaviorKind::OpRegion { region }
                if region.max.x <= region.min.x || region.max.y <= region.min.y =>
            {
                Err("degenerate operating region".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BehaviorError {
    #[error("cut-range target agent {0} does not exist")]
    MissingTarget(AgentId),
}

/// Waypoint-family surface: best at the bin pointing along `brg`, best at
/// `v_des`, multiplicative in both. `scale` caps the peak utility.
fn steer_surface(dom: &DecisionDomain, brg: f64, v_des: f64, scale: f64) -> ObjectiveSurface {
    let v_top = dom.top_speed();
    let ang: Vec<f64> = (0..dom.heading_bins)
        .map(|h| 1.0 - angle_diff(dom.heading_of(h), brg).abs() / 180.0)
        .collect();
    let pref: Vec<f64> = dom
        .speed_bins
        .iter()
        .map(|v| {
            if v_top > 0.0 {
                1.0 - (v - v_des).abs() / v_top
            } else {
                1.0
            }
        })
        .collect();
    ObjectiveSurface::from_fn(dom, |h, s| scale * ang[h] * pref[s])
}

fn waypoint_surface(dom: &DecisionDomain, own: Vec2, target: Vec2) -> ObjectiveSurface {
    let d = own.dist(target);
    let v_des = dom.top_speed() * (d / WAYPOINT_SLOW_RADIUS).min(1.0);
    steer_surface(dom, bearing(own, target), v_des, 100.0)
}

fn loiter_carrot(own: Vec2, center: Vec2, radius: f64, clockwise: bool) -> Vec2 {
    let at = bearing(center, own);
    let lead = if clockwise {
        LOITER_LEAD_DEG
    } else {
        -LOITER_LEAD_DEG
    };
    center.add(heading_unit(at + lead).scale(radius))
}

fn avoid_collision_surface(
    dom: &DecisionDomain,
    own: &AgentState,
    world: &GameState,
    standoff: f64,
) -> ObjectiveSurface {
    let contacts: Vec<(f64, f64, bool)> = world
        .agents
        .iter()
        .filter(|a| a.id != own.id)
        .map(|a| {
            (
                own.position.dist(a.position),
                bearing(own.position, a.position),
                a.team != own.team,
            )
        })
        .filter(|(d, _, _)| *d <= 2.0 * standoff)
        .collect();
    if contacts.is_empty() {
        return ObjectiveSurface::uniform(dom, 100.0);
    }
    // an opponent inside the standoff forces a full stop; teammates only
    // shape the closing penalty below
    if contacts.iter().any(|(d, _, opp)| *opp && *d <= standoff) {
        return ObjectiveSurface::from_fn(dom, |_, s| {
            if dom.speed_bins[s] == 0.0 {
                100.0
            } else {
                0.0
            }
        });
    }
    let v_top = dom.top_speed();
    // per-contact closing factor: worse the faster we close on a near contact
    let mut penalty = vec![1.0; dom.cells()];
    for (d, brg, _) in &contacts {
        let prox = ((2.0 * standoff - d) / standoff).clamp(0.0, 1.0);
        for h in 0..dom.heading_bins {
            let closing = angle_diff(dom.heading_of(h), *brg)
                .to_radians()
                .cos()
                .max(0.0);
            for (s, v) in dom.speed_bins.iter().enumerate() {
                let f = 1.0 - closing * (v / v_top) * prox;
                penalty[h * dom.speed_bins.len() + s] *= f;
            }
        }
    }
    ObjectiveSurface::from_fn(dom, |h, s| 100.0 * penalty[h * dom.speed_bins.len() + s])
}

fn op_region_surface(dom: &DecisionDomain, own: Vec2, region: &Rect) -> ObjectiveSurface {
    if region.contains_with_margin(own, OP_REGION_MARGIN) {
        return ObjectiveSurface::uniform(dom, 50.0);
    }
    // outside (or hugging the edge): creep back toward the interior
    steer_surface(dom, bearing(own, region.center()), dom.creep_speed(), 100.0)
}

fn station_keep_surface(dom: &DecisionDomain, own: Vec2, hold: Vec2) -> ObjectiveSurface {
    let v_top = dom.top_speed();
    if own.dist(hold) <= STATION_KEEP_RADIUS {
        return ObjectiveSurface::from_fn(dom, |_, s| {
            let v = dom.speed_bins[s];
            if v == 0.0 {
                100.0
            } else {
                30.0 * (1.0 - v / v_top)
            }
        });
    }
    let pull = steer_surface(dom, bearing(own, hold), dom.creep_speed(), 80.0);
    ObjectiveSurface::from_fn(dom, |h, s| {
        if dom.speed_bins[s] == 0.0 {
            40.0
        } else {
            pull.get(h, s)
        }
    })
}

/// Rate every cell of the domain for one behavior in the current world.
pub fn behavior_objective(
    b: &BehaviorSpec,
    own: &AgentState,
    world: &GameState,
    dom: &DecisionDomain,
) -> Result<ObjectiveSurface, BehaviorError> {
    let surf = match &b.kind {
        BehaviorKind::Waypoint { target } => waypoint_surface(dom, own.position, *target),
        BehaviorKind::Loiter {
            center,
            radius,
            clockwise,
        } => {
            let carrot = loiter_carrot(own.position, *center, *radius, *clockwise);
            waypoint_surface(dom, own.position, carrot)
        }
        BehaviorKind::CutRange { target } => {
            let t = world
                .agents
                .get(*target)
                .ok_or(BehaviorError::MissingTarget(*target))?;
            let vel = heading_unit(t.heading).scale(t.speed);
            let intercept = t.position.add(vel.scale(CUT_RANGE_LEAD_S));
            waypoint_surface(dom, own.position, intercept)
        }
        BehaviorKind::AvoidCollision { standoff } => {
            avoid_collision_surface(dom, own, world, *standoff)
        }
        BehaviorKind::OpRegion { region } => op_region_surface(dom, own.position, region),
        BehaviorKind::StationKeep { hold } => station_keep_surface(dom, own.position, *hold),
    };
    debug_assert!(surf.is_valid());
    Ok(surf)
}
