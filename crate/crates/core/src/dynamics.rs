//! Vehicle kinematics: rate-limited heading, first-order speed lag.

use crate::geom::{angle_diff, heading_unit, normalize_deg};
use crate::state::AgentState;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleSpec {
    /// m/s
    pub max_speed: f64,
    /// deg/s
    pub max_turn_rate: f64,
    /// First-order speed lag constant, 1/s.
    pub speed_response: f64,
    /// Integration step, seconds.
    pub dt: f64,
    /// Fraction of max speed available while tagged.
    pub tagged_speed_factor: f64,
}

impl Default for VehicleSpec {
    fn default() -> Self {
        VehicleSpec {
            max_speed: 2.5,
            max_turn_rate: 40.0,
            speed_response: 0.5,
            dt: 0.1,
            tagged_speed_factor: 0.5,
        }
    }
}

impl VehicleSpec {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("vehicle.max_speed", self.max_speed),
            ("vehicle.max_turn_rate", self.max_turn_rate),
            ("vehicle.speed_response", self.speed_response),
            ("vehicle.dt", self.dt),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                errs.push(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if self.max_turn_rate * self.dt >= 180.0 {
            errs.push(format!(
                "vehicle.max_turn_rate * dt must be < 180 deg/step, got {}",
                self.max_turn_rate * self.dt
            ));
        }
        if !(0.0..=1.0).contains(&self.tagged_speed_factor) {
            errs.push(format!(
                "vehicle.tagged_speed_factor must be in [0, 1], got {}",
                self.tagged_speed_factor
            ));
        }
        errs
    }
}

/// Commanded setpoint: desired speed and compass heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub desired_speed: f64,
    pub desired_heading: f64,
}

impl Action {
    pub fn new(desired_speed: f64, desired_heading: f64) -> Self {
        Action {
            desired_speed,
            desired_heading,
        }
    }

    /// Hold position.
    pub const HALT: Action = Action {
        desired_speed: 0.0,
        desired_heading: 0.0,
    };
}

#[derive(Debug, Error, PartialEq)]
pub enum ActionError {
    #[error("action has non-finite component: speed={speed}, heading={heading}")]
    NonFinite { speed: f64, heading: f64 },
    #[error("negative desired speed {0} is not in the action set")]
    NegativeSpeed(f64),
}

/// Clamp speed into `[0, max_speed]` and wrap heading into `[0, 360)`.
/// Negative or non-finite commands are rejected rather than repaired.
pub fn clamp_action(a: Action, spec: &VehicleSpec) -> Result<Action, ActionError> {
    if !a.desired_speed.is_finite() || !a.desired_heading.is_finite() {
        return Err(ActionError::NonFinite {
            speed: a.desired_speed,
            heading: a.desired_heading,
        });
    }
    if a.desired_speed < 0.0 {
        return Err(ActionError::NegativeSpeed(a.desired_speed));
    }
    Ok(Action {
        desired_speed: a.desired_speed.min(spec.max_speed),
        desired_heading: normalize_deg(a.desired_heading),
    })
}

/// Advance one step: turn toward the commanded heading along the shorter arc
/// (rate-limited), relax speed toward the command with first-order lag, then
/// move along the new heading. Tagged agents are capped to a fraction of max
/// speed. Expects a clamped action.
pub fn integrate_motion(s: &AgentState, a: Action, spec: &VehicleSpec) -> AgentState {
    let mut out = s.clone();

    let max_turn = spec.max_turn_rate * spec.dt;
    let turn = angle_diff(s.heading, a.desired_heading).clamp(-max_turn, max_turn);
    out.heading = normalize_deg(s.heading + turn);

    let alpha = (-spec.speed_response * spec.dt).exp();
    let mut speed = a.desired_speed + (s.speed - a.desired_speed) * alpha;
    speed = speed.clamp(0.0, spec.max_speed);
    if s.tagged {
        speed = speed.min(spec.tagged_speed_factor * spec.max_speed);
    }
    out.speed = speed;

    out.position = s.position.add(heading_unit(out.heading).scale(speed * spec.dt));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Team;
    use crate::geom::Vec2;

    fn agent(heading: f64, speed: f64) -> AgentState {
        AgentState {
            id: 0,
            team: Team::Blue,
            position: Vec2::new(50.0, 40.0),
            heading,
            speed,
            has_flag: false,
            tagged: false,
            oob: false,
        }
    }

    #[test]
    fn clamp_speed_and_wrap_heading() {
        let spec = VehicleSpec::default();
        let a = clamp_action(Action::new(99.0, 370.0), &spec).unwrap();
        assert_eq!(a.desired_speed, 2.5);
        assert_eq!(a.desired_heading, 10.0);
    }

    #[test]
    fn clamp_identity() {
        let spec = VehicleSpec::default();
        let a = clamp_action(Action::new(0.0, 0.0), &spec).unwrap();
        assert_eq!(a, Action::new(0.0, 0.0));
    }

    #[test]
    fn clamp_rejects_negative_speed() {
        let spec = VehicleSpec::default();
        assert_eq!(
            clamp_action(Action::new(-1.0, 180.0), &spec),
            Err(ActionError::NegativeSpeed(-1.0))
        );
    }

    #[test]
    fn clamp_rejects_non_finite() {
        let spec = VehicleSpec::default();
        assert!(clamp_action(Action::new(f64::NAN, 0.0), &spec).is_err());
        assert!(clamp_action(Action::new(1.0, f64::INFINITY), &spec).is_err());
    }

    #[test]
    fn turn_is_rate_limited() {
        let spec = VehicleSpec {
            max_turn_rate: 30.0,
            ..VehicleSpec::default()
        };
        let s = agent(0.0, 0.0);
        let out = integrate_motion(&s, Action::new(0.0, 90.0), &spec);
        assert!((out.heading - 3.0).abs() < 1e-12);
    }

    #[test]
    fn steady_state_advances_straight() {
        let spec = VehicleSpec::default();
        let s = agent(90.0, 2.0);
        let out = integrate_motion(&s, Action::new(2.0, 90.0), &spec);
        assert!((out.heading - 90.0).abs() < 1e-12);
        assert!((out.speed - 2.0).abs() < 1e-12);
        assert!((out.position.x - (50.0 + 2.0 * spec.dt)).abs() < 1e-12);
        assert!((out.position.y - 40.0).abs() < 1e-12);
    }

    #[test]
    fn tagged_agents_are_speed_capped() {
        let spec = VehicleSpec::default();
        let mut s = agent(0.0, 2.5);
        s.tagged = true;
        let out = integrate_motion(&s, Action::new(2.5, 0.0), &spec);
        assert!(out.speed <= spec.tagged_speed_factor * spec.max_speed + 1e-12);
    }

    #[test]
    fn waypoint_convergence() {
        // Closed-loop pursuit of a fixed waypoint: once roughly aligned, the
        // range must shrink monotonically to arrival.
        let spec = VehicleSpec::default();
        let target = Vec2::new(50.0, 90.0);
        let mut s = agent(180.0, 0.0); // facing away
        let mut dists = Vec::new();
        for _ in 0..350 {
            let brg = crate::geom::bearing(s.position, target);
            let a = clamp_action(Action::new(spec.max_speed, brg), &spec).unwrap();
            s = integrate_motion(&s, a, &spec);
            dists.push(s.position.dist(target));
        }
        // After the turn-in transient (generously 60 steps), distance must be
        // strictly decreasing until we are on top of the waypoint.
        let mut prev = dists[60];
        for (i, d) in dists.iter().enumerate().skip(61) {
            if *d < 0.5 {
                break;
            }
            assert!(*d < prev, "distance increased at step {i}: {d} >= {prev}");
            prev = *d;
        }
        assert!(dists.iter().cloned().fold(f64::MAX, f64::min) < 1.0);
    }
}
