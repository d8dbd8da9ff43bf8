//! Sparse event rewards. Every game event pays one value to the team that
//! caused it and another to the team on the receiving end; a step's reward is
//! the sum over that step's events and zero when nothing happened.

use crate::field::Team;
use crate::state::{EventKind, GameEvent};
use serde::{Deserialize, Serialize};

/// Payout of one event kind, seen from the acting team (`own`) and from the
/// other team (`opponent`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardPair {
    pub own: f64,
    pub opponent: f64,
}

impl RewardPair {
    pub const fn new(own: f64, opponent: f64) -> Self {
        RewardPair { own, opponent }
    }
}

/// Per-event payouts, overridable per experiment from the config file. The
/// defaults are the baseline sparse table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardTable {
    /// Tagging an opponent that carries no flag.
    pub tag_no_flag: RewardPair,
    /// Tagging a flag carrier.
    pub tag_with_flag: RewardPair,
    pub grab: RewardPair,
    pub capture: RewardPair,
    /// Leaving the field. The acting team is the one losing an agent, so
    /// `own` is the penalty and `opponent` usually 0.
    pub out_of_bounds: RewardPair,
}

impl Default for RewardTable {
    fn default() -> Self {
        RewardTable {
            tag_no_flag: RewardPair::new(100.0, -100.0),
            tag_with_flag: RewardPair::new(50.0, -100.0),
            grab: RewardPair::new(50.0, -50.0),
            capture: RewardPair::new(100.0, -100.0),
            out_of_bounds: RewardPair::new(-100.0, 0.0),
        }
    }
}

impl RewardTable {
    pub fn pair(&self, kind: EventKind) -> RewardPair {
        match kind {
            EventKind::TagNoFlag => self.tag_no_flag,
            EventKind::TagWithFlag => self.tag_with_flag,
            EventKind::Grab => self.grab,
            EventKind::Capture => self.capture,
            EventKind::OutOfBounds => self.out_of_bounds,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (name, p) in [
            ("tag_no_flag", self.tag_no_flag),
            ("tag_with_flag", self.tag_with_flag),
            ("grab", self.grab),
            ("capture", self.capture),
            ("out_of_bounds", self.out_of_bounds),
        ] {
            if !p.own.is_finite() || !p.opponent.is_finite() {
                errs.push(format!("rewards.{name} must be finite"));
            }
        }
        errs
    }

    /// Largest absolute payout in the table; bounds tabular value estimates.
    pub fn max_abs(&self) -> f64 {
        [
            self.tag_no_flag,
            self.tag_with_flag,
            self.grab,
            self.capture,
            self.out_of_bounds,
        ]
        .iter()
        .flat_map(|p| [p.own.abs(), p.opponent.abs()])
        .fold(0.0, f64::max)
    }
}

/// Team-perspective reward for one step's events: events caused by
/// `perspective`'s agents pay the `own` value, events caused by the other
/// team pay the `opponent` value. Additive over events, 0 on an empty step.
pub fn compute_reward(events: &[GameEvent], perspective: Team, table: &RewardTable) -> f64 {
    events
        .iter()
        .map(|e| {
            let p = table.pair(e.kind);
            if e.team == perspective {
                p.own
            } else {
                p.opponent
            }
        })
        .sum()
}
