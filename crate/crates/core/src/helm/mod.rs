//! Behavior-based action selection. Each active behavior rates every
//! candidate (heading, speed) cell of a shared decision domain with a utility
//! in [0,100]; the solver picks the cell maximizing the priority-weighted sum
//! and emits it as an Action. Mode trees gate which behaviors are active.

pub mod behavior;
pub mod mode;

pub use behavior::{behavior_objective, BehaviorError, BehaviorKind, BehaviorSpec};
pub use mode::{select_mode, Condition, ModeNode, ModeTree};

use crate::dynamics::Action;
use crate::field::FieldSpec;
use crate::state::{AgentState, GameState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Candidate action grid: K heading bins (centers at i*360/K) crossed with an
/// explicit list of candidate speeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionDomain {
    pub heading_bins: usize,
    pub speed_bins: Vec<f64>,
}

impl Default for DecisionDomain {
    fn default() -> Self {
        DecisionDomain {
            heading_bins: 36,
            speed_bins: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5],
        }
    }
}

impl DecisionDomain {
    pub fn heading_of(&self, bin: usize) -> f64 {
        bin as f64 * 360.0 / self.heading_bins as f64
    }

    pub fn top_speed(&self) -> f64 {
        *self.speed_bins.last().expect("speed_bins non-empty")
    }

    /// Lowest nonzero candidate speed; falls back to the lowest bin.
    pub fn creep_speed(&self) -> f64 {
        self.speed_bins
            .iter()
            .copied()
            .find(|v| *v > 0.0)
            .unwrap_or(self.speed_bins[0])
    }

    pub fn cells(&self) -> usize {
        self.heading_bins * self.speed_bins.len()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.heading_bins < 4 {
            return Err(format!("heading_bins {} < 4", self.heading_bins));
        }
        if self.speed_bins.is_empty() {
            return Err("speed_bins empty".into());
        }
        if self.speed_bins.windows(2).any(|w| w[0] >= w[1]) {
            return Err("speed_bins must be strictly increasing".into());
        }
        if self.speed_bins[0] < 0.0 {
            return Err("negative speed bin".into());
        }
        if self.speed_bins.iter().any(|v| !v.is_finite()) {
            return Err("non-finite speed bin".into());
        }
        Ok(())
    }
}

/// Utility over the decision domain, row-major by heading bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSurface {
    pub heading_bins: usize,
    pub speed_bins: usize,
    values: Vec<f64>,
}

impl ObjectiveSurface {
    pub fn uniform(dom: &DecisionDomain, value: f64) -> Self {
        ObjectiveSurface {
            heading_bins: dom.heading_bins,
            speed_bins: dom.speed_bins.len(),
            values: vec![value; dom.cells()],
        }
    }

    pub fn from_fn(dom: &DecisionDomain, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(dom.cells());
        for h in 0..dom.heading_bins {
            for s in 0..dom.speed_bins.len() {
                values.push(f(h, s));
            }
        }
        ObjectiveSurface {
            heading_bins: dom.heading_bins,
            speed_bins: dom.speed_bins.len(),
            values,
        }
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize) -> f64 {
        self.values[h * self.speed_bins + s]
    }

    pub fn set(&mut self, h: usize, s: usize, v: f64) {
        self.values[h * self.speed_bins + s] = v;
    }

    /// All values finite and within [0,100].
    pub fn is_valid(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.is_finite() && (0.0..=100.0).contains(v))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum HelmError {
    #[error("no active behaviors")]
    EmptyActiveSet,
    #[error("surface shape does not match decision domain")]
    ShapeMismatch,
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

/// Argmax of the priority-weighted sum of surfaces. Ties break toward the
/// lowest heading bin, then the lowest speed bin, so the result is a pure
/// function of the inputs.
pub fn solve_helm(
    active: &[(BehaviorSpec, ObjectiveSurface)],
    dom: &DecisionDomain,
) -> Result<Action, HelmError> {
    if active.is_empty() {
        return Err(HelmError::EmptyActiveSet);
    }
    for (_, surf) in active {
        if surf.heading_bins != dom.heading_bins || surf.speed_bins != dom.speed_bins.len() {
            return Err(HelmError::ShapeMismatch);
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_cell = (0usize, 0usize);
    for h in 0..dom.heading_bins {
        for s in 0..dom.speed_bins.len() {
            let mut total = 0.0;
            for (spec, surf) in active {
                total += spec.priority_weight * surf.get(h, s);
            }
            if total > best {
                best = total;
                best_cell = (h, s);
            }
        }
    }
    Ok(Action::new(
        dom.speed_bins[best_cell.1],
        dom.heading_of(best_cell.0),
    ))
}

/// Full per-agent decision: pick the active leaf of the mode tree, rate each
/// of its behaviors, and solve. Returns the leaf's mode path alongside the
/// action so callers can log it.
pub fn decide(
    tree: &ModeTree,
    agent: &AgentState,
    world: &GameState,
    field: &FieldSpec,
    dom: &DecisionDomain,
) -> Result<(Action, String), HelmError> {
    let (path, behaviors) = select_mode(tree, agent, world, field)?;
    let mut active = Vec::with_capacity(behaviors.len());
    for spec in behaviors {
        let surf = behavior_objective(&spec, agent, world, dom)?;
        active.push((spec, surf));
    }
    let action = solve_helm(&active, dom)?;
    Ok((action, path))
}
