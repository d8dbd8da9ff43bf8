//! Game configuration: a strict TOML document. Unknown keys fail the parse,
//! semantic problems are collected so one pass reports every violation.

use crate::field::FieldSpec;
use crate::helm::DecisionDomain;
use crate::rl::qlearn::EpsilonSchedule;
use crate::rl::{QTables, RewardTable};
use crate::strategies::{StrategyParams, TeamStrategy};
use crate::VehicleSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

impl ConfigError {
    /// Every violation, one string each; parse and io errors count as one.
    pub fn violations(&self) -> Vec<String> {
        match self {
            ConfigError::Io(e) => vec![e.to_string()],
            ConfigError::Parse(e) => vec![e.clone()],
            ConfigError::Invalid(v) => v.clone(),
        }
    }
}

/// One side's controller choice. Scripted policies need only a name; the
/// learned policy points at a saved table file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub policy: String,
    /// Table file for `policy = "options"`, relative paths resolve against
    /// the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qtables: Option<PathBuf>,
    /// Exploration rate for the options policy; greedy when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl PolicySpec {
    pub fn scripted(name: impl Into<String>) -> Self {
        PolicySpec {
            policy: name.into(),
            qtables: None,
            epsilon: None,
        }
    }

    pub fn strategy(s: TeamStrategy) -> Self {
        PolicySpec::scripted(s.name())
    }

    pub fn name(&self) -> &str {
        &self.policy
    }

    fn scripted_by_name(name: &str) -> Option<TeamStrategy> {
        Some(match name {
            "inert" => TeamStrategy::Inert,
            "easy_attack_only" => TeamStrategy::EasyAttackOnly,
            "pav01" => TeamStrategy::Pav01,
            "strategy2" => TeamStrategy::Strategy2,
            "strategy3" => TeamStrategy::Strategy3,
            "strategy4" => TeamStrategy::Strategy4,
            "classifier" => TeamStrategy::Classifier,
            _ => return None,
        })
    }

    pub fn known_names() -> Vec<&'static str> {
        vec![
            "inert",
            "easy_attack_only",
            "pav01",
            "strategy2",
            "strategy3",
            "strategy4",
            "classifier",
            "options",
            "random_options",
        ]
    }

    /// Check shape only; path existence is left to `resolve`.
    fn validate(&self, side: &str, errs: &mut Vec<String>) {
        let known = Self::scripted_by_name(&self.policy).is_some()
            || self.policy == "options"
            || self.policy == "random_options";
        if !known {
            errs.push(format!(
                "{side}.policy: unknown policy '{}' (expected one of {})",
                self.policy,
                Self::known_names().join(", ")
            ));
        }
        if self.policy == "options" {
            if self.qtables.is_none() {
                errs.push(format!("{side}.qtables: required for the options policy"));
            }
        } else if self.qtables.is_some() {
            errs.push(format!(
                "{side}.qtables: only valid for the options policy, not '{}'",
                self.policy
            ));
        }
        match self.epsilon {
            Some(e) if self.policy == "options" || self.policy == "random_options" => {
                if !(0.0..=1.0).contains(&e) {
                    errs.push(format!("{side}.epsilon: must be in [0, 1], got {e}"));
                }
            }
            Some(_) => errs.push(format!(
                "{side}.epsilon: only valid for options policies, not '{}'",
                self.policy
            )),
            None => {}
        }
    }

    pub fn resolve(&self) -> Result<ResolvedPolicy, String> {
        if let Some(s) = Self::scripted_by_name(&self.policy) {
            return Ok(ResolvedPolicy::Scripted(s));
        }
        match self.policy.as_str() {
            "random_options" => Ok(ResolvedPolicy::RandomOptions {
                epsilon: self.epsilon.unwrap_or(1.0),
            }),
            "options" => {
                let path = self
                    .qtables
                    .clone()
                    .ok_or_else(|| "options policy without a qtables path".to_string())?;
                Ok(ResolvedPolicy::Options {
                    qtables: path,
                    epsilon: self.epsilon.unwrap_or(0.0),
                })
            }
            other => Err(format!("unknown policy '{other}'")),
        }
    }

    /// Anchor a relative qtables path to the config file's directory.
    fn anchor(&mut self, base_dir: &Path) {
        if let Some(p) = &self.qtables {
            if p.is_relative() {
                self.qtables = Some(base_dir.join(p));
            }
        }
    }
}

/// A policy spec with names checked and paths anchored.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedPolicy {
    Scripted(TeamStrategy),
    Options { qtables: PathBuf, epsilon: f64 },
    RandomOptions { epsilon: f64 },
}

/// The `[training]` section; only the `train` verb reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub episodes: u32,
    /// Training episodes are shorter than full games.
    pub horizon: f64,
    pub opponent: String,
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub option_commit: u32,
    pub k_segments: usize,
    /// Greedy evaluation episodes played after training.
    pub eval_episodes: u32,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            episodes: 2000,
            horizon: 120.0,
            opponent: "pav01".into(),
            learning_rate: 0.1,
            gamma: 0.95,
            epsilon: EpsilonSchedule::default(),
            option_commit: 10,
            k_segments: 8,
            eval_episodes: 50,
        }
    }
}

impl TrainingSection {
    fn validate(&self, errs: &mut Vec<String>) {
        if PolicySpec::scripted_by_name(&self.opponent).is_none() {
            errs.push(format!(
                "training.opponent: '{}' is not a scripted policy",
                self.opponent
            ));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            errs.push(format!(
                "training.horizon: must be finite and > 0, got {}",
                self.horizon
            ));
        }
        for e in QTables::new(
            self.k_segments,
            self.learning_rate,
            self.gamma,
            self.epsilon,
            self.option_commit,
        )
        .validate()
        {
            errs.push(format!("training.{e}"));
        }
    }

    pub fn opponent_strategy(&self) -> Option<TeamStrategy> {
        PolicySpec::scripted_by_name(&self.opponent)
    }
}

fn default_horizon() -> f64 {
    600.0
}

fn default_dt() -> f64 {
    0.1
}

/// What the TOML file parses into; `seed` and the two policies are the only
/// required keys, everything else has defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    #[serde(default = "default_horizon")]
    horizon: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default)]
    field: FieldSpec,
    #[serde(default)]
    vehicle: VehicleSpec,
    #[serde(default)]
    domain: DecisionDomain,
    blue: Option<PolicySpec>,
    red: Option<PolicySpec>,
    #[serde(default)]
    rewards: RewardTable,
    #[serde(default)]
    params: StrategyParams,
    #[serde(default)]
    training: Option<TrainingSection>,
}

/// Fully resolved game description: everything a run needs, everything the
/// log header records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
    pub field: FieldSpec,
    pub vehicle: VehicleSpec,
    pub domain: DecisionDomain,
    pub blue: PolicySpec,
    pub red: PolicySpec,
    pub rewards: RewardTable,
    pub params: StrategyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingSection>,
}

impl GameConfig {
    /// A ready-to-run config for two scripted sides; used by tests and the
    /// tournament runner.
    pub fn scripted(blue: TeamStrategy, red: TeamStrategy, seed: u64) -> Self {
        GameConfig {
            seed,
            horizon: default_horizon(),
            dt: default_dt(),
            field: FieldSpec::default(),
            vehicle: VehicleSpec::default(),
            domain: DecisionDomain::default(),
            blue: PolicySpec::strategy(blue),
            red: PolicySpec::strategy(red),
            rewards: RewardTable::default(),
            params: StrategyParams::default(),
            training: None,
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::resolve_raw(raw, base_dir)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }

    fn resolve_raw(raw: RawConfig, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut errs = Vec::new();
        if raw.seed.is_none() {
            errs.push("seed: required, no default".to_string());
        }
        if raw.blue.is_none() {
            errs.push("blue: policy section required".to_string());
        }
        if raw.red.is_none() {
            errs.push("red: policy section required".to_string());
        }

        let mut vehicle = raw.vehicle;
        let default_vehicle_dt = VehicleSpec::default().dt;
        if vehicle.dt != raw.dt {
            if vehicle.dt == default_vehicle_dt {
                vehicle.dt = raw.dt;
            } else {
                errs.push(format!(
                    "dt: top-level dt {} disagrees with vehicle.dt {}",
                    raw.dt, vehicle.dt
                ));
            }
        }

        let mut blue = raw.blue.unwrap_or_else(|| PolicySpec::scripted("inert"));
        let mut red = raw.red.unwrap_or_else(|| PolicySpec::scripted("inert"));
        blue.anchor(base_dir);
        red.anchor(base_dir);
        let cfg = GameConfig {
            seed: raw.seed.unwrap_or(0),
            horizon: raw.horizon,
            dt: raw.dt,
            field: raw.field,
            vehicle,
            domain: raw.domain,
            blue,
            red,
            rewards: raw.rewards,
            params: raw.params,
            training: raw.training,
        };
        errs.extend(cfg.validate());
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }

    /// All semantic violations, empty when the config is runnable.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            errs.push(format!("horizon: must be finite and > 0, got {}", self.horizon));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            errs.push(format!("dt: must be finite and > 0, got {}", self.dt));
        } else if self.horizon.is_finite() && self.horizon / self.dt > 10_000_000.0 {
            errs.push(format!(
                "horizon/dt: {} steps is past the supported range",
                (self.horizon / self.dt).round()
            ));
        }
        errs.extend(self.field.validate());
        errs.extend(self.vehicle.validate());
        if let Err(e) = self.domain.validate() {
            errs.push(format!("domain.{e}"));
        } else if self.domain.top_speed() > self.vehicle.max_speed {
            errs.push(format!(
                "domain.speed_bins: top speed {} exceeds vehicle.max_speed {}",
                self.domain.top_speed(),
                self.vehicle.max_speed
            ));
        }
        for e in self.rewards.validate() {
            errs.push(format!("rewards.{e}"));
        }
        self.blue.validate("blue", &mut errs);
        self.red.validate("red", &mut errs);
        for (side, spec) in [("blue", &self.blue), ("red", &self.red)] {
            if let Ok(ResolvedPolicy::Options { qtables, .. }) = spec.resolve() {
                if !qtables.is_file() {
                    errs.push(format!(
                        "{side}.qtables: no such file: {}",
                        qtables.display()
                    ));
                }
            }
        }
        if let Some(t) = &self.training {
            t.validate(&mut errs);
        }
        errs
    }

    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt).round() as u64
    }
}
