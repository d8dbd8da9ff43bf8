//! Seeded single-game execution: config in, replayable log out.

use super::config::{GameConfig, ResolvedPolicy};
use super::log::{
    AgentRecord, EndRecord, EventRecord, GameLog, LogHeader, Record, StepRecord, LOG_SCHEMA,
};
use crate::dynamics::Action;
use crate::field::Team;
use crate::helm::HelmError;
use crate::rl::qlearn::QTablesIoError;
use crate::rl::train::OptionsController;
use crate::rl::QTables;
use crate::rules::{is_terminal, step_game, StepError};
use crate::seed::split_seed;
use crate::state::initial_state;
use crate::strategies::{RuleController, TeamController};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;
use thiserror::Error;

pub const ARTIFACT_VERSION: &str = concat!("flagship ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid config:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("cannot load qtables for {side}: {source}")]
    Tables {
        side: &'static str,
        source: QTablesIoError,
    },
    #[error(transparent)]
    Helm(#[from] HelmError),
    #[error(transparent)]
    Step(#[from] StepError),
}

fn side_name(team: Team) -> &'static str {
    match team {
        Team::Blue => "blue",
        Team::Red => "red",
    }
}

/// Controller rng seeds fan out from the game seed; one lane per side.
fn controller_seed(game_seed: u64, team: Team) -> u64 {
    split_seed(
        game_seed,
        match team {
            Team::Blue => 1,
            Team::Red => 2,
        },
    )
}

/// Build one side's controller. Returns the serialized table text when the
/// side plays learned options, so the log header can embed it.
fn build_controller(
    team: Team,
    cfg: &GameConfig,
    embedded: Option<&String>,
) -> Result<(Box<dyn TeamController>, Option<String>), RunError> {
    let side = side_name(team);
    let spec = match team {
        Team::Blue => &cfg.blue,
        Team::Red => &cfg.red,
    };
    let resolved = spec.resolve().map_err(|e| RunError::Invalid(vec![e]))?;
    match resolved {
        ResolvedPolicy::Scripted(s) => Ok((
            Box::new(RuleController::new(s, team, cfg.params.clone())),
            None,
        )),
        ResolvedPolicy::RandomOptions { epsilon } => {
            let mut c = OptionsController::uniform_random(
                team,
                cfg.params.clone(),
                controller_seed(cfg.seed, team),
            );
            c.set_epsilon(epsilon);
            Ok((Box::new(c), None))
        }
        ResolvedPolicy::Options { qtables, epsilon } => {
            let text = match embedded {
                Some(t) => t.clone(),
                None => std::fs::read_to_string(&qtables).map_err(|e| RunError::Tables {
                    side,
                    source: QTablesIoError::Io(e),
                })?,
            };
            let (q, _) = QTables::load(text.as_bytes())
                .map_err(|source| RunError::Tables { side, source })?;
            let c = OptionsController::new(
                team,
                q,
                epsilon,
                cfg.params.clone(),
                controller_seed(cfg.seed, team),
                "options",
            );
            Ok((Box::new(c), Some(text)))
        }
    }
}

/// Play one full game to the horizon. Deterministic in the config seed.
pub fn run_game(cfg: &GameConfig) -> Result<GameLog, RunError> {
    run_game_with_tables(cfg, &BTreeMap::new())
}

/// As `run_game`, but options tables may come from already-loaded text
/// (replay verification) instead of the filesystem.
pub(crate) fn run_game_with_tables(
    cfg: &GameConfig,
    embedded: &BTreeMap<String, String>,
) -> Result<GameLog, RunError> {
    let violations = cfg.validate_offline(embedded);
    if !violations.is_empty() {
        return Err(RunError::Invalid(violations));
    }

    let mut qtables = BTreeMap::new();
    let (mut blue, blue_tables) = build_controller(Team::Blue, cfg, embedded.get("blue"))?;
    let (mut red, red_tables) = build_controller(Team::Red, cfg, embedded.get("red"))?;
    if let Some(t) = blue_tables {
        qtables.insert("blue".to_string(), t);
    }
    if let Some(t) = red_tables {
        qtables.insert("red".to_string(), t);
    }

    let mut records = Vec::with_capacity(cfg.steps() as usize + 8);
    records.push(Record::Header(Box::new(LogHeader {
        schema: LOG_SCHEMA,
        artifact: ARTIFACT_VERSION.to_string(),
        config: cfg.clone(),
        qtables,
    })));

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut world = initial_state(&cfg.field, &mut rng);

    while !is_terminal(&world, cfg.horizon) {
        let mut modes = vec![String::new(); world.agents.len()];
        let mut actions = vec![Action::HALT; world.agents.len()];
        for ctrl in [&mut blue, &mut red] {
            for d in ctrl.tick(&world, &cfg.field, &cfg.domain)? {
                actions[d.agent] = d.action;
                modes[d.agent] = d.mode;
            }
        }
        records.push(Record::Step(StepRecord {
            step: world.step_index,
            time: world.time,
            agents: world
                .agents
                .iter()
                .map(|a| AgentRecord {
                    state: a.clone(),
                    mode: std::mem::take(&mut modes[a.id]),
                    action: actions[a.id],
                })
                .collect(),
        }));
        let (next, events) = step_game(&world, &actions, &cfg.field, &cfg.vehicle)?;
        for event in events {
            records.push(Record::Event(EventRecord {
                step: next.step_index,
                event,
            }));
        }
        world = next;
    }

    records.push(Record::End(EndRecord {
        step: world.step_index,
        time: world.time,
        scores: world.scores,
        events: world.event_history.len(),
    }));
    Ok(GameLog::new(records))
}

impl GameConfig {
    /// Validation that skips filesystem checks for sides whose tables are
    /// already in hand.
    fn validate_offline(&self, embedded: &BTreeMap<String, String>) -> Vec<String> {
        self.validate()
            .into_iter()
            .filter(|e| {
                !(e.contains("qtables: no such file")
                    && embedded.keys().any(|side| e.starts_with(side.as_str())))
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("re-simulation failed: {0}")]
    Run(#[from] RunError),
    #[error("replay mismatch at record {index}: recorded {recorded} regenerated {regenerated}")]
    Mismatch {
        index: usize,
        recorded: String,
        regenerated: String,
    },
    #[error("record counts differ: recorded {recorded}, regenerated {regenerated}")]
    Length { recorded: usize, regenerated: usize },
}

/// Re-simulate from the embedded header and require byte-equal step, event,
/// and end records.
pub fn verify_replay(log: &GameLog) -> Result<(), VerifyError> {
    let header = log.header();
    let fresh = run_game_with_tables(&header.config, &header.qtables)?;
    let recorded: Vec<&Record> = log
        .records
        .iter()
        .filter(|r| !matches!(r, Record::Header(_)))
        .collect();
    let regenerated: Vec<&Record> = fresh
        .records
        .iter()
        .filter(|r| !matches!(r, Record::Header(_)))
        .collect();
    if recorded.len() != regenerated.len() {
        return Err(VerifyError::Length {
            recorded: recorded.len(),
            regenerated: regenerated.len(),
        });
    }
    for (i, (a, b)) in recorded.iter().zip(&regenerated).enumerate() {
        let ja = serde_json::to_string(a).expect("record serializes");
        let jb = serde_json::to_string(b).expect("record serializes");
        if ja != jb {
            return Err(VerifyError::Mismatch {
                index: i,
                recorded: ja,
                regenerated: jb,
            });
        }
    }
    Ok(())
}
