//! Experiment plumbing: strict config files, seeded game execution,
//! checksummed replay logs, tournaments, and bootstrap statistics.

pub mod config;
pub mod log;
pub mod sim;
pub mod stats;
pub mod tournament;

pub use config::{ConfigError, GameConfig, PolicySpec, ResolvedPolicy, TrainingSection};
pub use log::{AgentRecord, EndRecord, EventRecord, GameLog, LogHeader, LogReadError, Record, StepRecord, LOG_SCHEMA};
pub use sim::{run_game, verify_replay, RunError, VerifyError, ARTIFACT_VERSION};
pub use tournament::{
    metrics_csv, run_tournament, GameSummary, Matchup, MatchupFailure, MetricsRow,
    TournamentReport, TourneyError,
};
