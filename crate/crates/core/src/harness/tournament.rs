//! Seeded round-robin execution and the per-policy metrics table.

use super::config::{GameConfig, PolicySpec};
use super::log::GameLog;
use super::sim::{run_game, RunError};
use crate::field::Team;
use crate::seed::split_seed;
use crate::state::EventKind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// One pairing: `policy_a` plays blue, `policy_b` plays red, for `games`
/// games with per-game seeds fanned out from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matchup {
    pub policy_a: PolicySpec,
    pub policy_b: PolicySpec,
    pub games: u32,
    pub seed: u64,
}

/// Everything the metrics need from one finished game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub matchup: usize,
    pub game: u32,
    pub seed: u64,
    /// `[blue, red]` throughout.
    pub score: [u32; 2],
    pub grabs: [u32; 2],
    pub captures: [u32; 2],
    pub tags: [u32; 2],
}

impl GameSummary {
    pub fn from_log(matchup: usize, game: u32, seed: u64, log: &GameLog) -> Self {
        let mut s = GameSummary {
            matchup,
            game,
            seed,
            score: [0; 2],
            grabs: [0; 2],
            captures: [0; 2],
            tags: [0; 2],
        };
        for rec in log.events() {
            let side = match rec.event.team {
                Team::Blue => 0,
                Team::Red => 1,
            };
            match rec.event.kind {
                EventKind::Grab => s.grabs[side] += 1,
                EventKind::Capture => s.captures[side] += 1,
                EventKind::TagNoFlag | EventKind::TagWithFlag => s.tags[side] += 1,
                EventKind::OutOfBounds => {}
            }
        }
        let scores = log.final_scores();
        s.score = [scores.get(Team::Blue), scores.get(Team::Red)];
        s
    }

    fn side(&self, i: usize) -> (u32, u32, u32, u32) {
        (self.grabs[i], self.captures[i], self.tags[i], self.score[i])
    }
}

/// One row of the tournament metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub policy: String,
    pub games: u32,
    pub mean_grabs: f64,
    pub mean_captures: f64,
    pub mean_tags: f64,
    pub mean_score: f64,
}

impl MetricsRow {
    /// Aggregate one side of a matchup. The score column is derived from the
    /// grab and capture columns, so the score identity holds bit-exactly.
    fn aggregate(policy: &str, summaries: &[GameSummary], side: usize) -> MetricsRow {
        let n = summaries.len() as f64;
        let mut grabs = 0u64;
        let mut captures = 0u64;
        let mut tags = 0u64;
        let mut score = 0u64;
        for s in summaries {
            let (g, c, t, sc) = s.side(side);
            grabs += g as u64;
            captures += c as u64;
            tags += t as u64;
            score += sc as u64;
        }
        debug_assert_eq!(score, grabs + 2 * captures, "score bookkeeping drifted");
        let mean_grabs = grabs as f64 / n;
        let mean_captures = captures as f64 / n;
        MetricsRow {
            policy: policy.to_string(),
            games: summaries.len() as u32,
            mean_grabs,
            mean_captures,
            mean_tags: tags as f64 / n,
            mean_score: mean_grabs + 2.0 * mean_captures,
        }
    }
}

/// The metrics table as CSV, columns in grab, capture, tag, score order.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("policy,games,mean_grabs,mean_captures,mean_tags,mean_score\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.policy, r.games, r.mean_grabs, r.mean_captures, r.mean_tags, r.mean_score
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchupFailure {
    pub matchup: usize,
    pub game: u32,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug)]
pub struct TournamentReport {
    /// Two rows per completed matchup, blue side first.
    pub rows: Vec<MetricsRow>,
    pub summaries: Vec<GameSummary>,
    /// Matchups aborted by a failed game; one entry per aborted matchup.
    pub failures: Vec<MatchupFailure>,
}

#[derive(Debug, Error)]
pub enum TourneyError {
    #[error("matchup {0}: games must be >= 1")]
    NoGames(usize),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

/// Run every matchup on the shared environment config (its own policies and
/// seed are ignored). Games run in parallel; aggregation reduces per-game
/// summaries in game order, so the table is independent of thread count and
/// matchup order. With an `out_dir`, per-game logs and the metrics CSV are
/// written there.
pub fn run_tournament(
    env: &GameConfig,
    matchups: &[Matchup],
    jobs: Option<usize>,
    out_dir: Option<&Path>,
) -> Result<TournamentReport, TourneyError> {
    for (i, m) in matchups.iter().enumerate() {
        if m.games == 0 {
            return Err(TourneyError::NoGames(i));
        }
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|source| TourneyError::Write {
            path: dir.display().to_string(),
            source,
        })?;
    }

    let games: Vec<(usize, u32)> = matchups
        .iter()
        .enumerate()
        .flat_map(|(mi, m)| (0..m.games).map(move |gi| (mi, gi)))
        .collect();

    let play = |&(mi, gi): &(usize, u32)| -> Result<GameSummary, MatchupFailure> {
        let m = &matchups[mi];
        let mut cfg = env.clone();
        cfg.seed = split_seed(m.seed, gi as u64);
        cfg.blue = m.policy_a.clone();
        cfg.red = m.policy_b.clone();
        let log = run_game(&cfg).map_err(|e: RunError| MatchupFailure {
            matchup: mi,
            game: gi,
            seed: cfg.seed,
            error: e.to_string(),
        })?;
        if let Some(dir) = out_dir {
            let path = dir.join(format!("m{mi:02}_g{gi:04}.log"));
            log.write_to_path(&path).map_err(|e| MatchupFailure {
                matchup: mi,
                game: gi,
                seed: cfg.seed,
                error: format!("cannot write {}: {e}", path.display()),
            })?;
        }
        Ok(GameSummary::from_log(mi, gi, cfg.seed, &log))
    };

    // rayon's indexed collect keeps results in game order regardless of
    // scheduling
    let results: Vec<Result<GameSummary, MatchupFailure>> = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| TourneyError::Pool(e.to_string()))?
            .install(|| games.par_iter().map(play).collect()),
        None => games.par_iter().map(play).collect(),
    };

    let mut summaries = Vec::new();
    let mut failures: Vec<MatchupFailure> = Vec::new();
    let mut failed = vec![false; matchups.len()];
    for r in results {
        match r {
            Ok(s) => summaries.push(s),
            Err(f) => {
                if !failed[f.matchup] {
                    failed[f.matchup] = true;
                    failures.push(f);
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (mi, m) in matchups.iter().enumerate() {
        if failed[mi] {
            continue;
        }
        let mine: Vec<GameSummary> = summaries
            .iter()
            .filter(|s| s.matchup == mi)
            .copied()
            .collect();
        rows.push(MetricsRow::aggregate(m.policy_a.name(), &mine, 0));
        rows.push(MetricsRow::aggregate(m.policy_b.name(), &mine, 1));
    }

    if let Some(dir) = out_dir {
        let path = dir.join("metrics.csv");
        std::fs::write(&path, metrics_csv(&rows)).map_err(|source| TourneyError::Write {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(TournamentReport {
        rows,
        summaries,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::TeamStrategy;

    fn env() -> GameConfig {
        let mut cfg = GameConfig::scripted(TeamStrategy::Inert, TeamStrategy::Inert, 0);
        cfg.horizon = 30.0;
        cfg
    }

    fn inert_matchup(games: u32) -> Matchup {
        Matchup {
            policy_a: PolicySpec::scripted("inert"),
            policy_b: PolicySpec::scripted("inert"),
            games,
            seed: 99,
        }
    }

    #[test]
    fn inert_matchup_means_are_zero() {
        let report = run_tournament(&env(), &[inert_matchup(1)], Some(1), None).unwrap();
        assert!(report.failures.is_empty());
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert_eq!(row.games, 1);
            assert_eq!(row.mean_grabs, 0.0);
            assert_eq!(row.mean_captures, 0.0);
            assert_eq!(row.mean_tags, 0.0);
            assert_eq!(row.mean_score, 0.0);
        }
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let matchups = [
            Matchup {
                policy_a: PolicySpec::scripted("easy_attack_only"),
                policy_b: PolicySpec::scripted("inert"),
                games: 4,
                seed: 7,
            },
            inert_matchup(2),
        ];
        let serial = run_tournament(&env(), &matchups, Some(1), None).unwrap();
        let parallel = run_tournament(&env(), &matchups, Some(8), None).unwrap();
        assert_eq!(serial.rows, parallel.rows);
        assert_eq!(serial.summaries, parallel.summaries);
    }

    #[test]
    fn matchup_order_does_not_change_a_matchups_numbers() {
        let a = Matchup {
            policy_a: PolicySpec::scripted("easy_attack_only"),
            policy_b: PolicySpec::scripted("inert"),
            games: 3,
            seed: 70,
        };
        let b = inert_matchup(2);
        let r1 = run_tournament(&env(), &[a.clone(), b.clone()], Some(2), None).unwrap();
        let r2 = run_tournament(&env(), &[b, a], Some(2), None).unwrap();
        assert_eq!(r1.rows[0], r2.rows[2]);
        assert_eq!(r1.rows[1], r2.rows[3]);
    }

    #[test]
    fn zero_games_is_rejected() {
        assert!(matches!(
            run_tournament(&env(), &[inert_matchup(0)], Some(1), None),
            Err(TourneyError::NoGames(0))
        ));
    }

    #[test]
    fn failed_game_aborts_its_matchup_and_is_reported() {
        let bad = Matchup {
            policy_a: PolicySpec {
                policy: "options".into(),
                qtables: Some("missing.qt".into()),
                epsilon: None,
            },
            policy_b: PolicySpec::scripted("inert"),
            games: 2,
            seed: 5,
        };
        let good = inert_matchup(1);
        let report = run_tournament(&env(), &[bad, good], Some(2), None).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].matchup, 0);
        // only the good matchup contributes rows
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.rows[0].policy, "inert");
    }

    #[test]
    fn csv_has_the_fixed_column_order() {
        let rows = vec![MetricsRow {
            policy: "pav01".into(),
            games: 2,
            mean_grabs: 1.5,
            mean_captures: 0.5,
            mean_tags: 3.0,
            mean_score: 2.5,
        }];
        let csv = metrics_csv(&rows);
        assert_eq!(
            csv,
            "policy,games,mean_grabs,mean_captures,mean_tags,mean_score\npav01,2,1.5,0.5,3,2.5\n"
        );
    }

    #[test]
    fn score_identity_holds_exactly() {
        let report = run_tournament(
            &env(),
            &[Matchup {
                policy_a: PolicySpec::scripted("easy_attack_only"),
                policy_b: PolicySpec::scripted("inert"),
                games: 5,
                seed: 3,
            }],
            Some(2),
            None,
        )
        .unwrap();
        for row in &report.rows {
            assert_eq!(row.mean_score, row.mean_grabs + 2.0 * row.mean_captures);
        }
    }
}
