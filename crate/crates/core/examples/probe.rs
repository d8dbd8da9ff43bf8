// scratch experiment probe, not part of the deliverable surface
use flagship_core::harness::{run_tournament, GameConfig, Matchup, PolicySpec};
use flagship_core::strategies::TeamStrategy;
use std::time::Instant;

fn duel_rows(a: &str, b: &str, games: u32, seed: u64) -> Vec<flagship_core::harness::MetricsRow> {
    let env = GameConfig::scripted(TeamStrategy::Inert, TeamStrategy::Inert, 0);
    let m = Matchup {
        policy_a: PolicySpec::scripted(a),
        policy_b: PolicySpec::scripted(b),
        games,
        seed,
    };
    run_tournament(&env, &[m], None, None).unwrap().rows
}

fn duel(a: &str, b: &str, games: u32, seed: u64) -> (f64, f64) {
    let env = GameConfig::scripted(TeamStrategy::Inert, TeamStrategy::Inert, 0);
    let m = Matchup {
        policy_a: PolicySpec::scripted(a),
        policy_b: PolicySpec::scripted(b),
        games,
        seed,
    };
    let report = run_tournament(&env, &[m], None, None).unwrap();
    (report.rows[0].mean_score, report.rows[1].mean_score)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let games: u32 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(50);
    let t0 = Instant::now();
    println!("seed   mirror(blue)  s2    s3    s4-vs-pav01 (s4, pav)");
    for seed in [101u64, 202, 303, 404, 505, 606, 7, 42, 1234] {
        let (mir, _) = duel("pav01", "pav01", games, seed);
        let (s2, _) = duel("strategy2", "pav01", games, seed);
        let (s3, _) = duel("strategy3", "pav01", games, seed);
        let (s4, p4) = duel("strategy4", "pav01", games, seed);
        let ok6 = if s3 >= s2 && s2 >= mir { "ok" } else { "INV" };
        let ok5 = if s4 > p4 { "ok" } else { "INV" };
        println!(
            "{seed:>4}   {mir:5.2}  {s2:5.2}  {s3:5.2}  ({s4:5.2}, {p4:5.2})  c6={ok6} c5={ok5}"
        );
    }
    for seed in [202u64, 1234] {
        for cell in ["strategy2", "strategy3"] {
            let r = &duel_rows(cell, "pav01", games, seed)[0];
            println!(
                "{seed} {cell:>10}: grabs {:.2} caps {:.2} tags {:.2} score {:.2}",
                r.mean_grabs, r.mean_captures, r.mean_tags, r.mean_score
            );
        }
    }
    println!("wall {:?}", t0.elapsed());
}
