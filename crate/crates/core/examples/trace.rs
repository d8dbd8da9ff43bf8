// scratch trace for one mirror game, not part of the deliverable surface
use flagship_core::harness::{run_game, GameConfig, Record, StepRecord};
use flagship_core::strategies::TeamStrategy;

fn fmt_step(s: &StepRecord) -> String {
    let mut line = format!("  t={:6.1}", s.time);
    for a in &s.agents {
        line.push_str(&format!(
            "  [{}]({:6.1},{:5.1}) v={:3.1} {}{} {}",
            a.state.id,
            a.state.position.x,
            a.state.position.y,
            a.state.speed,
            if a.state.tagged { "T" } else { "." },
            if a.state.has_flag { "F" } else { "." },
            &a.mode[..a.mode.len().min(18)]
        ));
    }
    line
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let pa = args.get(1).cloned().unwrap_or_else(|| "pav01".into());
    let pb = args.get(2).cloned().unwrap_or_else(|| "pav01".into());
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(43);
    let name = |n: &str| match n {
        "pav01" => TeamStrategy::Pav01,
        "strategy2" => TeamStrategy::Strategy2,
        "strategy3" => TeamStrategy::Strategy3,
        "strategy4" => TeamStrategy::Strategy4,
        "inert" => TeamStrategy::Inert,
        other => panic!("unknown strategy {other}"),
    };
    let cfg = GameConfig::scripted(name(&pa), name(&pb), seed);
    let log = run_game(&cfg).expect("game");
    let mut prev: Option<&StepRecord> = None;
    for rec in &log.records {
        match rec {
            Record::Event(ev) => {
                if let Some(p) = prev {
                    println!("{}", fmt_step(p));
                }
                println!(
                    "EVENT step={:5} t={:7.1} {:?} actor={} team={:?} victim={:?}",
                    ev.step, ev.event.time, ev.event.kind, ev.event.actor, ev.event.team, ev.event.victim
                );
            }
            Record::Step(s) => {
                if s.step % 600 == 0 {
                    println!("{}", fmt_step(s));
                }
                prev = Some(s);
            }
            Record::End(e) => println!("end: scores {:?} events {}", e.scores, e.events),
            Record::Header(_) => {}
        }
    }
}
