// scratch experiment probe, not part of the deliverable surface
use flagship_core::dynamics::{Action, VehicleSpec};
use flagship_core::field::{FieldSpec, Team};
use flagship_core::geom::Vec2;
use flagship_core::helm::{decide, DecisionDomain, ModeTree};
use flagship_core::rules::{is_terminal, step_game};
use flagship_core::seed::split_seed;
use flagship_core::state::initial_state;
use flagship_core::strategies::roles::{
    easy_attacker_tree, easy_defender_tree, medium_attacker_tree, medium_defender_tree,
};
use flagship_core::strategies::{
    classifier::{assign_opponents, classify_opponent, OpponentModel},
    AgentDecision, DefendGate, RuleController, StrategyParams, TeamController, TeamStrategy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Copy)]
enum Archetype {
    OffAgg,
    OffEva,
    DefAgg,
    DefPas,
}

impl Archetype {
    fn truth(self) -> (bool, bool) {
        match self {
            Archetype::OffAgg => (true, true),
            Archetype::OffEva => (true, false),
            Archetype::DefAgg => (false, true),
            Archetype::DefPas => (false, false),
        }
    }
    fn name(self) -> &'static str {
        match self {
            Archetype::OffAgg => "off+agg",
            Archetype::OffEva => "off+eva",
            Archetype::DefAgg => "def+agg",
            Archetype::DefPas => "def+pas",
        }
    }
}

struct FixtureController {
    arch: Archetype,
    params: StrategyParams,
}

impl TeamController for FixtureController {
    fn tick(
        &mut self,
        world: &flagship_core::GameState,
        field: &FieldSpec,
        dom: &DecisionDomain,
    ) -> Result<Vec<AgentDecision>, flagship_core::helm::HelmError> {
        let ids = world.team_agents(Team::Red);
        let trees: Vec<ModeTree> = match self.arch {
            Archetype::OffAgg => ids
                .iter()
                .map(|_| easy_attacker_tree(Team::Red, field, &self.params))
                .collect(),
            Archetype::OffEva => ids
                .iter()
                .map(|_| medium_attacker_tree(Team::Red, field, &self.params))
                .collect(),
            Archetype::DefAgg => ids
                .iter()
                .enumerate()
                .map(|(slot, id)| {
                    // slot 1 is agent 3, the one observer 0 watches; park it
                    // on observer 0's post side so watcher and chaser pair up
                    let hold = if slot == 0 {
                        Vec2::new(120.0, 24.0)
                    } else {
                        Vec2::new(120.0, 56.0)
                    };
                    medium_defender_tree(
                        *id,
                        Team::Red,
                        world,
                        field,
                        &self.params,
                        Some(hold),
                        DefendGate::ZoneEntry,
                    )
                })
                .collect(),
            Archetype::DefPas => ids
                .iter()
                .enumerate()
                .map(|(slot, _)| {
                    let center = if slot == 0 {
                        Vec2::new(135.0, 50.0)
                    } else {
                        Vec2::new(135.0, 30.0)
                    };
                    easy_defender_tree(Team::Red, field, &self.params, Some(center))
                })
                .collect(),
        };
        ids.iter()
            .zip(trees.iter())
            .map(|(id, tree)| {
                let (action, mode) = decide(tree, world.agent(*id), world, field, dom)?;
                Ok(AgentDecision {
                    agent: *id,
                    action,
                    mode,
                })
            })
            .collect()
    }

    fn label(&self) -> String {
        format!("fixture_{}", self.arch.name())
    }
}

// (decided_ok, time_to_both, undecided, wrong)
fn trial(arch: Archetype, seed: u64) -> (bool, f64, u32, u32) {
    trial_inner(arch, seed, false)
}

fn trial_inner(arch: Archetype, seed: u64, trace: bool) -> (bool, f64, u32, u32) {
    let field = FieldSpec::default();
    let vehicle = VehicleSpec::default();
    let dom = DecisionDomain::default();
    let params = StrategyParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut world = initial_state(&field, &mut rng);
    let mut blue = RuleController::new(TeamStrategy::Classifier, Team::Blue, params.clone());
    let mut red = FixtureController {
        arch,
        params: params.clone(),
    };
    let mut models: Option<Vec<OpponentModel>> = None;
    let truth = arch.truth();
    let mut decided_at = f64::NAN;

    while !is_terminal(&world, 150.0) {
        let ms = models.get_or_insert_with(|| {
            assign_opponents(&world, Team::Blue)
                .into_iter()
                .map(OpponentModel::new)
                .collect()
        });
        let ids = world.team_agents(Team::Blue);
        for (slot, id) in ids.iter().enumerate() {
            ms[slot] = classify_opponent(ms[slot].clone(), &world, *id, &field, &params, world.time);
        }
        if decided_at.is_nan() && ms.iter().all(|m| m.label().is_some()) {
            decided_at = world.time;
        }
        if trace && world.step_index % 20 == 0 {
            let pos: Vec<String> = world
                .agents
                .iter()
                .map(|a| {
                    format!(
                        "{}:({:.1},{:.1}) h{:.0} s{:.1}{}{}",
                        a.id,
                        a.position.x,
                        a.position.y,
                        a.heading,
                        a.speed,
                        if a.tagged { " T" } else { "" },
                        if a.has_flag { " F" } else { "" }
                    )
                })
                .collect();
            eprintln!("t={:6.1} {}", world.time, pos.join("  "));
            for m in ms.iter() {
                eprintln!("    {m:?}");
            }
        }
        let mut actions = vec![Action::HALT; world.agents.len()];
        for d in blue.tick(&world, &field, &dom).unwrap() {
            actions[d.agent] = d.action;
        }
        for d in red.tick(&world, &field, &dom).unwrap() {
            actions[d.agent] = d.action;
        }
        let (next, _) = step_game(&world, &actions, &field, &vehicle).unwrap();
        world = next;
    }

    let ms = models.unwrap();
    let mut undecided = 0;
    let mut wrong = 0;
    for m in &ms {
        match m.label() {
            None => {
                undecided += 1;
                eprintln!(
                    "  seed {seed}: undecided opp {} off={:?} agg={:?}",
                    m.opponent, m.offensive, m.aggressive
                );
            }
            Some(l) if l != truth => {
                wrong += 1;
                eprintln!("  seed {seed}: wrong opp {} got {:?} want {:?}", m.opponent, l, truth);
            }
            _ => {}
        }
    }
    let good = undecided == 0 && wrong == 0;
    if !good && !trace && std::env::var("RETRACE").is_ok() {
        eprintln!("== retrace {} seed {seed} ==", arch.name());
        trial_inner(arch, seed, true);
    }
    (good, decided_at, undecided, wrong)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trials: u32 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(100);
    for arch in [
        Archetype::OffAgg,
        Archetype::OffEva,
        Archetype::DefAgg,
        Archetype::DefPas,
    ] {
        let mut ok = 0;
        let mut und = 0;
        let mut wr = 0;
        let mut times = Vec::new();
        for t in 0..trials {
            let (good, at, u, w) = trial(arch, split_seed(991, (t + 1000 * arch.truth().0 as u32 + 2000 * arch.truth().1 as u32) as u64));
            if good {
                ok += 1;
                times.push(at);
            }
            und += u;
            wr += w;
        }
        times.sort_by(|a, b| a.total_cmp(b));
        let med = times.get(times.len() / 2).copied().unwrap_or(f64::NAN);
        println!(
            "{}: {}/{} ok (undecided {}, wrong {}), median decide t={:.1}s max={:.1}s",
            arch.name(),
            ok,
            trials,
            und,
            wr,
            med,
            times.last().copied().unwrap_or(f64::NAN)
        );
    }
}
