use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use cantor_games::alice::{
    required_vertices, required_vertices_bipartite, AliceConfig, OrbitMode, RandomLegalAlice, StagesAlice,
};
use cantor_games::bob::{GreedyFixed, RegionsDynamic, RegionsStatic, RestrictedBob, RestrictedParams};
use cantor_games::families::{ColoringFamily, DominanceFamily};
use cantor_games::{
    run_match, BobStrategy, Dyadic, GameConfig, GameKind, MatchResult, Player,
};
use clap::{Args, ValueEnum};
use num_bigint::BigUint;

use crate::{io_err, out_dir, Failure, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AliceName {
    Stages,
    RandomLegal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BobName {
    GreedyFixed,
    RegionsStatic,
    RegionsDynamic,
    Restricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrbitArg {
    Auto,
    Explicit,
    Orbit,
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    /// nonbipartite, bipartite or restricted.
    #[arg(long, default_value = "nonbipartite")]
    kind: GameKind,
    /// Alice's per-vertex budget, a power of two such as 1/2 or 1/2^7.
    #[arg(long, default_value = "1/2")]
    d: Dyadic,
    /// Bob's matching factor.
    #[arg(long, default_value = "1")]
    c: Dyadic,
    /// String length (restricted game).
    #[arg(long, default_value_t = 32)]
    n: u32,
    /// Upper size exponent (restricted game).
    #[arg(long, default_value_t = 6)]
    p: u32,
    /// The restricted strategy covers 2^m strings.
    #[arg(long, default_value_t = 8)]
    m: u32,
    #[arg(long, value_enum)]
    alice: Option<AliceName>,
    #[arg(long, value_enum)]
    bob: Option<BobName>,
    /// First seed for randomized Alice strategies.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds to play.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Matches played in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Seed for the restricted strategy's families.
    #[arg(long, default_value_t = 0)]
    family_seed: u64,
    /// Requests per random-legal stream.
    #[arg(long, default_value_t = 10_000)]
    requests: u64,
    /// Requests per random-legal move.
    #[arg(long, default_value_t = 8)]
    batch: usize,
    /// Vertices available; defaults to what the staged Alice needs.
    #[arg(long)]
    universe: Option<BigUint>,
    /// Explicit stars per substage under orbit reduction.
    #[arg(long, default_value_t = 2)]
    cap: usize,
    #[arg(long, value_enum, default_value = "auto")]
    orbit: OrbitArg,
    #[arg(long)]
    max_moves: Option<u64>,
    /// Output directory (default `$CANTOR_GAMES_OUT` or `.`).
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Setup {
    cfg: GameConfig,
    alice: AliceName,
    bob: BobName,
    restricted: Option<(RestrictedParams, Arc<ColoringFamily>, Arc<DominanceFamily>)>,
}

fn setup(a: &PlayArgs) -> Result<Setup, Failure> {
    let cfgerr = |m: String| Failure::Config(m);
    if !a.d.is_neg_power_of_two() || a.d > Dyadic::one() {
        return Err(cfgerr(format!("--d {} must be a power of two at most 1, such as 1/2 or 1/2^7", a.d)));
    }
    if a.c.is_zero() || a.c > Dyadic::one() {
        return Err(cfgerr(format!("--c {} must lie in (0, 1]", a.c)));
    }
    if a.seeds == 0 || a.jobs == 0 {
        return Err(cfgerr("--seeds and --jobs must be positive".into()));
    }
    let restricted = a.kind == GameKind::Restricted;
    let alice = a.alice.unwrap_or(if restricted { AliceName::RandomLegal } else { AliceName::Stages });
    let bob = a.bob.unwrap_or(if restricted { BobName::Restricted } else { BobName::GreedyFixed });
    match (restricted, alice, bob) {
        (true, AliceName::Stages, _) => {
            return Err(cfgerr("the staged Alice plays the nonbipartite and bipartite games".into()))
        }
        (false, AliceName::RandomLegal, _) => {
            return Err(cfgerr("random-legal Alice plays the restricted game".into()))
        }
        (false, _, BobName::Restricted) => return Err(cfgerr("the restricted Bob plays the restricted game".into())),
        _ => {}
    }
    let mut cfg = if restricted {
        let mut c = GameConfig::restricted(a.n, a.p, a.d.clone());
        if let Some(u) = &a.universe {
            c.universe = u.clone();
        }
        c
    } else {
        let universe = match &a.universe {
            Some(u) => u.clone(),
            None => match a.kind {
                GameKind::Bipartite => {
                    let (l, r) = required_vertices_bipartite(&a.d).map_err(|e| cfgerr(e.to_string()))?;
                    l.max(r)
                }
                _ => required_vertices(&a.d).map_err(|e| cfgerr(e.to_string()))?,
            },
        };
        GameConfig::equivalent(a.kind, a.d.clone(), universe)
    };
    cfg.c = a.c.clone();
    if let Some(m) = a.max_moves {
        cfg.max_moves = m;
    }
    cfg.validate().map_err(|e| cfgerr(e.to_string()))?;
    let restricted = if bob == BobName::Restricted {
        let desk = RestrictedParams::desk();
        let params = if (a.n, a.p, &a.d, a.m) == (desk.n, desk.p, &desk.d, desk.coloring.m) {
            desk
        } else {
            RestrictedParams::scaled(a.n, a.p, a.d.clone(), a.m)
        };
        let cert = params.certificate();
        if !cert.holds() {
            return Err(cfgerr(format!("restricted parameters fail their certificate:\n{}", cert.to_text())));
        }
        let coloring = ColoringFamily::build(params.coloring.clone(), a.family_seed, 3)
            .map_err(|e| Failure::Check(format!("coloring family: {e}")))?;
        let dominance = DominanceFamily::build(params.dominance.clone(), a.family_seed ^ 0x9e37_79b9, 3)
            .map_err(|e| Failure::Check(format!("dominance family: {e}")))?;
        Some((params, Arc::new(coloring), Arc::new(dominance)))
    } else {
        None
    };
    Ok(Setup { cfg, alice, bob, restricted })
}

fn make_bob(s: &Setup, d: &Dyadic) -> Result<Box<dyn BobStrategy>, Failure> {
    let e = |e: cantor_games::StrategyError| Failure::Config(e.to_string());
    Ok(match s.bob {
        BobName::GreedyFixed => Box::new(GreedyFixed::new()),
        BobName::RegionsStatic => Box::new(RegionsStatic::for_budget(d).map_err(e)?),
        BobName::RegionsDynamic => Box::new(RegionsDynamic::for_budget(d).map_err(e)?),
        BobName::Restricted => {
            let (p, c, dm) = s.restricted.as_ref().expect("built in setup");
            Box::new(RestrictedBob::new(p.clone(), c.clone(), dm.clone()).map_err(e)?)
        }
    })
}

/// One finished match and what goes into its summary.
struct Played {
    seed: u64,
    res: MatchResult,
    blames: Option<(u64, u64)>,
    stages: Vec<(usize, u64, Dyadic, Dyadic)>,
}

fn play_one(s: &Setup, a: &PlayArgs, seed: u64) -> Result<Played, Failure> {
    let mut bob = make_bob(s, &a.d)?;
    let strings = match &s.restricted {
        Some((p, _, _)) => p.strings() as u64,
        None => 1u64 << a.m.min(63),
    };
    let cfg = s.cfg.clone();
    let (res, stages) = match s.alice {
        AliceName::Stages => {
            let mode = match a.orbit {
                OrbitArg::Auto => OrbitMode::Auto,
                OrbitArg::Explicit => OrbitMode::Explicit,
                OrbitArg::Orbit => OrbitMode::Orbit,
            };
            let mut alice = StagesAlice::new(AliceConfig { cap: a.cap, mode, ..AliceConfig::default() });
            let res = run_match(cfg, &mut alice, bob.as_mut());
            let st = alice
                .stage_logs()
                .iter()
                .map(|l| (l.stage, l.substages, l.zone_a.clone(), l.zone_b.clone()))
                .collect();
            (res, st)
        }
        AliceName::RandomLegal => {
            let mut alice = RandomLegalAlice::new(seed, strings, a.requests, a.batch);
            (run_match(cfg, &mut alice, bob.as_mut()), Vec::new())
        }
    };
    // blame totals come from the trace so any Bob can report them
    let mut per: std::collections::BTreeMap<String, u64> = Default::default();
    let mut total = 0;
    for r in &res.trace.records {
        if let cantor_games::referee::Payload::Labels(_, bl) = &r.payload {
            for (_, v) in bl {
                *per.entry(v.to_string()).or_default() += 1;
                total += 1;
            }
        }
    }
    let blames = (s.bob == BobName::Restricted).then(|| (total, per.values().copied().max().unwrap_or(0)));
    Ok(Played { seed, res, blames, stages })
}

/// Rule violations and failed internal assertions; ordinary forfeits such
/// as Bob running out of room are game results.
fn is_failure(reason: &str) -> bool {
    reason.starts_with("alice-violation")
        || reason.starts_with("bob-violation")
        || reason.contains("assertion failed")
        || reason.contains("protocol desync")
}

fn summary(s: &Setup, p: &Played) -> String {
    let o = &p.res.outcome;
    let mut out = String::new();
    let _ = writeln!(out, "kind {}", s.cfg.kind);
    let _ = writeln!(out, "d {}", s.cfg.d);
    let _ = writeln!(out, "seed {}", p.seed);
    let _ = writeln!(out, "winner {}", o.winner);
    let _ = writeln!(out, "reason {}", o.reason);
    let _ = writeln!(out, "moves {}", o.moves);
    let _ = writeln!(out, "max_load {}", p.res.state.max_load());
    let _ = writeln!(out, "edges {}", p.res.state.edges().len());
    let _ = writeln!(out, "unsatisfied {}", p.res.state.unsatisfied().len());
    if let Some((t, m)) = p.blames {
        let _ = writeln!(out, "blames {t}");
        let _ = writeln!(out, "max_blames_per_string {m}");
    }
    for (i, q, za, zb) in &p.stages {
        let _ = writeln!(out, "stage {i} substages={q} zone_a={za} zone_b={zb}");
    }
    for n in &p.res.trace.notes {
        let _ = writeln!(out, "note {n}");
    }
    if let Some((params, _, _)) = &s.restricted {
        out.push_str(&params.certificate().to_text());
    }
    out
}

pub fn run(a: PlayArgs) -> Outcome {
    let s = setup(&a)?;
    let dir = out_dir(&a.out)?;
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    let mut results: Vec<Result<Played, Failure>> = Vec::new();
    let jobs = a.jobs.min(seeds.len());
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<u64>> = (0..jobs).map(|j| seeds.iter().copied().skip(j).step_by(jobs).collect()).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let (s, a) = (&s, &a);
                scope.spawn(move || chunk.into_iter().map(|seed| play_one(s, a, seed)).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            results.extend(h.join().expect("match thread panicked"));
        }
    });
    let mut played = Vec::new();
    for r in results {
        played.push(r?);
    }
    played.sort_by_key(|p| p.seed);

    let name = |p: &Played| {
        let alice = s.alice.to_possible_value().expect("named").get_name().to_string();
        let bob = s.bob.to_possible_value().expect("named").get_name().to_string();
        format!("{}-{alice}-{bob}-seed{}", s.cfg.kind, p.seed)
    };
    let csv_path = dir.join("play-summary.csv");
    let mut csv = csv::Writer::from_path(&csv_path).map_err(|e| Failure::Config(format!("{}: {e}", csv_path.display())))?;
    let header = ["seed", "kind", "winner", "reason", "moves", "max_load", "edges", "blames", "max_blames_per_string"];
    csv.write_record(header).map_err(|e| Failure::Check(e.to_string()))?;
    let stages_path = dir.join("play-stages.csv");
    let mut stages_csv =
        csv::Writer::from_path(&stages_path).map_err(|e| Failure::Config(format!("{}: {e}", stages_path.display())))?;
    stages_csv
        .write_record(["seed", "stage", "substages", "zone_a", "zone_b"])
        .map_err(|e| Failure::Check(e.to_string()))?;
    let mut failures = Vec::new();
    for p in &played {
        let stem = name(p);
        let trace = dir.join(format!("{stem}.trace"));
        std::fs::write(&trace, p.res.trace.to_text()).map_err(io_err(&trace))?;
        let text = summary(&s, p);
        let sum = dir.join(format!("{stem}.summary.txt"));
        std::fs::write(&sum, &text).map_err(io_err(&sum))?;
        let o = &p.res.outcome;
        let (bt, bm) = p.blames.map(|(t, m)| (t.to_string(), m.to_string())).unwrap_or_default();
        csv.write_record([
            p.seed.to_string(),
            s.cfg.kind.to_string(),
            o.winner.to_string(),
            o.reason.clone(),
            o.moves.to_string(),
            p.res.state.max_load().to_string(),
            p.res.state.edges().len().to_string(),
            bt,
            bm,
        ])
        .map_err(|e| Failure::Check(e.to_string()))?;
        for (i, q, za, zb) in &p.stages {
            stages_csv
                .write_record([p.seed.to_string(), i.to_string(), q.to_string(), za.to_string(), zb.to_string()])
                .map_err(|e| Failure::Check(e.to_string()))?;
        }
        if played.len() == 1 {
            print!("{text}");
        } else {
            println!("seed {} winner {} moves {} reason {}", p.seed, o.winner, o.moves, o.reason);
        }
        println!("trace {}", trace.display());
        if is_failure(&o.reason) {
            failures.push(format!("seed {}: {}", p.seed, o.reason));
        }
        if s.bob == BobName::Restricted && o.winner != Player::Bob {
            failures.push(format!("seed {}: restricted Bob lost: {}", p.seed, o.reason));
        }
    }
    csv.flush().map_err(io_err(&csv_path))?;
    stages_csv.flush().map_err(io_err(&stages_path))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("; ")))
    }
}
