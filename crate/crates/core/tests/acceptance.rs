//! Acceptance suite: one line per criterion, run sequentially.
//!
//! `cargo test -p cantor-games --test acceptance`

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cantor_games::alice::{
    required_vertices, required_vertices_bipartite, AliceConfig, RandomLegalAlice, StagesAlice,
};
use cantor_games::bob::{GreedyFixed, RegionsDynamic, RegionsStatic, RestrictedBob, RestrictedParams};
use cantor_games::families::{ColoringFamily, DominanceFamily, DominanceParams};
use cantor_games::plain::{
    prefix_suffix_ball, prefix_suffix_members, single_sided_ball, EdgeColoring, SemimeasureAllocator,
};
use cantor_games::{
    run_match, BobStrategy, CantorInterval, ClopenSet, Dyadic, Edge, GameConfig, GameKind, GameState,
    Player,
};

struct Report {
    pass: bool,
    detail: String,
    /// Everything the criterion produced, folded into one hash.
    digest: u64,
}

#[derive(Default)]
struct Digest(DefaultHasher);

impl Digest {
    fn add(&mut self, x: impl Hash) {
        x.hash(&mut self.0);
    }

    fn finish(&self) -> u64 {
        self.0.finish()
    }
}

fn d(s: &str) -> Dyadic {
    s.parse().unwrap()
}

// ---- 1: clopen algebra against 4096-bit vectors

const DEPTH: u32 = 12;
const POINTS: usize = 1 << DEPTH;
const SHIFT: u32 = 127 - DEPTH;

type Bits = Vec<bool>;

fn to_bits(s: &ClopenSet) -> Bits {
    let mut b = vec![false; POINTS];
    for (lo, hi) in s.ranges() {
        assert_eq!(lo % (1 << SHIFT), 0);
        for p in (lo >> SHIFT) as usize..(hi >> SHIFT) as usize {
            b[p] = true;
        }
    }
    b
}

fn from_bits(b: &Bits) -> ClopenSet {
    ClopenSet::from_intervals(
        b.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| CantorInterval::new(i as u128, DEPTH).unwrap()),
    )
}

fn random_set(rng: &mut ChaCha8Rng) -> ClopenSet {
    let k = rng.gen_range(0..6);
    ClopenSet::from_intervals((0..k).map(|_| {
        let len = rng.gen_range(1..=DEPTH);
        CantorInterval::new(rng.gen_range(0..1u128 << len), len).unwrap()
    }))
}

fn cell_range(len: u32, i: usize) -> std::ops::Range<usize> {
    let w = 1 << (DEPTH - len);
    i * w..(i + 1) * w
}

fn criterion_1() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let mut ops = 0;
    while ops < 10_000 {
        let a = random_set(&mut rng);
        let b = random_set(&mut rng);
        let (ba, bb) = (to_bits(&a), to_bits(&b));
        if from_bits(&ba) != a || a.to_string().parse::<ClopenSet>().unwrap() != a {
            bad.push(format!("canonical form of {a}"));
        }
        let op = rng.gen_range(0..9);
        let ok = match op {
            0 => to_bits(&a.union(&b)) == ba.iter().zip(&bb).map(|(x, y)| *x || *y).collect::<Bits>(),
            1 => to_bits(&a.intersection(&b)) == ba.iter().zip(&bb).map(|(x, y)| *x && *y).collect::<Bits>(),
            2 => to_bits(&a.difference(&b)) == ba.iter().zip(&bb).map(|(x, y)| *x && !*y).collect::<Bits>(),
            3 => to_bits(&a.complement()) == ba.iter().map(|x| !x).collect::<Bits>(),
            4 => {
                let n = ba.iter().filter(|x| **x).count() as u64;
                a.measure() == Dyadic::from_parts(n, DEPTH as u64)
                    && a.is_disjoint(&b) == !ba.iter().zip(&bb).any(|(x, y)| *x && *y)
                    && a.is_subset(&b) == ba.iter().zip(&bb).all(|(x, y)| !*x || *y)
            }
            5 => {
                let k = rng.gen_range(0..=DEPTH);
                let mut want = vec![false; POINTS];
                for i in 0..1usize << k {
                    let r = cell_range(k, i);
                    if ba[r.clone()].iter().any(|x| *x) {
                        want[r].iter_mut().for_each(|x| *x = true);
                    }
                }
                to_bits(&a.neighborhood_at_depth(k)) == want
            }
            6 => {
                let have = ba.iter().filter(|x| **x).count();
                let t = if have == 0 { 0 } else { rng.gen_range(0..=have) };
                let got = a.carve(&Dyadic::from_parts(t as u64, DEPTH as u64)).unwrap();
                let mut want = vec![false; POINTS];
                let mut left = t;
                for i in 0..POINTS {
                    if ba[i] && left > 0 {
                        want[i] = true;
                        left -= 1;
                    }
                }
                let over = a.carve(&Dyadic::from_parts(have as u64 + 1, DEPTH as u64)).is_err();
                to_bits(&got) == want && over
            }
            7 => {
                let k = rng.gen_range(0..=DEPTH);
                let got = a.find_free_interval(&Dyadic::pow2_neg(k as u64)).unwrap();
                let want = (0..1usize << k).find(|&i| ba[cell_range(k, i)].iter().all(|x| !x));
                got.map(|c| (c.bits() as usize, c.len())) == want.map(|i| (i, k))
            }
            _ => {
                let k = rng.gen_range(0..=DEPTH);
                let got = cantor_games::cantor::first_free_cell(k, Some(&b), &[&a]);
                let want = (0..1usize << k).find(|&i| {
                    let r = cell_range(k, i);
                    ba[r.clone()].iter().all(|x| !x) && bb[r].iter().all(|x| *x)
                });
                got.map(|c| (c.bits() as usize, c.len())) == want.map(|i| (i, k))
            }
        };
        dig.add((op, a.to_string(), b.to_string(), ok));
        if !ok {
            bad.push(format!("op {op} on {a} / {b}"));
        }
        ops += 1;
    }
    Report {
        pass: bad.is_empty(),
        detail: format!("{ops} operations, {} mismatches{}", bad.len(), first(&bad)),
        digest: dig.finish(),
    }
}

fn first(v: &[String]) -> String {
    v.first().map(|s| format!(", first: {s}")).unwrap_or_default()
}

// ---- 2 and 3: the staged Alice

fn bobs(budget: &Dyadic) -> Vec<Box<dyn BobStrategy>> {
    vec![
        Box::new(GreedyFixed::new()),
        Box::new(RegionsStatic::for_budget(budget).unwrap()),
        Box::new(RegionsDynamic::for_budget(budget).unwrap()),
    ]
}

fn alice_vs_all(kind: GameKind, universe: BigUint) -> Report {
    let half = d("1/2");
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let mut parts = Vec::new();
    for mut bob in bobs(&half) {
        let cfg = GameConfig::equivalent(kind, half.clone(), universe.clone());
        let mut alice = StagesAlice::new(AliceConfig::default());
        let res = run_match(cfg, &mut alice, bob.as_mut());
        let text = res.trace.to_text();
        dig.add(&text);
        let name = bob.name();
        if res.outcome.winner != Player::Alice {
            bad.push(format!("{name}: {}", res.outcome.reason));
        }
        if let Err(e) = res.state.audit() {
            bad.push(format!("{name}: audit {e}"));
        }
        if alice.max_active_spend() > &half.half() || alice.max_center_load() > &half {
            bad.push(format!("{name}: spend {}", alice.max_active_spend()));
        }
        let logs = alice.stage_logs();
        if alice.final_edge().is_some() {
            if logs.len() != 4 {
                bad.push(format!("{name}: {} stages", logs.len()));
            }
            if let Some(l) = logs.iter().find(|l| l.growth() < half.half()) {
                bad.push(format!("{name}: stage {} grew {}", l.stage, l.growth()));
            }
            if alice.final_free_cell() != Some(false) {
                bad.push(format!("{name}: final request matchable"));
            }
        }
        let how = if alice.final_edge().is_some() { "final request unmatchable" } else { "Bob forfeits" };
        parts.push(format!("{name}: {how} after {} moves", res.outcome.moves));
    }
    Report {
        pass: bad.is_empty(),
        detail: format!("{}{}", parts.join("; "), first(&bad)),
        digest: dig.finish(),
    }
}

fn criterion_2() -> Report {
    alice_vs_all(GameKind::Nonbipartite, required_vertices(&d("1/2")).unwrap())
}

fn criterion_3() -> Report {
    let (l, r) = required_vertices_bipartite(&d("1/2")).unwrap();
    alice_vs_all(GameKind::Bipartite, l.max(r))
}

// ---- 4 and 6: the restricted game

struct Restricted {
    params: RestrictedParams,
    coloring: Arc<ColoringFamily>,
    dominance: Arc<DominanceFamily>,
}

fn restricted() -> Restricted {
    let params = RestrictedParams::desk();
    let coloring = ColoringFamily::build(params.coloring.clone(), 4, 3).expect("coloring family");
    let dominance = DominanceFamily::build(params.dominance.clone(), 4 ^ 0x9e37_79b9, 3).expect("dominance family");
    Restricted { params, coloring: Arc::new(coloring), dominance: Arc::new(dominance) }
}

struct StreamStats {
    max_blames: u64,
    monitor_max: u64,
    monitor_runs: u64,
}

fn criterion_4(ctx: &Restricted, stats: &mut StreamStats) -> Report {
    let p = &ctx.params;
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let cert = p.certificate();
    dig.add(cert.to_text());
    if !cert.holds() {
        bad.push("certificate fails".to_string());
    }
    let mut requests = 0;
    for seed in 0..100u64 {
        let mut bob = RestrictedBob::new(p.clone(), ctx.coloring.clone(), ctx.dominance.clone()).unwrap();
        let mut alice = RandomLegalAlice::new(seed, p.strings() as u64, 10_000, 8);
        let cfg = GameConfig::restricted(p.n, p.p, p.d.clone());
        let res = run_match(cfg, &mut alice, &mut bob);
        dig.add(res.trace.to_text());
        requests += alice.issued();
        if res.outcome.winner != Player::Bob || !res.state.unsatisfied().is_empty() || alice.issued() < 10_000 {
            bad.push(format!("seed {seed}: {} after {} requests", res.outcome.reason, alice.issued()));
        }
        if bob.max_blames() > p.blame_bound {
            bad.push(format!("seed {seed}: {} blames", bob.max_blames()));
        }
        stats.max_blames = stats.max_blames.max(bob.max_blames());
        stats.monitor_max = stats.monitor_max.max(bob.monitor_max());
        stats.monitor_runs += bob.monitor_runs();
    }
    Report {
        pass: bad.is_empty(),
        detail: format!(
            "100 streams, {requests} requests allocated, max blames per string {} (bound {}){}",
            stats.max_blames,
            p.blame_bound,
            first(&bad)
        ),
        digest: dig.finish(),
    }
}

fn criterion_6(ctx: &Restricted, stats: &StreamStats) -> Report {
    let f = &ctx.coloring;
    let r = f.params.r;
    let ell = f.params.ell as u64;
    let rr = (r * r) as u64;
    let (lo, hi) = (ell.div_ceil(2 * rr), 2 * ell / rr);
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let (mut min, mut max) = (u64::MAX, 0);
    let mut counts = vec![0u64; r * r];
    for v in 0..f.len() {
        for w in v + 1..f.len() {
            counts.iter_mut().for_each(|c| *c = 0);
            for (a, b) in f.word(v).iter().zip(f.word(w)) {
                counts[*a as usize * r + *b as usize] += 1;
            }
            for &c in &counts {
                min = min.min(c);
                max = max.max(c);
                if c < lo || c > hi {
                    bad.push(format!("strings {v},{w}: {c}"));
                }
            }
            dig.add(&counts);
        }
    }
    let k = 64 * rr;
    if stats.monitor_max > k {
        bad.push(format!("monitor reached {}", stats.monitor_max));
    }
    dig.add((stats.monitor_max, stats.monitor_runs));
    Report {
        pass: bad.is_empty() && f.first_condition_violation().is_none(),
        detail: format!(
            "{} strings, overlaps in [{min}, {max}] within [{lo}, {hi}]; monitor max {} over {} runs (k = {k}){}",
            f.len(),
            stats.monitor_max,
            stats.monitor_runs,
            first(&bad)
        ),
        digest: dig.finish(),
    }
}

// ---- 5: dominance patterns

fn criterion_5() -> Report {
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let mut builds = 0;
    let mut worst_attempts = 0;
    for n in 4..=8u32 {
        let params = DominanceParams { n, m: n, s: 64 * n as usize };
        for seed in 0..100 {
            let fam = match DominanceFamily::build(params.clone(), seed, 3) {
                Ok(f) => f,
                Err(e) => {
                    bad.push(format!("n={n} seed {seed}: {e}"));
                    continue;
                }
            };
            builds += 1;
            worst_attempts = worst_attempts.max(fam.attempts);
            dig.add(fam.to_text());
            let s = params.s;
            let rows: Vec<Vec<bool>> = (0..fam.len()).map(|v| (0..s).map(|i| fam.dominant(v, i)).collect()).collect();
            for a in 0..rows.len() {
                for b in 0..rows.len() {
                    if a == b {
                        continue;
                    }
                    let c = rows[a].iter().zip(&rows[b]).filter(|(x, y)| **x && !**y).count();
                    if 8 * c < s {
                        bad.push(format!("n={n} seed {seed}: pair {a},{b} has {c}"));
                    }
                }
            }
        }
    }
    Report {
        pass: bad.is_empty(),
        detail: format!("{builds}/500 families built, at most {worst_attempts} attempts, pairs verified{}", first(&bad)),
        digest: dig.finish(),
    }
}

// ---- 7: greedy and region strategies

fn respond_and_apply(g: &mut GameState, bob: &mut dyn BobStrategy, req: &[(Edge, Dyadic)]) -> Result<(), String> {
    g.apply_alice_move(req).map_err(|e| e.to_string())?;
    let mv = bob.respond(g, req).map_err(|e| e.to_string())?;
    g.apply_bob_move(&mv.labels).map_err(|e| e.to_string())?;
    if g.unsatisfied().is_empty() {
        Ok(())
    } else {
        Err("unsatisfied edge".into())
    }
}

/// A random stream at budget `d` over `verts` vertices with sizes drawn
/// from `ks`; `cap` bounds the sum over sizes of the largest per-vertex
/// load of that size.
fn random_stream(
    rng: &mut ChaCha8Rng,
    verts: u64,
    d: &Dyadic,
    ks: &[u64],
    cap: Option<&Dyadic>,
    len: usize,
) -> Vec<(Edge, Dyadic)> {
    let mut load: BTreeMap<u64, Dyadic> = BTreeMap::new();
    let mut per: BTreeMap<(u64, u64), Dyadic> = BTreeMap::new();
    let mut max: BTreeMap<u64, Dyadic> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..len * 20 {
        if out.len() == len {
            break;
        }
        let (x, y) = (rng.gen_range(0..verts), rng.gen_range(0..verts));
        let k = ks[rng.gen_range(0..ks.len())];
        let w = Dyadic::pow2_neg(k);
        if x == y || seen.contains(&(x.min(y), x.max(y))) {
            continue;
        }
        if [x, y].iter().any(|v| load.get(v).cloned().unwrap_or_default() + w.clone() > *d) {
            continue;
        }
        if let Some(cap) = cap {
            let mut m = max.clone();
            for v in [x, y] {
                let l = per.get(&(k, v)).cloned().unwrap_or_default() + w.clone();
                let e = m.entry(k).or_default();
                if l > *e {
                    *e = l;
                }
            }
            if m.values().sum::<Dyadic>() > *cap {
                continue;
            }
            max = m;
        }
        for v in [x, y] {
            *load.entry(v).or_default() += &w;
            *per.entry((k, v)).or_default() += &w;
        }
        seen.insert((x.min(y), x.max(y)));
        out.push((Edge::between(x, y), w));
    }
    out
}

/// Least aligned depth-`k` cell free at both endpoints, from the labels.
fn brute_cell(labels: &[(u64, u64, ClopenSet)], x: u64, y: u64, k: u32) -> Option<usize> {
    let mut used = vec![false; POINTS];
    for (a, b, s) in labels {
        if [*a, *b].iter().any(|v| *v == x || *v == y) {
            for (i, bit) in to_bits(s).into_iter().enumerate() {
                used[i] |= bit;
            }
        }
    }
    (0..1usize << k).find(|&i| used[cell_range(k, i)].iter().all(|u| !u))
}

fn criterion_7() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let half = d("1/2");
    let quarter = d("1/4");
    for t in 0..1000 {
        let k = rng.gen_range(1..=8);
        let stream = random_stream(&mut rng, 12, &half, &[k], None, 60);
        let mut g = GameState::new(GameConfig::equivalent(GameKind::Nonbipartite, half.clone(), 12u32.into()));
        let mut bob = GreedyFixed::new();
        for req in &stream {
            if let Err(e) = respond_and_apply(&mut g, &mut bob, std::slice::from_ref(req)) {
                bad.push(format!("greedy stream {t}: {e}"));
                break;
            }
        }
        dig.add(format!("{:?}", g.edges()));
    }
    let mut most = 0;
    for t in 0..1000 {
        let s = [2usize, 3, 4][t % 3];
        let mut ks: Vec<u64> = (3..=9).collect();
        while ks.len() > s {
            ks.remove(rng.gen_range(0..ks.len()));
        }
        let sizes: Vec<Dyadic> = ks.iter().map(|k| Dyadic::pow2_neg(*k)).collect();
        let stream = random_stream(&mut rng, 10, &quarter, &ks, Some(&quarter), 80);
        let mut g = GameState::new(GameConfig::equivalent(GameKind::Nonbipartite, quarter.clone(), 10u32.into()));
        let mut bob = RegionsDynamic::new(&sizes).unwrap();
        for req in &stream {
            if let Err(e) = respond_and_apply(&mut g, &mut bob, std::slice::from_ref(req)) {
                bad.push(format!("regions stream {t}: {e}"));
                break;
            }
        }
        most = most.max(bob.regions_assigned());
        dig.add(format!("{:?}", g.edges()));
    }
    // every stream of at most 3 distinct edges on 4 vertices, sizes 2^-1..2^-4
    let pairs: Vec<(u64, u64)> = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut cases = 0;
    let mut stack: Vec<Vec<(usize, u32)>> = vec![vec![]];
    while let Some(s) = stack.pop() {
        if s.len() < 3 {
            for p in 0..pairs.len() {
                if s.iter().all(|(q, _)| *q != p) {
                    for k in 1..=4 {
                        let mut t = s.clone();
                        t.push((p, k));
                        stack.push(t);
                    }
                }
            }
        }
        if s.is_empty() {
            continue;
        }
        cases += 1;
        let mut g = GameState::new(GameConfig::equivalent(GameKind::Nonbipartite, Dyadic::one(), 4u32.into()));
        let mut bob = GreedyFixed::new();
        let mut labels: Vec<(u64, u64, ClopenSet)> = Vec::new();
        for &(p, k) in &s {
            let (x, y) = pairs[p];
            let want = brute_cell(&labels, x, y, k);
            let e = Edge::between(x, y);
            let req = [(e, Dyadic::pow2_neg(k as u64))];
            let got = respond_and_apply(&mut g, &mut bob, &req);
            match (want, got) {
                (Some(i), Ok(())) => {
                    let lab = g.label(&e);
                    if lab != ClopenSet::from_interval(CantorInterval::new(i as u128, k).unwrap()) {
                        bad.push(format!("case {s:?}: greedy chose {lab}"));
                    }
                    labels.push((x, y, lab));
                }
                (None, Err(_)) => break,
                (w, g) => {
                    bad.push(format!("case {s:?}: brute {w:?}, greedy {g:?}"));
                    break;
                }
            }
        }
    }
    dig.add(cases);
    Report {
        pass: bad.is_empty(),
        detail: format!(
            "1000 greedy streams, 1000 region streams (at most {most} regions assigned), {cases} exhaustive cases{}",
            first(&bad)
        ),
        digest: dig.finish(),
    }
}

// ---- 8: edge coloring

fn criterion_8() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let mut c = EdgeColoring::new();
    let mut deg: BTreeMap<(u32, u64), u64> = BTreeMap::new();
    let mut edges: Vec<(u32, u64, u64, u64)> = Vec::new();
    let mut seen = BTreeSet::new();
    while edges.len() < 10_000 {
        let n = rng.gen_range(1..=6u32);
        let verts = 1u64 << (n + 2);
        let (u, v) = (rng.gen_range(0..verts), rng.gen_range(0..verts));
        let limit = (1u64 << n) - 1;
        if u == v || seen.contains(&(n, u.min(v), u.max(v))) {
            continue;
        }
        if deg.get(&(n, u)).copied().unwrap_or(0) >= limit || deg.get(&(n, v)).copied().unwrap_or(0) >= limit {
            if c.add(n, u, v).is_ok() {
                bad.push(format!("degree promise not enforced at {n}:{u}-{v}"));
            }
            continue;
        }
        match c.add(n, u, v) {
            Ok(col) => {
                *deg.entry((n, u)).or_default() += 1;
                *deg.entry((n, v)).or_default() += 1;
                seen.insert((n, u.min(v), u.max(v)));
                edges.push((n, u, v, col));
            }
            Err(e) => bad.push(format!("{n}:{u}-{v}: {e}")),
        }
        if edges.len() % 1000 == 0 {
            if let Some(e) = edges.iter().find(|(n, u, v, col)| c.color(*n, *u, *v) != Some(*col)) {
                bad.push(format!("color of {e:?} changed"));
            }
        }
    }
    // brute force: colors fit in n+1 bits and differ on every pair of
    // edges sharing an endpoint at the same level
    let mut at: BTreeMap<(u32, u64), Vec<u64>> = BTreeMap::new();
    for &(n, u, v, col) in &edges {
        if col >= 1 << (n + 1) || c.color_bits(n, u, v).map(|b| b.len()) != Some(n as usize + 1) {
            bad.push(format!("{n}:{u}-{v} color {col} too wide"));
        }
        if c.partner(n, col, u) != Some(v) || c.partner(n, col, v) != Some(u) {
            bad.push(format!("{n}:{u}-{v} lookup"));
        }
        at.entry((n, u)).or_default().push(col);
        at.entry((n, v)).or_default().push(col);
    }
    for (k, cols) in &at {
        let set: BTreeSet<_> = cols.iter().collect();
        if set.len() != cols.len() {
            bad.push(format!("improper at {k:?}"));
        }
    }
    dig.add(c.to_text());
    Report {
        pass: bad.is_empty(),
        detail: format!("{} edges over levels 1..6, proper and immutable{}", edges.len(), first(&bad)),
        digest: dig.finish(),
    }
}

// ---- 9: semimeasure allocator

fn criterion_9() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let mut a = SemimeasureAllocator::new();
    let mut table: BTreeMap<(u64, u64), Dyadic> = BTreeMap::new();
    let mut rows: BTreeMap<u64, Dyadic> = BTreeMap::new();
    let one = Dyadic::one();
    let mut steps = 0;
    let mut refused = 0;
    let mut attempts = 0;
    while steps < 10_000 && attempts < 100_000 {
        attempts += 1;
        let (x, y) = (rng.gen_range(0..64u64), rng.gen_range(0..64u64));
        let row = |v: u64| rows.get(&v).cloned().unwrap_or_default();
        let slack = one.saturating_sub(&row(x)).min(one.saturating_sub(&row(y)));
        // the largest legal increment, then a random smaller power
        let Some(kmin) = slack.floor_neg_log2() else { continue };
        let probe_illegal = attempts % 10 == 0 && kmin > 0;
        let r = if probe_illegal {
            Dyadic::pow2_neg(kmin - 1)
        } else {
            Dyadic::pow2_neg(rng.gen_range(kmin.max(2)..=kmin.max(2) + 12))
        };
        let legal = row(x) + r.clone() <= one && (x == y || row(y) + r.clone() <= one);
        let snapshot = |a: &SemimeasureAllocator| {
            (a.weight(x, y), a.set(x, y), a.row_sum(x), a.row_sum(y), a.occupied(x), a.occupied(y))
        };
        let before = probe_illegal.then(|| snapshot(&a));
        match a.step(x, y, &r) {
            Ok(()) if legal => {
                *table.entry((x.min(y), x.max(y))).or_default() += &r;
                *rows.entry(x).or_default() += &r;
                if x != y {
                    *rows.entry(y).or_default() += &r;
                }
                steps += 1;
            }
            Err(cantor_games::PlainError::RowSumExceeded { .. }) if !legal => {
                refused += 1;
                if before != Some(snapshot(&a)) {
                    bad.push(format!("refused step {x},{y},{r} changed the state"));
                }
            }
            other => {
                bad.push(format!("step {x},{y},{r}: {other:?}, legal {legal}"));
                break;
            }
        }
    }
    if steps < 10_000 {
        bad.push(format!("only {steps} legal steps found"));
    }
    for (&(x, y), u) in &table {
        if a.set(x, y).measure() != u.half() {
            bad.push(format!("U({x},{y}) has measure {}", a.set(x, y).measure()));
        }
    }
    for x in 0..64 {
        let mut acc = ClopenSet::empty();
        for ((p, q), s) in a.pairs() {
            if *p == x || *q == x {
                if !acc.is_disjoint(s) {
                    bad.push(format!("overlap at {x}"));
                }
                acc = acc.union(s);
            }
        }
    }
    dig.add(a.to_text());
    Report {
        pass: bad.is_empty() && a.check().is_ok(),
        detail: format!("{steps} steps ({refused} refused as illegal), measures exact, rows disjoint{}", first(&bad)),
        digest: dig.finish(),
    }
}

// ---- 10: prefix/suffix balls

fn criterion_10() -> Report {
    let n = 24u32;
    let mut dig = Digest::default();
    let mut bad = Vec::new();
    let mut rows = Vec::new();
    let x: u64 = 0x5a_c3_96;
    for m in 4..=8u32 {
        // brute force over all 2^24 strings
        let (mut both, mut single) = (0u128, 0u128);
        for y in 0..1u64 << n {
            let z = x ^ y;
            let in_ball = (0..=m).any(|k| {
                let l = m - k;
                let keep = !((1u64 << k) - 1) & ((1u64 << (n - l)) - 1);
                z & keep == 0
            });
            both += in_ball as u128;
            single += (z >> m == 0) as u128;
        }
        let count = prefix_suffix_ball(n, m).unwrap();
        let members = prefix_suffix_members(x, n, m).unwrap();
        if count != both || members.len() as u128 != both || single_sided_ball(n, m).unwrap() != single {
            bad.push(format!("m={m}: formula {count}, enumeration {both}"));
        }
        if 4 * both < (m as u128) << m || single > 1 << m {
            bad.push(format!("m={m}: ratio fails"));
        }
        rows.push(format!("m={m}: {both}/2^{m} = {:.2}", both as f64 / (1u64 << m) as f64));
        dig.add((m, both, single, members));
    }
    Report {
        pass: bad.is_empty(),
        detail: format!("{}; single-sided = 2^m{}", rows.join(", "), first(&bad)),
        digest: dig.finish(),
    }
}

// ---- driver

type Run = Vec<(usize, Report, Duration)>;

/// Runs criteria 1-10, printing each result when `show` is set.
fn run_all(show: bool) -> Run {
    let mut out = Vec::new();
    let time = |i: usize, f: &mut dyn FnMut() -> Report, out: &mut Run| {
        let t = Instant::now();
        let r = f();
        let el = t.elapsed();
        if show {
            println!("criterion {i:>2}: {} ({:.1}s) {}", if r.pass { "PASS" } else { "FAIL" }, el.as_secs_f64(), r.detail);
        }
        out.push((i, r, el));
    };
    time(1, &mut criterion_1, &mut out);
    time(2, &mut criterion_2, &mut out);
    time(3, &mut criterion_3, &mut out);
    let ctx = restricted();
    let mut stats = StreamStats { max_blames: 0, monitor_max: 0, monitor_runs: 0 };
    time(4, &mut || criterion_4(&ctx, &mut stats), &mut out);
    time(5, &mut criterion_5, &mut out);
    time(6, &mut || criterion_6(&ctx, &stats), &mut out);
    time(7, &mut criterion_7, &mut out);
    time(8, &mut criterion_8, &mut out);
    time(9, &mut criterion_9, &mut out);
    time(10, &mut criterion_10, &mut out);
    out
}

fn main() {
    let start = Instant::now();
    let mut failed = 0;
    let first = run_all(true);
    failed += first.iter().filter(|(_, r, _)| !r.pass).count();
    let t = Instant::now();
    let second = run_all(false);
    let differ: Vec<String> = first
        .iter()
        .zip(&second)
        .filter(|((_, a, _), (_, b, _))| a.digest != b.digest || a.detail != b.detail)
        .map(|((i, _, _), _)| i.to_string())
        .collect();
    let ok = differ.is_empty();
    println!(
        "criterion 11: {} ({:.1}s) criteria 1-10 rerun {}",
        if ok { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64(),
        if ok { "byte-identically".to_string() } else { format!("with different output for {}", differ.join(", ")) }
    );
    failed += !ok as usize;
    println!("{} of 11 criteria passed in {:.1}s", 11 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
