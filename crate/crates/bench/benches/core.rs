use std::hint::black_box;
use std::sync::Arc;

use cantor_games::alice::RandomLegalAlice;
use cantor_games::bob::{GreedyFixed, RestrictedBob, RestrictedParams};
use cantor_games::families::{ColoringFamily, DominanceFamily};
use cantor_games::plain::{EdgeColoring, SemimeasureAllocator};
use cantor_games::{run_match, BobStrategy, CantorInterval, ClopenSet, Dyadic, Edge, GameConfig, GameKind, GameState};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_set(rng: &mut ChaCha8Rng, parts: usize) -> ClopenSet {
    ClopenSet::from_intervals((0..parts).map(|_| {
        let len = rng.gen_range(1..=40);
        CantorInterval::new(rng.gen_range(0..1u128 << len), len).unwrap()
    }))
}

fn clopen(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sets: Vec<ClopenSet> = (0..64).map(|_| random_set(&mut rng, 200)).collect();
    c.bench_function("clopen union+intersection", |b| {
        b.iter(|| {
            let mut acc = ClopenSet::empty();
            for w in sets.windows(2) {
                acc = acc.union(&w[0].intersection(&w[1]));
            }
            black_box(acc)
        })
    });
    c.bench_function("clopen carve", |b| {
        let t = Dyadic::pow2_neg(9);
        b.iter(|| sets.iter().map(|s| s.complement().carve(&t).is_ok()).count())
    });
}

fn greedy(c: &mut Criterion) {
    c.bench_function("greedy 2000 requests", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let half = Dyadic::pow2_neg(1);
            let mut g = GameState::new(GameConfig::equivalent(GameKind::Nonbipartite, half, 64u32.into()));
            let mut bob = GreedyFixed::new();
            let w = Dyadic::pow2_neg(12);
            let mut done = 0;
            while done < 2000 {
                let (x, y) = (rng.gen_range(0..64), rng.gen_range(0..64));
                let e = Edge::between(x, y);
                if x == y || !g.weight(&e).is_zero() {
                    continue;
                }
                let req = [(e, w.clone())];
                if g.apply_alice_move(&req).is_err() {
                    continue;
                }
                let mv = bob.respond(&g, &req).unwrap();
                g.apply_bob_move(&mv.labels).unwrap();
                done += 1;
            }
            black_box(g.max_load())
        })
    });
}

fn restricted(c: &mut Criterion) {
    let p = RestrictedParams::desk();
    let coloring = Arc::new(ColoringFamily::build(p.coloring.clone(), 4, 3).unwrap());
    let dominance = Arc::new(DominanceFamily::build(p.dominance.clone(), 5, 3).unwrap());
    let mut group = c.benchmark_group("restricted");
    group.sample_size(10);
    group.bench_function("desk stream of 2000", |b| {
        b.iter(|| {
            let mut bob = RestrictedBob::new(p.clone(), coloring.clone(), dominance.clone()).unwrap();
            let mut alice = RandomLegalAlice::new(3, p.strings() as u64, 2000, 8);
            let cfg = GameConfig::restricted(p.n, p.p, p.d.clone());
            black_box(run_match(cfg, &mut alice, &mut bob).outcome)
        })
    });
    group.finish();
}

fn plain(c: &mut Criterion) {
    c.bench_function("edge coloring 5000 edges", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let mut col = EdgeColoring::new();
            let mut n = 0;
            while n < 5000 {
                let (u, v) = (rng.gen_range(0..4096), rng.gen_range(0..4096));
                if u != v && col.add(10, u, v).is_ok() {
                    n += 1;
                }
            }
            black_box(col.len())
        })
    });
    c.bench_function("allocator 2000 steps", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut a = SemimeasureAllocator::new();
            let mut steps = 0;
            while steps < 2000 {
                let (x, y) = (rng.gen_range(0..64), rng.gen_range(0..64));
                if a.step(x, y, &Dyadic::pow2_neg(rng.gen_range(8..20))).is_ok() {
                    steps += 1;
                }
            }
            black_box(a.row_sum(0))
        })
    });
}

criterion_group!(benches, clopen, greedy, restricted, plain);
criterion_main!(benches);
