use std::collections::BTreeSet;

use cantor_games::plain::{ball_csv, EdgeColoring, OrdinalEncoder, SemimeasureAllocator};
use cantor_games::Dyadic;
use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Failure, Outcome};

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[command(subcommand)]
    what: Demo,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// Color a random stream of edges with degrees below 2^n.
    Coloring {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 16)]
        vertices: u64,
        #[arg(long, default_value_t = 24)]
        edges: usize,
    },
    /// Feed random increments to the semimeasure allocator.
    Allocator {
        #[arg(long, default_value_t = 6)]
        vertices: u64,
        #[arg(long, default_value_t = 12)]
        steps: usize,
    },
    /// Ordinal codes for an enumeration at level n.
    Ordinal {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        c: u64,
        #[arg(long, default_value_t = 5)]
        items: u64,
    },
    /// Prefix/suffix ball sizes as CSV.
    Ball {
        #[arg(long, default_value_t = 24)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        from: u32,
        #[arg(long, default_value_t = 8)]
        to: u32,
    },
}

pub fn run(a: DemoArgs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    match a.what {
        Demo::Coloring { n, vertices, edges } => {
            if n == 0 || n > 20 || vertices < 2 {
                return Err(Failure::Config("need 1 <= n <= 20 and at least two vertices".into()));
            }
            let mut c = EdgeColoring::new();
            let mut seen = BTreeSet::new();
            let mut tries = 0;
            println!("level\tu\tv\tcolor");
            while c.len() < edges && tries < 100 * edges {
                tries += 1;
                let (u, v) = (rng.gen_range(0..vertices), rng.gen_range(0..vertices));
                if u == v || !seen.insert((u.min(v), u.max(v))) {
                    continue;
                }
                match c.add(n, u, v) {
                    Ok(_) => println!("{n}\t{u}\t{v}\t{}", c.color_bits(n, u, v).expect("colored")),
                    Err(e) => println!("# skipped {u}-{v}: {e}"),
                }
            }
            Ok(())
        }
        Demo::Allocator { vertices, steps } => {
            let mut al = SemimeasureAllocator::new();
            for _ in 0..steps {
                let (x, y) = (rng.gen_range(0..vertices), rng.gen_range(0..vertices));
                let r = Dyadic::pow2_neg(rng.gen_range(1..=4));
                match al.step(x, y, &r) {
                    Ok(()) => println!("u({x},{y}) += {r}: U = {}", al.set(x, y)),
                    Err(e) => println!("u({x},{y}) += {r}: refused ({e})"),
                }
            }
            al.check().map_err(Failure::Check)?;
            println!("invariants hold");
            Ok(())
        }
        Demo::Ordinal { n, c, items } => {
            let mut enc = OrdinalEncoder::new(n, c).map_err(|e| Failure::Config(e.to_string()))?;
            for i in 0..items {
                let y = rng.gen_range(0..1u64 << 20) ^ i << 20;
                match enc.push(y) {
                    Ok(code) => println!("{y} -> {code:?}"),
                    Err(e) => println!("{y} -> {e}"),
                }
            }
            Ok(())
        }
        Demo::Ball { n, from, to } => {
            print!("{}", ball_csv(n, from..=to).map_err(|e| Failure::Config(e.to_string()))?);
            Ok(())
        }
    }
}
