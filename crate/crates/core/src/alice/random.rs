use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::Dyadic;
use crate::error::StrategyError;
use crate::referee::{AliceMove, AliceStrategy, Edge, GameKind, GameState, Node};

/// Random requests of the allowed sizes between random pairs of strings,
/// each on a fresh edge and within the budget at both endpoints.
#[derive(Debug, Clone)]
pub struct RandomLegalAlice {
    rng: ChaCha8Rng,
    strings: u64,
    total: u64,
    batch: usize,
    issued: u64,
    seen: BTreeSet<Edge>,
}

impl RandomLegalAlice {
    /// `total` requests over strings `0..strings`, `batch` per move.
    pub fn new(seed: u64, strings: u64, total: u64, batch: usize) -> Self {
        RandomLegalAlice {
            rng: ChaCha8Rng::seed_from_u64(seed),
            strings,
            total,
            batch: batch.max(1),
            issued: 0,
            seen: BTreeSet::new(),
        }
    }

    pub fn issued(&self) -> u64 {
        self.issued
    }
}

impl AliceStrategy for RandomLegalAlice {
    fn name(&self) -> String {
        "random-legal".into()
    }

    fn next_move(&mut self, view: &GameState) -> Result<AliceMove, StrategyError> {
        let cfg = view.config();
        if cfg.kind != GameKind::Restricted {
            return Err(StrategyError::InvalidParameters("random-legal plays the restricted game".into()));
        }
        if self.strings < 2 {
            return Err(StrategyError::InvalidParameters("need at least two strings".into()));
        }
        let exps: Vec<u32> = cfg.restricted_exponents().collect();
        if exps.is_empty() {
            return Err(StrategyError::InvalidParameters("no allowed request size".into()));
        }
        let mut extra: BTreeMap<Node, Dyadic> = BTreeMap::new();
        let mut reqs = Vec::new();
        let mut misses = 0;
        while reqs.len() < self.batch && self.issued < self.total && misses < 1000 {
            let x = self.rng.gen_range(0..self.strings);
            let y = self.rng.gen_range(0..self.strings);
            let k = exps[self.rng.gen_range(0..exps.len())];
            if x == y {
                continue;
            }
            let e = Edge::between(x, y);
            let w = Dyadic::pow2_neg(k as u64);
            let fits = |v: Node, extra: &BTreeMap<Node, Dyadic>| {
                let mut l = view.load(v) + w.clone();
                if let Some(x) = extra.get(&v) {
                    l += x;
                }
                l <= cfg.d
            };
            if self.seen.contains(&e) || !fits(e.0, &extra) || !fits(e.1, &extra) {
                misses += 1;
                continue;
            }
            self.seen.insert(e);
            for v in [e.0, e.1] {
                *extra.entry(v).or_default() += &w;
            }
            reqs.push((e, w));
            self.issued += 1;
        }
        Ok(AliceMove::requests(reqs))
    }

    fn summary(&self) -> Vec<String> {
        vec![format!("requests={}", self.issued)]
    }
}
