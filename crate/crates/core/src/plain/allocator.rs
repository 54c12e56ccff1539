use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cantor::ClopenSet;
use crate::dyadic::Dyadic;
use crate::error::PlainError;

/// Realizes a growing symmetric table `u(x, y)` with row sums at most 1 as
/// sets `U(x, y)` of measure exactly `u(x, y)/2`, disjoint for fixed `x`.
#[derive(Debug, Clone, Default)]
pub struct SemimeasureAllocator {
    weights: BTreeMap<(u64, u64), Dyadic>,
    sets: BTreeMap<(u64, u64), ClopenSet>,
    rows: BTreeMap<u64, Dyadic>,
    occupied: BTreeMap<u64, ClopenSet>,
}

fn key(x: u64, y: u64) -> (u64, u64) {
    (x.min(y), x.max(y))
}

impl SemimeasureAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn weight(&self, x: u64, y: u64) -> Dyadic {
        self.weights.get(&key(x, y)).cloned().unwrap_or_default()
    }

    pub fn set(&self, x: u64, y: u64) -> ClopenSet {
        self.sets.get(&key(x, y)).cloned().unwrap_or_default()
    }

    pub fn row_sum(&self, x: u64) -> Dyadic {
        self.rows.get(&x).cloned().unwrap_or_default()
    }

    pub fn occupied(&self, x: u64) -> ClopenSet {
        self.occupied.get(&x).cloned().unwrap_or_default()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(u64, u64), &ClopenSet)> {
        self.sets.iter()
    }

    /// Raises `u(x, y)` by `r` and adds measure `r/2` to `U(x, y)` outside
    /// everything already used at `x` or `y`.
    pub fn step(&mut self, x: u64, y: u64, r: &Dyadic) -> Result<(), PlainError> {
        if r.is_zero() {
            return Err(PlainError::InvalidParameters("increment must be positive".into()));
        }
        let one = Dyadic::one();
        let ends: &[u64] = if x == y { &[x] } else { &[x, y] };
        for &v in ends {
            let sum = self.row_sum(v) + r.clone();
            if sum > one {
                return Err(PlainError::RowSumExceeded { vertex: v, sum: sum.to_string() });
            }
        }
        let used = self.occupied(x).union(&self.occupied(y));
        let add = used
            .complement()
            .carve(&r.half())
            .map_err(|e| PlainError::CarveFailed(format!("{x}:{y}: {e}")))?;
        let k = key(x, y);
        *self.weights.entry(k).or_default() += r;
        let s = self.sets.entry(k).or_default();
        *s = s.union(&add);
        for &v in ends {
            *self.rows.entry(v).or_default() += r;
            let o = self.occupied.entry(v).or_default();
            *o = o.union(&add);
        }
        Ok(())
    }

    /// Recomputes every invariant from the table.
    pub fn check(&self) -> Result<(), String> {
        for (&(x, y), w) in &self.weights {
            let s = self.set(x, y);
            if s.measure() != w.half() {
                return Err(format!("U({x},{y}) has measure {} but u = {w}", s.measure()));
            }
        }
        let mut per: BTreeMap<u64, ClopenSet> = BTreeMap::new();
        for (&(x, y), s) in &self.sets {
            let ends: &[u64] = if x == y { &[x] } else { &[x, y] };
            for &v in ends {
                let o = per.entry(v).or_default();
                if !o.is_disjoint(s) {
                    return Err(format!("sets at {v} overlap"));
                }
                *o = o.union(s);
            }
        }
        for (v, o) in &per {
            if o.measure() > Dyadic::one().half() {
                return Err(format!("measure at {v} exceeds 1/2"));
            }
        }
        Ok(())
    }

    /// One `x y u set` line per pair.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (&(x, y), w) in &self.weights {
            let _ = writeln!(out, "{x}\t{y}\t{w}\t{}", self.set(x, y));
        }
        out
    }
}
