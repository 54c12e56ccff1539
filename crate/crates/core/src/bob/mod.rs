//! Bob's strategies.

mod greedy;
mod regions;
pub mod restricted;
mod scripted;

pub use greedy::GreedyFixed;
pub use regions::{RegionsDynamic, RegionsStatic};
pub use restricted::{RestrictedBob, RestrictedParams};
pub use scripted::{ScriptedAlice, ScriptedBob};

use std::collections::{BTreeMap, BTreeSet};

use crate::cantor::{ClopenSet, MAX_DEPTH};
use crate::dyadic::Dyadic;
use crate::error::StrategyError;
use crate::referee::{Edge, GameState, Node};

/// Depth of the smallest grid cell that satisfies weight `w` at factor `c`.
pub fn request_depth(c: &Dyadic, w: &Dyadic) -> Result<u32, StrategyError> {
    let need = c * w;
    let k = need
        .ceil_neg_log2()
        .ok_or_else(|| StrategyError::InvalidParameters(format!("cannot match weight {w}")))?;
    if k > MAX_DEPTH as u64 {
        return Err(StrategyError::InvalidParameters(format!("request {w} is below 2^-127")));
    }
    Ok(k as u32)
}

/// Edges Bob has to answer this move: Alice's requests in her order,
/// then any other unsatisfied edge.
pub(crate) fn pending_edges(view: &GameState, requests: &[(Edge, Dyadic)]) -> Vec<Edge> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (e, _) in requests {
        let e = e.normalized();
        if !view.edge_satisfied(&e) && seen.insert(e) {
            out.push(e);
        }
    }
    for e in view.unsatisfied() {
        if seen.insert(*e) {
            out.push(*e);
        }
    }
    out
}

/// Allocations made earlier in the same move, kept per vertex.
#[derive(Default)]
pub(crate) struct Overlay {
    extra: BTreeMap<Node, ClopenSet>,
}

impl Overlay {
    pub fn get(&self, v: Node) -> &ClopenSet {
        static EMPTY: ClopenSet = ClopenSet::empty();
        self.extra.get(&v).unwrap_or(&EMPTY)
    }

    pub fn add(&mut self, e: &Edge, cell: &ClopenSet) {
        for v in [e.0, e.1] {
            let cur = self.extra.entry(v).or_default();
            *cur = cur.union(cell);
        }
    }
}
