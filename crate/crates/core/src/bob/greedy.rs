use crate::cantor::{first_free_cell, ClopenSet};
use crate::dyadic::Dyadic;
use crate::error::StrategyError;
use crate::referee::{BobMove, BobStrategy, Edge, GameState};

use super::{pending_edges, request_depth, Overlay};

/// Answers each request with the least grid cell of the required size that
/// is free at both endpoints.
#[derive(Debug, Clone, Default)]
pub struct GreedyFixed {
    allocations: u64,
}

impl GreedyFixed {
    pub fn new() -> Self {
        GreedyFixed::default()
    }
}

impl BobStrategy for GreedyFixed {
    fn name(&self) -> String {
        "greedy-fixed".into()
    }

    fn relabeling_invariant(&self) -> bool {
        true
    }

    fn respond(
        &mut self,
        view: &GameState,
        requests: &[(Edge, Dyadic)],
    ) -> Result<BobMove, StrategyError> {
        let c = &view.config().c;
        let mut overlay = Overlay::default();
        let mut mv = BobMove::default();
        for e in pending_edges(view, requests) {
            let depth = request_depth(c, &view.weight(&e))?;
            let avoid = [view.occupied(e.0), overlay.get(e.0), view.occupied(e.1), overlay.get(e.1)];
            let cell = first_free_cell(depth, None, &avoid)
                .ok_or_else(|| StrategyError::NoFreeInterval(e.to_string()))?;
            let cell = ClopenSet::from_interval(cell);
            overlay.add(&e, &cell);
            mv.labels.push((e, view.label(&e).union(&cell)));
            self.allocations += 1;
        }
        Ok(mv)
    }

    fn summary(&self) -> Vec<String> {
        vec![format!("allocations={}", self.allocations)]
    }
}
