use std::collections::VecDeque;

use crate::dyadic::Dyadic;
use crate::error::StrategyError;
use crate::referee::{AliceMove, AliceStrategy, BobMove, BobStrategy, Edge, GameState};

/// Replays a fixed list of moves. Once the list runs out it passes, or
/// reports `ScriptExhausted` when built with [`ScriptedBob::strict`].
#[derive(Debug, Clone, Default)]
pub struct ScriptedBob {
    moves: VecDeque<BobMove>,
    strict: bool,
}

impl ScriptedBob {
    pub fn new(moves: Vec<BobMove>) -> Self {
        ScriptedBob { moves: moves.into(), strict: false }
    }

    pub fn strict(moves: Vec<BobMove>) -> Self {
        ScriptedBob { moves: moves.into(), strict: true }
    }
}

impl BobStrategy for ScriptedBob {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn respond(&mut self, _: &GameState, _: &[(Edge, Dyadic)]) -> Result<BobMove, StrategyError> {
        match self.moves.pop_front() {
            Some(m) => Ok(m),
            None if self.strict => Err(StrategyError::ScriptExhausted),
            None => Ok(BobMove::pass()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedAlice {
    moves: VecDeque<AliceMove>,
}

impl ScriptedAlice {
    pub fn new(moves: Vec<AliceMove>) -> Self {
        ScriptedAlice { moves: moves.into() }
    }

    /// A single request, then passes.
    pub fn single(edge: Edge, w: Dyadic) -> Self {
        Self::new(vec![AliceMove::requests(vec![(edge, w)])])
    }
}

impl AliceStrategy for ScriptedAlice {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn next_move(&mut self, _: &GameState) -> Result<AliceMove, StrategyError> {
        Ok(self.moves.pop_front().unwrap_or_default())
    }
}
