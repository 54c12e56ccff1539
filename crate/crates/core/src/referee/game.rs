use crate::cantor::ClopenSet;
use crate::dyadic::Dyadic;
use crate::error::StrategyError;

use super::trace::{MoveRecord, Payload, Player, Trace, Verdict};
use super::{CloneOp, Edge, GameConfig, GameState, Node};

/// Alice's move: optional vertex copies (see [`CloneOp`]), then new weights.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliceMove {
    pub clones: Vec<CloneOp>,
    pub requests: Vec<(Edge, Dyadic)>,
}

impl AliceMove {
    pub fn pass() -> Self {
        AliceMove::default()
    }

    pub fn requests(requests: Vec<(Edge, Dyadic)>) -> Self {
        AliceMove { clones: Vec::new(), requests }
    }

    pub fn is_pass(&self) -> bool {
        self.clones.is_empty() && self.requests.is_empty()
    }
}

/// Bob's move: full new labels, plus an optional blame tag per edge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BobMove {
    pub labels: Vec<(Edge, ClopenSet)>,
    pub blames: Vec<(Edge, Node)>,
}

impl BobMove {
    pub fn pass() -> Self {
        BobMove::default()
    }

    pub fn is_pass(&self) -> bool {
        self.labels.is_empty()
    }
}

pub trait AliceStrategy {
    fn name(&self) -> String;
    fn next_move(&mut self, view: &GameState) -> Result<AliceMove, StrategyError>;
    /// Free-form summary lines appended to the trace as notes.
    fn summary(&self) -> Vec<String> {
        Vec::new()
    }
}

pub trait BobStrategy {
    fn name(&self) -> String;
    /// Answers Alice's latest requests (the edges and their new weights).
    fn respond(
        &mut self,
        view: &GameState,
        requests: &[(Edge, Dyadic)],
    ) -> Result<BobMove, StrategyError>;
    /// True when the strategy's answer depends only on the occupancy
    /// profiles of the requested vertices, never on their ids, and requests
    /// are answered in the order given. Such a Bob treats look-alike
    /// vertices identically, which is what makes vertex copies sound.
    fn relabeling_invariant(&self) -> bool {
        false
    }
    fn summary(&self) -> Vec<String> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub winner: Player,
    pub reason: String,
    pub moves: u64,
}

/// Shared adjudication for live matches and trace replay.
pub(crate) struct Arbiter {
    pub state: GameState,
    pub trace: Trace,
    pub outcome: Option<Outcome>,
    moves: u64,
    alice_passed: bool,
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

impl Arbiter {
    pub fn new(config: GameConfig, orbit_allowed: bool) -> Self {
        let mut state = GameState::new(config.clone());
        state.set_orbit_allowed(orbit_allowed);
        let mut trace = Trace::new(config);
        trace.orbit_allowed = orbit_allowed;
        Arbiter { state, trace, outcome: None, moves: 0, alice_passed: false }
    }

    fn record(&mut self, player: Player, payload: Payload, verdict: Verdict) {
        let index = self.trace.records.len() as u64;
        self.trace.records.push(MoveRecord { index, player, payload, verdict });
    }

    fn end(&mut self, winner: Player, reason: String) {
        self.state.finish();
        self.outcome = Some(Outcome { winner, reason: clean(&reason), moves: self.moves });
    }

    pub fn is_over(&self) -> bool {
        self.outcome.is_some()
    }

    /// Ends the game once the move budget is spent.
    pub fn check_limit(&mut self) -> bool {
        if self.outcome.is_none() && self.moves >= self.state.config().max_moves {
            self.end(Player::Bob, "move-limit".into());
        }
        self.is_over()
    }

    pub fn alice_clones(&mut self, ops: &[CloneOp]) -> Verdict {
        let verdict = if !self.state.orbit_allowed() {
            Verdict::Reject("CloneRefused".into())
        } else {
            match self.state.apply_clones(ops) {
                Ok(()) => Verdict::Ok,
                Err(v) => Verdict::Reject(v.code().into()),
            }
        };
        self.record(Player::Orbit, Payload::Clones(ops.to_vec()), verdict.clone());
        if let Verdict::Reject(code) = &verdict {
            self.end(Player::Bob, format!("alice-violation: {code}"));
        }
        verdict
    }

    pub fn alice_requests(&mut self, requests: &[(Edge, Dyadic)]) -> Verdict {
        self.moves += 1;
        if requests.is_empty() {
            self.alice_passed = true;
            self.record(Player::Alice, Payload::Pass, Verdict::Ok);
            return Verdict::Ok;
        }
        self.alice_passed = false;
        let verdict = match self.state.apply_alice_move(requests) {
            Ok(()) => Verdict::Ok,
            Err(v) => Verdict::Reject(v.code().into()),
        };
        self.record(Player::Alice, Payload::Requests(requests.to_vec()), verdict.clone());
        if let Verdict::Reject(code) = &verdict {
            self.end(Player::Bob, format!("alice-violation: {code}"));
        }
        verdict
    }

    pub fn forfeit(&mut self, player: Player, msg: &str) {
        self.moves += 1;
        let msg = clean(msg);
        self.record(player, Payload::Forfeit(msg.clone()), Verdict::Ok);
        let winner = if player == Player::Bob { Player::Alice } else { Player::Bob };
        self.end(winner, format!("{}-forfeit: {msg}", player.as_str()));
    }

    pub fn bob_labels(&mut self, mv: &BobMove) -> Verdict {
        self.moves += 1;
        let bob_passed = mv.labels.is_empty();
        let verdict = if bob_passed {
            self.record(Player::Bob, Payload::Pass, Verdict::Ok);
            Verdict::Ok
        } else {
            let verdict = match self.state.apply_bob_move(&mv.labels) {
                Ok(()) => Verdict::Ok,
                Err(v) => Verdict::Reject(v.code().into()),
            };
            self.record(
                Player::Bob,
                Payload::Labels(mv.labels.clone(), mv.blames.clone()),
                verdict.clone(),
            );
            verdict
        };
        if let Verdict::Reject(code) = &verdict {
            self.end(Player::Alice, format!("bob-violation: {code}"));
        } else if let Some(e) = self.state.unsatisfied().iter().next() {
            self.end(Player::Alice, format!("unsatisfied: {e}"));
        } else if bob_passed && self.alice_passed {
            self.end(Player::Bob, "both-passed".into());
        }
        verdict
    }

    pub fn finish(mut self) -> (Trace, Outcome, GameState) {
        if self.outcome.is_none() {
            self.end(Player::Bob, "truncated".into());
        }
        let outcome = self.outcome.clone().expect("set");
        self.trace.outcome = Some(outcome.clone());
        (self.trace, outcome, self.state)
    }
}

/// Everything a finished match produced.
#[derive(Debug, Clone)]
pub struct MatchResult {
    pub trace: Trace,
    pub outcome: Outcome,
    pub state: GameState,
}

/// Plays a referee-checked match with Alice moving first. Strategy errors
/// and rule violations lose immediately; Bob loses if any edge is
/// unsatisfied after his turn; two consecutive passes or an exhausted move
/// budget end the game in Bob's favor.
pub fn run_match(
    config: GameConfig,
    alice: &mut dyn AliceStrategy,
    bob: &mut dyn BobStrategy,
) -> MatchResult {
    let mut arb = Arbiter::new(config, bob.relabeling_invariant());
    arb.trace.notes.push(format!("alice {}", alice.name()));
    arb.trace.notes.push(format!("bob {}", bob.name()));
    loop {
        if arb.check_limit() {
            break;
        }
        let requests = match alice.next_move(&arb.state) {
            Err(e) => {
                arb.forfeit(Player::Alice, &e.to_string());
                break;
            }
            Ok(mv) => {
                if !mv.clones.is_empty() && arb.alice_clones(&mv.clones).is_reject() {
                    break;
                }
                if arb.alice_requests(&mv.requests).is_reject() {
                    break;
                }
                mv.requests
            }
        };
        if arb.check_limit() {
            break;
        }
        match bob.respond(&arb.state, &requests) {
            Err(e) => {
                arb.forfeit(Player::Bob, &e.to_string());
                break;
            }
            Ok(mv) => {
                arb.bob_labels(&mv);
            }
        }
        if arb.is_over() {
            break;
        }
    }
    for line in alice.summary() {
        arb.trace.notes.push(format!("alice {}", clean(&line)));
    }
    for line in bob.summary() {
        arb.trace.notes.push(format!("bob {}", clean(&line)));
    }
    let (trace, outcome, state) = arb.finish();
    MatchResult { trace, outcome, state }
}
