//! Line-oriented trace format.
//!
//! ```text
//! #cantor-games trace v1
//! config	kind=nonbipartite	c=1/2^0	d=1/2^1	n=0	p=0	max_moves=100	universe=40	orbit=no
//! 0	alice	req 0:1=1/2^2	ok
//! 1	bob	lab 0:1=00	ok
//! result	winner=bob	reason=both-passed	moves=4
//! note	free text
//! ```

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigUint;

use crate::cantor::ClopenSet;
use crate::dyadic::Dyadic;
use crate::error::ParseError;

use super::game::{Arbiter, BobMove, Outcome};
use super::{CloneOp, Edge, GameConfig, GameKind, GameState, Node};

const HEADER: &str = "#cantor-games trace v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Alice,
    Bob,
    /// Vertex copies requested by Alice, adjudicated separately.
    Orbit,
}

impl Player {
    pub fn as_str(&self) -> &'static str {
        match self {
            Player::Alice => "alice",
            Player::Bob => "bob",
            Player::Orbit => "orbit",
        }
    }
}

impl FromStr for Player {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alice" => Ok(Player::Alice),
            "bob" => Ok(Player::Bob),
            "orbit" => Ok(Player::Orbit),
            _ => Err(ParseError::Line { line: 0, msg: format!("unknown player `{s}`") }),
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Requests(Vec<(Edge, Dyadic)>),
    Labels(Vec<(Edge, ClopenSet)>, Vec<(Edge, Node)>),
    Clones(Vec<CloneOp>),
    Pass,
    Forfeit(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Reject(String),
}

impl Verdict {
    pub fn is_reject(&self) -> bool {
        matches!(self, Verdict::Reject(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Ok => f.write_str("ok"),
            Verdict::Reject(r) => write!(f, "reject:{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub index: u64,
    pub player: Player,
    pub payload: Payload,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub config: GameConfig,
    pub orbit_allowed: bool,
    pub records: Vec<MoveRecord>,
    pub outcome: Option<Outcome>,
    pub notes: Vec<String>,
}

impl Trace {
    pub fn new(config: GameConfig) -> Self {
        Trace { config, orbit_allowed: false, records: Vec::new(), outcome: None, notes: Vec::new() }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(
            out,
            "config\tkind={}\tc={}\td={}\tn={}\tp={}\tmax_moves={}\tuniverse={}\torbit={}",
            c.kind,
            c.c,
            c.d,
            c.n,
            c.p,
            c.max_moves,
            c.universe,
            if self.orbit_allowed { "yes" } else { "no" }
        );
        for r in &self.records {
            let _ = write!(out, "{}\t{}\t", r.index, r.player);
            write_payload(&mut out, &r.payload);
            let _ = writeln!(out, "\t{}", r.verdict);
        }
        if let Some(o) = &self.outcome {
            let _ = writeln!(out, "result\twinner={}\treason={}\tmoves={}", o.winner, o.reason, o.moves);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note\t{n}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Trace, ParseError> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, msg: String| ParseError::Line { line: line + 1, msg };
        match lines.next() {
            Some((_, h)) if h == HEADER => {}
            _ => return Err(err(0, "missing trace header".into())),
        }
        let (ln, cfg) = lines.next().ok_or_else(|| err(1, "missing config line".into()))?;
        let (config, orbit_allowed) = parse_config(cfg).map_err(|m| err(ln, m))?;
        let mut trace = Trace::new(config);
        trace.orbit_allowed = orbit_allowed;
        for (ln, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "note" => trace.notes.push(fields[1..].join("\t")),
                "result" => {
                    let kv = key_values(&fields[1..]);
                    let get = |k: &str| {
                        kv.iter()
                            .find(|(a, _)| *a == k)
                            .map(|(_, b)| *b)
                            .ok_or_else(|| err(ln, format!("result lacks {k}")))
                    };
                    trace.outcome = Some(Outcome {
                        winner: get("winner")?.parse().map_err(|_| err(ln, "bad winner".into()))?,
                        reason: get("reason")?.to_string(),
                        moves: get("moves")?.parse().map_err(|_| err(ln, "bad moves".into()))?,
                    });
                }
                idx => {
                    if fields.len() != 4 {
                        return Err(err(ln, "expected 4 fields".into()));
                    }
                    let index: u64 = idx.parse().map_err(|_| err(ln, format!("bad index `{idx}`")))?;
                    let player: Player = fields[1].parse().map_err(|_| err(ln, "bad player".into()))?;
                    let payload = parse_payload(fields[2]).map_err(|m| err(ln, m))?;
                    let verdict = match fields[3] {
                        "ok" => Verdict::Ok,
                        v => Verdict::Reject(
                            v.strip_prefix("reject:")
                                .ok_or_else(|| err(ln, format!("bad verdict `{v}`")))?
                                .to_string(),
                        ),
                    };
                    trace.records.push(MoveRecord { index, player, payload, verdict });
                }
            }
        }
        Ok(trace)
    }
}

fn write_payload(out: &mut String, p: &Payload) {
    match p {
        Payload::Pass => out.push_str("pass"),
        Payload::Forfeit(m) => {
            let _ = write!(out, "forfeit {m}");
        }
        Payload::Requests(rs) => {
            out.push_str("req");
            for (e, w) in rs {
                let _ = write!(out, " {e}={w}");
            }
        }
        Payload::Labels(ls, blames) => {
            out.push_str("lab");
            for (e, l) in ls {
                let _ = write!(out, " {e}={l}");
                if let Some((_, z)) = blames.iter().find(|(b, _)| b == e) {
                    let _ = write!(out, "@{z}");
                }
            }
        }
        Payload::Clones(cs) => {
            out.push_str("clone");
            for c in cs {
                let _ = write!(out, " {}>{}@{}", c.src, c.dst, c.ghost_start);
            }
        }
    }
}

fn key_values<'a>(fields: &[&'a str]) -> Vec<(&'a str, &'a str)> {
    fields.iter().filter_map(|f| f.split_once('=')).collect()
}

fn parse_config(line: &str) -> Result<(GameConfig, bool), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.first() != Some(&"config") {
        return Err("expected config line".into());
    }
    let kv = key_values(&fields[1..]);
    let get = |k: &str| {
        kv.iter().find(|(a, _)| *a == k).map(|(_, b)| *b).ok_or_else(|| format!("config lacks {k}"))
    };
    let bad = |k: &str| format!("bad config value for {k}");
    let config = GameConfig {
        kind: get("kind")?.parse::<GameKind>().map_err(|_| bad("kind"))?,
        c: get("c")?.parse().map_err(|_| bad("c"))?,
        d: get("d")?.parse().map_err(|_| bad("d"))?,
        n: get("n")?.parse().map_err(|_| bad("n"))?,
        p: get("p")?.parse().map_err(|_| bad("p"))?,
        max_moves: get("max_moves")?.parse().map_err(|_| bad("max_moves"))?,
        universe: get("universe")?.parse::<BigUint>().map_err(|_| bad("universe"))?,
    };
    let orbit = get("orbit").map(|v| v == "yes").unwrap_or(false);
    Ok((config, orbit))
}

fn parse_payload(s: &str) -> Result<Payload, String> {
    let (head, rest) = s.split_once(' ').unwrap_or((s, ""));
    let items = || rest.split(' ').filter(|t| !t.is_empty());
    let bad = |t: &str| format!("bad payload item `{t}`");
    match head {
        "pass" => Ok(Payload::Pass),
        "forfeit" => Ok(Payload::Forfeit(rest.to_string())),
        "req" => items()
            .map(|t| {
                let (e, w) = t.split_once('=').ok_or_else(|| bad(t))?;
                Ok((e.parse::<Edge>().map_err(|_| bad(t))?, w.parse::<Dyadic>().map_err(|_| bad(t))?))
            })
            .collect::<Result<Vec<_>, String>>()
            .map(Payload::Requests),
        "lab" => {
            let mut labels = Vec::new();
            let mut blames = Vec::new();
            for t in items() {
                let (e, l) = t.split_once('=').ok_or_else(|| bad(t))?;
                let e: Edge = e.parse().map_err(|_| bad(t))?;
                let (l, z) = match l.split_once('@') {
                    Some((l, z)) => (l, Some(z.parse::<Node>().map_err(|_| bad(t))?)),
                    None => (l, None),
                };
                labels.push((e, l.parse::<ClopenSet>().map_err(|_| bad(t))?));
                if let Some(z) = z {
                    blames.push((e, z));
                }
            }
            Ok(Payload::Labels(labels, blames))
        }
        "clone" => items()
            .map(|t| {
                let (src, rest) = t.split_once('>').ok_or_else(|| bad(t))?;
                let (dst, g) = rest.split_once('@').ok_or_else(|| bad(t))?;
                Ok(CloneOp {
                    src: src.parse().map_err(|_| bad(t))?,
                    dst: dst.parse().map_err(|_| bad(t))?,
                    ghost_start: g.parse().map_err(|_| bad(t))?,
                })
            })
            .collect::<Result<Vec<_>, String>>()
            .map(Payload::Clones),
        _ => Err(format!("unknown payload `{head}`")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    pub index: u64,
    pub msg: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "record {}: {}", self.index, self.msg)
    }
}

/// Re-adjudicates every record with the live referee logic. Fails at the
/// first record whose recorded verdict differs from the recomputed one.
pub fn replay(trace: &Trace) -> Result<(GameState, Outcome), ReplayError> {
    let mut arb = Arbiter::new(trace.config.clone(), trace.orbit_allowed);
    let mut prev: Option<Player> = None;
    for r in &trace.records {
        let fail = |msg: String| ReplayError { index: r.index, msg };
        let starts_turn = !(r.player == Player::Alice && prev == Some(Player::Orbit));
        if arb.is_over() || (starts_turn && arb.check_limit()) {
            return Err(fail("record after the end of the game".into()));
        }
        let ok_order = match r.player {
            Player::Orbit => matches!(prev, None | Some(Player::Bob)),
            Player::Alice => matches!(prev, None | Some(Player::Bob) | Some(Player::Orbit)),
            Player::Bob => prev == Some(Player::Alice),
        };
        if !ok_order {
            return Err(fail(format!("{} moved out of turn", r.player)));
        }
        let got = match (&r.player, &r.payload) {
            (Player::Orbit, Payload::Clones(ops)) => arb.alice_clones(ops),
            (Player::Alice, Payload::Requests(rs)) => arb.alice_requests(rs),
            (Player::Alice, Payload::Pass) => arb.alice_requests(&[]),
            (Player::Bob, Payload::Labels(ls, bl)) => {
                arb.bob_labels(&BobMove { labels: ls.clone(), blames: bl.clone() })
            }
            (Player::Bob, Payload::Pass) => arb.bob_labels(&BobMove::pass()),
            (p @ (Player::Alice | Player::Bob), Payload::Forfeit(m)) => {
                arb.forfeit(*p, m);
                Verdict::Ok
            }
            (p, _) => return Err(fail(format!("payload not allowed for {p}"))),
        };
        if got != r.verdict {
            return Err(fail(format!("recorded verdict {} but referee says {}", r.verdict, got)));
        }
        prev = Some(r.player);
    }
    arb.check_limit();
    let (_, outcome, state) = arb.finish();
    if let Some(rec) = &trace.outcome {
        if rec.winner != outcome.winner || rec.reason != outcome.reason || rec.moves != outcome.moves {
            return Err(ReplayError {
                index: trace.records.len() as u64,
                msg: format!(
                    "recorded result {} ({}) but replay gives {} ({})",
                    rec.winner, rec.reason, outcome.winner, outcome.reason
                ),
            });
        }
    }
    Ok((state, outcome))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub records: usize,
    pub failures: Vec<String>,
    pub first_failure: Option<u64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Offline check of a trace: replay, then audit the final state's budgets,
/// disjointness and bookkeeping.
pub fn verify_trace(trace: &Trace) -> VerifyReport {
    let mut report =
        VerifyReport { records: trace.records.len(), failures: Vec::new(), first_failure: None };
    if let Err(e) = trace.config.validate() {
        report.failures.push(format!("config: {e}"));
    }
    for (i, r) in trace.records.iter().enumerate() {
        if r.index != i as u64 {
            report.failures.push(format!("record {i}: index {} out of sequence", r.index));
            report.first_failure.get_or_insert(i as u64);
            return report;
        }
    }
    match replay(trace) {
        Err(e) => {
            report.first_failure = Some(e.index);
            report.failures.push(e.to_string());
        }
        Ok((state, _)) => {
            if let Err(e) = state.audit() {
                report.failures.push(format!("final state: {e}"));
            }
            if trace.outcome.is_none() {
                report.failures.push("trace has no result line".into());
            }
        }
    }
    report
}
