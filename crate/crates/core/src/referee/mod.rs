//! Rule enforcement for every game variant.
//!
//! [`GameState`] holds Alice's weights and Bob's labels and is only mutated
//! through the `apply_*` methods, each of which validates the whole move
//! before committing any of it.

mod game;
mod trace;

pub use game::{run_match, AliceMove, AliceStrategy, BobMove, BobStrategy, MatchResult, Outcome};
pub use trace::{
    replay, verify_trace, MoveRecord, Payload, Player, ReplayError, Trace, Verdict, VerifyReport,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::cantor::{first_free_cell, grid_depth, ClopenSet};
use crate::dyadic::Dyadic;
use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameKind {
    Nonbipartite,
    Bipartite,
    Restricted,
}

impl GameKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GameKind::Nonbipartite => "nonbipartite",
            GameKind::Bipartite => "bipartite",
            GameKind::Restricted => "restricted",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameKind {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nonbipartite" => Ok(GameKind::Nonbipartite),
            "bipartite" => Ok(GameKind::Bipartite),
            "restricted" => Ok(GameKind::Restricted),
            _ => Err(ParseError::Line { line: 0, msg: format!("unknown game kind `{s}`") }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Left,
    Right,
}

/// A vertex. Outside the bipartite game every vertex lives in `Left`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub part: Part,
    pub id: u64,
}

impl Node {
    pub fn left(id: u64) -> Self {
        Node { part: Part::Left, id }
    }

    pub fn right(id: u64) -> Self {
        Node { part: Part::Right, id }
    }

    /// Plain vertex of a non-bipartite game.
    pub fn v(id: u64) -> Self {
        Node::left(id)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.part {
            Part::Left => write!(f, "{}", self.id),
            Part::Right => write!(f, "R{}", self.id),
        }
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Node {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Line { line: 0, msg: format!("bad vertex `{s}`") };
        if let Some(r) = s.strip_prefix('R') {
            r.parse().map(Node::right).map_err(|_| bad())
        } else {
            let t = s.strip_prefix('L').unwrap_or(s);
            t.parse().map(Node::left).map_err(|_| bad())
        }
    }
}

/// An edge key. Non-bipartite edges store the smaller vertex first;
/// bipartite edges store the left vertex first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub Node, pub Node);

impl Edge {
    /// Normalized non-bipartite edge between two plain vertices.
    pub fn between(a: u64, b: u64) -> Edge {
        Edge(Node::v(a.min(b)), Node::v(a.max(b)))
    }

    /// Bipartite edge from left `x` to right `y`.
    pub fn lr(x: u64, y: u64) -> Edge {
        Edge(Node::left(x), Node::right(y))
    }

    pub fn normalized(self) -> Edge {
        let Edge(a, b) = self;
        if a.part == b.part {
            if a <= b {
                Edge(a, b)
            } else {
                Edge(b, a)
            }
        } else if a.part == Part::Left {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn other(&self, v: Node) -> Node {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }

    pub fn touches(&self, v: Node) -> bool {
        self.0 == v || self.1 == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.0, self.1)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Edge {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| ParseError::Line { line: 0, msg: format!("bad edge `{s}`") })?;
        Ok(Edge(a.parse()?, b.parse()?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameConfig {
    pub kind: GameKind,
    /// Bob's matching factor.
    pub c: Dyadic,
    /// Alice's per-vertex budget.
    pub d: Dyadic,
    /// String length for restricted games; informational otherwise.
    pub n: u32,
    /// Exponent of the upper size bound in restricted games.
    pub p: u32,
    pub max_moves: u64,
    /// Number of vertices available (per part in the bipartite game).
    pub universe: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} must lie in (0, 1]")]
    OutOfRange(&'static str),
    #[error("d = {0} is not a negative power of two")]
    BudgetNotPowerOfTwo(String),
    #[error("restricted games require c = 1")]
    RestrictedFactor,
    #[error("restricted games need n >= 1 and n <= 63")]
    RestrictedLength,
}

impl GameConfig {
    pub fn equivalent(kind: GameKind, d: Dyadic, universe: BigUint) -> Self {
        GameConfig { kind, c: Dyadic::one(), d, n: 0, p: 0, max_moves: 1_000_000, universe }
    }

    pub fn restricted(n: u32, p: u32, d: Dyadic) -> Self {
        GameConfig {
            kind: GameKind::Restricted,
            c: Dyadic::one(),
            d,
            n,
            p,
            max_moves: u64::MAX,
            universe: BigUint::from(1u8) << n,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |x: &Dyadic| !x.is_zero() && *x <= Dyadic::one();
        if !unit(&self.c) {
            return Err(ConfigError::OutOfRange("c"));
        }
        if !unit(&self.d) {
            return Err(ConfigError::OutOfRange("d"));
        }
        if !self.d.is_neg_power_of_two() {
            return Err(ConfigError::BudgetNotPowerOfTwo(self.d.to_string()));
        }
        if self.kind == GameKind::Restricted {
            if self.c != Dyadic::one() {
                return Err(ConfigError::RestrictedFactor);
            }
            if self.n == 0 || self.n > 63 {
                return Err(ConfigError::RestrictedLength);
            }
        }
        Ok(())
    }

    /// Allowed request exponents `k` (size `2^-k`) in the restricted game:
    /// `2^-n <= 2^-k <= n^-p`.
    pub fn restricted_exponents(&self) -> std::ops::RangeInclusive<u32> {
        let np = BigUint::from(self.n).pow(self.p);
        // smallest e with 2^e >= n^p
        let e = if np <= BigUint::from(1u8) { 0 } else { (np - 1u8).bits() as u32 };
        e..=self.n
    }
}

/// Rule violations; each names the offending vertex or edge.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("budget exceeded at {vertex}: load {load} > {budget}")]
    BudgetExceeded { vertex: Node, load: Dyadic, budget: Dyadic },
    #[error("weight decreased on {edge}: {old} -> {new}")]
    WeightDecreased { edge: Edge, old: Dyadic, new: Dyadic },
    #[error("conflicting weights for {edge} in one move")]
    SymmetryBroken { edge: Edge },
    #[error("restriction violated on {edge}: {reason}")]
    RestrictionViolated { edge: Edge, reason: String },
    #[error("labels at {vertex} are not disjoint")]
    DisjointnessBroken { vertex: Node },
    #[error("label shrunk on {edge}")]
    LabelShrunk { edge: Edge },
    #[error("invalid edge {edge}: {reason}")]
    InvalidEdge { edge: Edge, reason: String },
    #[error("clone of {src} onto {dst} rejected: {reason}")]
    InvalidClone { src: Node, dst: Node, reason: String },
    #[error("game is over")]
    GameOver,
}

impl Violation {
    /// Short machine-readable name used in trace verdicts.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::BudgetExceeded { .. } => "BudgetExceeded",
            Violation::WeightDecreased { .. } => "WeightDecreased",
            Violation::SymmetryBroken { .. } => "SymmetryBroken",
            Violation::RestrictionViolated { .. } => "RestrictionViolated",
            Violation::DisjointnessBroken { .. } => "DisjointnessBroken",
            Violation::LabelShrunk { .. } => "LabelShrunk",
            Violation::InvalidEdge { .. } => "InvalidEdge",
            Violation::InvalidClone { .. } => "InvalidClone",
            Violation::GameOver => "GameOver",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeEntry {
    pub weight: Dyadic,
    pub label: ClopenSet,
}

/// Copy `src` onto the fresh vertex `dst`: every edge at `src` is
/// duplicated at `dst` toward a fresh ghost neighbor (ids counting up from
/// `ghost_start`), carrying the same weight and label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CloneOp {
    pub src: Node,
    pub dst: Node,
    pub ghost_start: u64,
}

#[derive(Debug, Clone)]
pub struct EdgeReport {
    pub edge: Edge,
    pub weight: Dyadic,
    pub nu: Dyadic,
    pub satisfied: bool,
}

#[derive(Debug, Clone)]
pub struct WinningStatus {
    pub edges: Vec<EdgeReport>,
    pub all_satisfied: bool,
}

#[derive(Debug, Clone)]
pub struct GameState {
    config: GameConfig,
    edges: BTreeMap<Edge, EdgeEntry>,
    load: BTreeMap<Node, Dyadic>,
    occupied: BTreeMap<Node, ClopenSet>,
    adjacency: BTreeMap<Node, Vec<Node>>,
    unsatisfied: BTreeSet<Edge>,
    ghosts: BTreeSet<Node>,
    next_id: u64,
    orbit_allowed: bool,
    over: bool,
}

impl GameState {
    pub fn new(config: GameConfig) -> Self {
        GameState {
            config,
            edges: BTreeMap::new(),
            load: BTreeMap::new(),
            occupied: BTreeMap::new(),
            adjacency: BTreeMap::new(),
            unsatisfied: BTreeSet::new(),
            ghosts: BTreeSet::new(),
            next_id: 0,
            orbit_allowed: false,
            over: false,
        }
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn budget(&self) -> &Dyadic {
        &self.config.d
    }

    pub fn edges(&self) -> &BTreeMap<Edge, EdgeEntry> {
        &self.edges
    }

    pub fn weight(&self, e: &Edge) -> Dyadic {
        self.edges.get(e).map(|x| x.weight.clone()).unwrap_or_default()
    }

    pub fn label(&self, e: &Edge) -> ClopenSet {
        self.edges.get(e).map(|x| x.label.clone()).unwrap_or_default()
    }

    pub fn load(&self, v: Node) -> Dyadic {
        self.load.get(&v).cloned().unwrap_or_default()
    }

    pub fn occupied(&self, v: Node) -> &ClopenSet {
        static EMPTY: ClopenSet = ClopenSet::empty();
        self.occupied.get(&v).unwrap_or(&EMPTY)
    }

    pub fn neighbors(&self, v: Node) -> &[Node] {
        self.adjacency.get(&v).map(|x| x.as_slice()).unwrap_or(&[])
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Node> {
        self.adjacency.keys()
    }

    pub fn unsatisfied(&self) -> &BTreeSet<Edge> {
        &self.unsatisfied
    }

    pub fn is_ghost(&self, v: Node) -> bool {
        self.ghosts.contains(&v)
    }

    pub fn ghost_count(&self) -> usize {
        self.ghosts.len()
    }

    /// Ids at or above this value have never been used.
    pub fn next_fresh_id(&self) -> u64 {
        self.next_id
    }

    pub fn orbit_allowed(&self) -> bool {
        self.orbit_allowed
    }

    pub fn set_orbit_allowed(&mut self, yes: bool) {
        self.orbit_allowed = yes;
    }

    pub fn is_over(&self) -> bool {
        self.over
    }

    pub fn finish(&mut self) {
        self.over = true;
    }

    pub fn max_load(&self) -> Dyadic {
        self.load.values().cloned().max().unwrap_or_default()
    }

    /// True when `ν(label) >= c·weight`.
    pub fn edge_satisfied(&self, e: &Edge) -> bool {
        match self.edges.get(e) {
            None => true,
            Some(x) => x.label.nu() >= &self.config.c * &x.weight,
        }
    }

    pub fn winning_status(&self) -> WinningStatus {
        let edges: Vec<EdgeReport> = self
            .edges
            .iter()
            .map(|(e, x)| {
                let nu = x.label.nu();
                EdgeReport {
                    edge: *e,
                    weight: x.weight.clone(),
                    satisfied: nu >= &self.config.c * &x.weight,
                    nu,
                }
            })
            .collect();
        let all_satisfied = edges.iter().all(|r| r.satisfied);
        WinningStatus { edges, all_satisfied }
    }

    /// Whether some interval of size `size` is free at both endpoints.
    pub fn free_cell_exists(&self, e: &Edge, size: &Dyadic) -> bool {
        match grid_depth(size) {
            Ok(k) => first_free_cell(k, None, &[self.occupied(e.0), self.occupied(e.1)]).is_some(),
            Err(_) => false,
        }
    }

    fn check_edge(&self, e: &Edge) -> Result<Edge, Violation> {
        let n = e.normalized();
        let bad = |reason: &str| Violation::InvalidEdge { edge: *e, reason: reason.to_string() };
        match self.config.kind {
            GameKind::Bipartite => {
                if n.0.part == n.1.part {
                    return Err(bad("bipartite edges join a left and a right vertex"));
                }
            }
            _ => {
                if n.0.part != Part::Left || n.1.part != Part::Left {
                    return Err(bad("right vertices exist only in the bipartite game"));
                }
                if n.0 == n.1 {
                    return Err(bad("loops are not edges"));
                }
            }
        }
        if let Some(u) = self.config.universe.to_u64() {
            if n.0.id >= u || n.1.id >= u {
                return Err(bad("vertex outside the universe"));
            }
        }
        Ok(n)
    }

    /// Validates and applies Alice's new weights.
    pub fn apply_alice_move(&mut self, increases: &[(Edge, Dyadic)]) -> Result<(), Violation> {
        if self.over {
            return Err(Violation::GameOver);
        }
        let mut new_weights: BTreeMap<Edge, Dyadic> = BTreeMap::new();
        for (e, w) in increases {
            let n = self.check_edge(e)?;
            if let Some(prev) = new_weights.get(&n) {
                if prev != w {
                    return Err(Violation::SymmetryBroken { edge: n });
                }
                continue;
            }
            let old = self.weight(&n);
            if *w < old {
                return Err(Violation::WeightDecreased { edge: n, old, new: w.clone() });
            }
            if self.config.kind == GameKind::Restricted {
                self.check_restricted(&n, &old, w)?;
            }
            new_weights.insert(n, w.clone());
        }
        let mut loads: BTreeMap<Node, Dyadic> = BTreeMap::new();
        for (e, w) in &new_weights {
            let delta = w.checked_sub(&self.weight(e)).expect("checked above");
            for v in [e.0, e.1] {
                let cur = loads.entry(v).or_insert_with(|| self.load(v));
                *cur += &delta;
            }
        }
        for (v, l) in &loads {
            if l > &self.config.d {
                return Err(Violation::BudgetExceeded {
                    vertex: *v,
                    load: l.clone(),
                    budget: self.config.d.clone(),
                });
            }
        }
        for (e, w) in new_weights {
            self.touch_edge(e);
            self.edges.get_mut(&e).expect("present").weight = w;
            self.refresh(&e);
        }
        self.load.extend(loads);
        Ok(())
    }

    fn check_restricted(&self, e: &Edge, old: &Dyadic, w: &Dyadic) -> Result<(), Violation> {
        let fail = |reason: String| Err(Violation::RestrictionViolated { edge: *e, reason });
        if !old.is_zero() {
            return if old == w { Ok(()) } else { fail("only zero weights may be increased".into()) };
        }
        if w.is_zero() {
            return Ok(());
        }
        let Some(k) = w.neg_log2() else {
            return fail(format!("{w} is not a negative power of two"));
        };
        let range = self.config.restricted_exponents();
        if k > *range.end() as u64 {
            return fail(format!("{w} is below 2^-{}", range.end()));
        }
        if k < *range.start() as u64 {
            return fail(format!("{w} exceeds {}^-{}", self.config.n, self.config.p));
        }
        Ok(())
    }

    fn touch_edge(&mut self, e: Edge) {
        if !self.edges.contains_key(&e) {
            self.edges.insert(e, EdgeEntry::default());
            self.adjacency.entry(e.0).or_default().push(e.1);
            self.adjacency.entry(e.1).or_default().push(e.0);
            self.next_id = self.next_id.max(e.0.id + 1).max(e.1.id + 1);
        }
    }

    fn refresh(&mut self, e: &Edge) {
        if self.edge_satisfied(e) {
            self.unsatisfied.remove(e);
        } else {
            self.unsatisfied.insert(*e);
        }
    }

    /// Validates and applies Bob's labels; each entry is the full new label.
    pub fn apply_bob_move(&mut self, labels: &[(Edge, ClopenSet)]) -> Result<(), Violation> {
        if self.over {
            return Err(Violation::GameOver);
        }
        let mut occ: BTreeMap<Node, ClopenSet> = BTreeMap::new();
        let mut new_labels: BTreeMap<Edge, ClopenSet> = BTreeMap::new();
        for (e, lab) in labels {
            let n = self.check_edge(e)?;
            let old = new_labels.get(&n).cloned().unwrap_or_else(|| self.label(&n));
            if !old.is_subset(lab) {
                return Err(Violation::LabelShrunk { edge: n });
            }
            let added = lab.difference(&old);
            for v in [n.0, n.1] {
                let cur = occ.entry(v).or_insert_with(|| self.occupied(v).clone());
                if !cur.is_disjoint(&added) {
                    return Err(Violation::DisjointnessBroken { vertex: v });
                }
                *cur = cur.union(&added);
            }
            new_labels.insert(n, lab.clone());
        }
        for (e, lab) in new_labels {
            self.touch_edge(e);
            self.edges.get_mut(&e).expect("present").label = lab;
            self.refresh(&e);
        }
        self.occupied.extend(occ);
        Ok(())
    }

    /// Applies a batch of clone operations (see [`CloneOp`]).
    pub fn apply_clones(&mut self, ops: &[CloneOp]) -> Result<(), Violation> {
        if self.over {
            return Err(Violation::GameOver);
        }
        let mut next = self.next_id;
        for op in ops {
            let reject = |reason: &str| Violation::InvalidClone {
                src: op.src,
                dst: op.dst,
                reason: reason.to_string(),
            };
            if op.src.part != op.dst.part {
                return Err(reject("source and copy must lie in the same part"));
            }
            if op.dst.id < next || op.ghost_start < next {
                return Err(reject("copy and ghosts must use fresh ids"));
            }
            let deg = self.neighbors(op.src).len() as u64;
            if op.ghost_start <= op.dst.id && op.dst.id < op.ghost_start + deg {
                return Err(reject("copy id collides with its ghosts"));
            }
            next = op.dst.id.max(op.ghost_start + deg.saturating_sub(1)) + 1;
        }
        let ghost_part = |p: Part, kind: GameKind| match (kind, p) {
            (GameKind::Bipartite, Part::Left) => Part::Right,
            (GameKind::Bipartite, Part::Right) => Part::Left,
            _ => Part::Left,
        };
        for op in ops {
            let nbrs: Vec<Node> = self.neighbors(op.src).to_vec();
            let gp = ghost_part(op.src.part, self.config.kind);
            for (i, w) in nbrs.iter().enumerate() {
                let src_edge = Edge(op.src, *w).normalized();
                let entry = self.edges[&src_edge].clone();
                let g = Node { part: gp, id: op.ghost_start + i as u64 };
                let e = Edge(op.dst, g).normalized();
                self.touch_edge(e);
                self.ghosts.insert(g);
                self.load.insert(g, entry.weight.clone());
                self.occupied.insert(g, entry.label.clone());
                self.edges.insert(e, entry);
                self.refresh(&e);
            }
            self.load.insert(op.dst, self.load(op.src));
            self.occupied.insert(op.dst, self.occupied(op.src).clone());
            self.adjacency.entry(op.dst).or_default();
            self.next_id = self.next_id.max(op.dst.id + 1);
        }
        Ok(())
    }

    /// Recomputes per-vertex loads and occupied sets from the edge table
    /// and checks them against the incremental bookkeeping and the rules.
    pub fn audit(&self) -> Result<(), String> {
        let mut loads: BTreeMap<Node, Dyadic> = BTreeMap::new();
        let mut sums: BTreeMap<Node, u128> = BTreeMap::new();
        let mut occ: BTreeMap<Node, ClopenSet> = BTreeMap::new();
        for (e, x) in &self.edges {
            for v in [e.0, e.1] {
                *loads.entry(v).or_default() += &x.weight;
                *sums.entry(v).or_default() += x.label.measure_units();
                let o = occ.entry(v).or_default();
                *o = o.union(&x.label);
            }
        }
        for (v, l) in &loads {
            if l > &self.config.d {
                return Err(format!("load {l} at {v} exceeds budget"));
            }
            if *l != self.load(*v) {
                return Err(format!("load bookkeeping drifted at {v}"));
            }
        }
        for (v, o) in &occ {
            if o.measure_units() != sums[v] {
                return Err(format!("labels at {v} overlap"));
            }
            if o != self.occupied(*v) {
                return Err(format!("occupied bookkeeping drifted at {v}"));
            }
        }
        let uns: BTreeSet<Edge> =
            self.edges.keys().filter(|e| !self.edge_satisfied(e)).copied().collect();
        if uns != self.unsatisfied {
            return Err("unsatisfied-edge bookkeeping drifted".into());
        }
        Ok(())
    }

    /// Number of non-ghost vertices that carry at least one edge.
    pub fn explicit_vertex_count(&self) -> usize {
        self.adjacency.keys().filter(|v| !self.ghosts.contains(v)).count()
    }

    /// Sum of all weights.
    pub fn total_weight(&self) -> Dyadic {
        self.edges.values().map(|x| &x.weight).sum()
    }

    pub fn universe_is_zero(&self) -> bool {
        self.config.universe.is_zero()
    }
}
