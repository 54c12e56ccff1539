use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use crate::cantor::{CantorInterval, ClopenSet, MAX_DEPTH};
use crate::dyadic::Dyadic;
use crate::error::StrategyError;
use crate::referee::{AliceMove, AliceStrategy, CloneOp, Edge, GameKind, GameState, Node, Part};

use super::{eps_schedule, intersect_dirty, required_vertices, required_vertices_bipartite, Schedule};

/// How Alice stands for the huge active set with a few explicit vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitMode {
    /// Orbit reduction when the game allows it and the explicit plan is
    /// too large.
    Auto,
    /// Every vertex explicit.
    Explicit,
    /// Always reduce (fails if the game does not allow copies).
    Orbit,
}

#[derive(Debug, Clone)]
pub struct AliceConfig {
    /// Explicit stars per substage under orbit reduction.
    pub cap: usize,
    pub mode: OrbitMode,
    /// Largest vertex count played out explicitly.
    pub explicit_limit: u64,
    /// Allow `d < 2^-4`.
    pub allow_small_d: bool,
}

impl Default for AliceConfig {
    fn default() -> Self {
        AliceConfig { cap: 2, mode: OrbitMode::Auto, explicit_limit: 1 << 20, allow_small_d: false }
    }
}

/// What one stage achieved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageLog {
    pub stage: usize,
    pub substages: u64,
    pub zone_a: Dyadic,
    pub zone_b: Dyadic,
}

impl StageLog {
    pub fn growth(&self) -> Dyadic {
        self.zone_b.saturating_sub(&self.zone_a)
    }
}

#[derive(Debug, Clone)]
struct Star {
    center: Node,
    leaves: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Phase {
    Start,
    Harvest,
    Done,
}

/// The staged strategy: at stage `i` Alice requests `eps[i-1]` on the edges
/// of many vertex-disjoint stars, keeps the leaves whose new label dirties
/// the most popular fresh `eps[i]`-cell, and moves on once the cells dirty
/// for every active vertex have grown by `d/2`. After the last stage a
/// single `d/2` request between two active vertices cannot be matched.
#[derive(Debug, Clone)]
pub struct StagesAlice {
    cfg: AliceConfig,
    bipartite: bool,
    schedule: Option<Schedule>,
    phase: Phase,
    orbit: bool,
    stage: usize,
    substage: u64,
    plan_after: Vec<BigUint>,
    active: Vec<Node>,
    active_count: BigUint,
    left_count: BigUint,
    fresh_right: bool,
    zone_a: ClopenSet,
    zone_b: ClopenSet,
    stars: Vec<Star>,
    star_count: BigUint,
    logs: Vec<StageLog>,
    final_edge: Option<Edge>,
    final_free: Option<bool>,
    max_spend: Dyadic,
    max_center: Dyadic,
    requests: u64,
    clones: u64,
}

impl StagesAlice {
    pub fn new(cfg: AliceConfig) -> Self {
        StagesAlice {
            cfg,
            bipartite: false,
            schedule: None,
            phase: Phase::Start,
            orbit: false,
            stage: 0,
            substage: 0,
            plan_after: Vec::new(),
            active: Vec::new(),
            active_count: BigUint::default(),
            left_count: BigUint::default(),
            fresh_right: true,
            zone_a: ClopenSet::empty(),
            zone_b: ClopenSet::empty(),
            stars: Vec::new(),
            star_count: BigUint::default(),
            logs: Vec::new(),
            final_edge: None,
            final_free: None,
            max_spend: Dyadic::zero(),
            max_center: Dyadic::zero(),
            requests: 0,
            clones: 0,
        }
    }

    pub fn stage_logs(&self) -> &[StageLog] {
        &self.logs
    }

    /// Whether a free `d/2` cell existed for the final request.
    pub fn final_free_cell(&self) -> Option<bool> {
        self.final_free
    }

    pub fn final_edge(&self) -> Option<Edge> {
        self.final_edge
    }

    /// Largest load seen on an active vertex after a harvest.
    pub fn max_active_spend(&self) -> &Dyadic {
        &self.max_spend
    }

    pub fn max_center_load(&self) -> &Dyadic {
        &self.max_center
    }

    pub fn used_orbit(&self) -> bool {
        self.orbit
    }

    pub fn total_substages(&self) -> u64 {
        self.logs.iter().map(|l| l.substages).sum::<u64>() + if self.phase == Phase::Harvest { 1 } else { 0 }
    }

    fn sched(&self) -> &Schedule {
        self.schedule.as_ref().expect("initialized")
    }

    fn eps(&self, i: usize) -> Dyadic {
        self.sched().eps[i].clone()
    }

    fn depth(&self, i: usize) -> u32 {
        self.sched().exponent(i) as u32
    }

    /// Edges that count towards dirtiness at an active vertex.
    fn zone(&self, view: &GameState, active: &[Node], i: usize) -> Result<ClopenSet, StrategyError> {
        let eps = self.eps(i);
        if self.bipartite {
            intersect_dirty(view, active, &eps, &|_| true)
        } else {
            let set: BTreeSet<Node> = active.iter().copied().collect();
            intersect_dirty(view, active, &eps, &|w| !set.contains(&w))
        }
    }

    fn init(&mut self, view: &GameState) -> Result<(), StrategyError> {
        let cfgame = view.config();
        self.bipartite = match cfgame.kind {
            GameKind::Nonbipartite => false,
            GameKind::Bipartite => true,
            GameKind::Restricted => {
                return Err(StrategyError::InvalidParameters("the staged strategy plays the equivalent game".into()))
            }
        };
        let d = cfgame.d.clone();
        if !self.cfg.allow_small_d && d < Dyadic::pow2_neg(4) {
            return Err(StrategyError::InvalidParameters(format!("d = {d} is below 2^-4")));
        }
        if cfgame.c != Dyadic::one() {
            return Err(StrategyError::InvalidParameters("the staged strategy assumes c = 1".into()));
        }
        let s = eps_schedule(&d)?;
        if s.exponent(0) > MAX_DEPTH as u64 {
            return Err(StrategyError::InvalidParameters(format!("eps_0 = {} is below 2^-127", s.eps[0])));
        }
        let universe = cfgame.universe.clone();
        let (left_need, need) = if self.bipartite {
            let (l, r) = required_vertices_bipartite(&d)?;
            (l, r)
        } else {
            (BigUint::default(), required_vertices(&d)?)
        };
        if universe < need || universe < left_need {
            return Err(StrategyError::InsufficientActiveVertices {
                have: universe.to_string(),
                need: need.max(left_need).to_string(),
            });
        }
        let explicit_ok = need <= BigUint::from(self.cfg.explicit_limit)
            && left_need <= BigUint::from(self.cfg.explicit_limit);
        self.orbit = match self.cfg.mode {
            OrbitMode::Explicit if !explicit_ok => {
                return Err(StrategyError::InvalidParameters(format!(
                    "explicit play is limited to {} vertices, the plan needs {need}",
                    self.cfg.explicit_limit
                )))
            }
            OrbitMode::Explicit => false,
            OrbitMode::Auto if explicit_ok => false,
            _ => true,
        };
        if self.orbit && !view.orbit_allowed() {
            return Err(StrategyError::InvalidParameters(
                "orbit reduction needs a relabeling-invariant Bob".into(),
            ));
        }
        if self.orbit && self.cfg.cap == 0 {
            return Err(StrategyError::InvalidParameters("cap must be positive".into()));
        }
        self.active_count = universe.clone();
        self.left_count = universe;
        self.schedule = Some(s);
        self.start_stage(view, 1)?;
        Ok(())
    }

    fn start_stage(&mut self, view: &GameState, i: usize) -> Result<(), StrategyError> {
        self.stage = i;
        self.substage = 0;
        if self.fresh_right {
            self.zone_a = ClopenSet::empty();
            self.zone_b = ClopenSet::empty();
        } else {
            self.zone_a = self.zone(view, &self.active, i - 1)?;
            self.zone_b = self.zone(view, &self.active, i)?;
        }
        // survivors wanted after each substage, from the last one backwards
        let s = self.sched().clone();
        let per_star = |l: u64| if self.bipartite { l } else { 1 + l };
        let mut k = BigUint::from(2u8);
        for j in (i + 1..=s.stages).rev() {
            let f = BigUint::from(per_star(s.leaves(j))) << s.exponent(j);
            let q = 1u64 << s.max_substages_log2(j);
            k *= f.pow(q as u32);
        }
        let q = 1u64 << s.max_substages_log2(i);
        let f = BigUint::from(per_star(s.leaves(i))) << s.exponent(i);
        let mut plan = Vec::with_capacity(q as usize);
        for _ in 0..q {
            plan.push(k.clone());
            k *= &f;
        }
        plan.reverse();
        self.plan_after = plan;
        Ok(())
    }

    fn goal_reached(&self) -> bool {
        self.zone_b.measure().saturating_sub(&self.zone_a.measure()) >= self.sched().d.half()
    }

    fn finish_stage(&mut self) -> Result<(), StrategyError> {
        let log = StageLog {
            stage: self.stage,
            substages: self.substage,
            zone_a: self.zone_a.measure(),
            zone_b: self.zone_b.measure(),
        };
        let floor = self.sched().d.half().mul_int(&BigUint::from(self.stage));
        if log.zone_b < floor {
            return Err(StrategyError::Assertion(format!(
                "zone after stage {} has measure {} < {floor}",
                self.stage, log.zone_b
            )));
        }
        self.logs.push(log);
        Ok(())
    }

    /// Checks that the explicit active vertices look alike from Bob's side.
    fn check_profiles(&self, view: &GameState) -> Result<(), StrategyError> {
        let profile = |x: Node| {
            let mut p: Vec<(Dyadic, Vec<CantorInterval>)> = view
                .neighbors(x)
                .iter()
                .map(|w| {
                    let e = Edge(x, *w).normalized();
                    (view.weight(&e), view.label(&e).intervals().to_vec())
                })
                .collect();
            p.sort();
            p
        };
        let Some(&first) = self.active.first() else { return Ok(()) };
        let p0 = profile(first);
        for &x in &self.active[1..] {
            if profile(x) != p0 {
                return Err(StrategyError::ProtocolDesync(format!(
                    "active vertices {first} and {x} differ; Bob is not relabeling-invariant"
                )));
            }
        }
        Ok(())
    }

    fn plan_substage(&mut self, view: &GameState) -> Result<AliceMove, StrategyError> {
        let i = self.stage;
        let j = self.substage as usize;
        let Some(target) = self.plan_after.get(j).cloned() else {
            return Err(StrategyError::Assertion(format!("stage {i} needs more than {j} substages")));
        };
        self.substage += 1;
        let leaves = self.sched().leaves(i);
        let stars = target << self.sched().exponent(i);
        let right_need = &stars * BigUint::from(if self.bipartite { leaves } else { leaves + 1 });
        if right_need > self.active_count {
            return Err(StrategyError::InsufficientActiveVertices {
                have: self.active_count.to_string(),
                need: right_need.to_string(),
            });
        }
        if self.bipartite && stars > self.left_count {
            return Err(StrategyError::InsufficientActiveVertices {
                have: self.left_count.to_string(),
                need: stars.to_string(),
            });
        }
        let m = if self.orbit {
            stars.clone().min(BigUint::from(self.cfg.cap)).try_into().expect("small")
        } else {
            u64::try_from(&stars).map_err(|_| StrategyError::InvalidParameters("too many stars".into()))?
        };
        let per = if self.bipartite { leaves } else { leaves + 1 };
        let explicit = m * per;
        if !self.orbit && explicit > self.cfg.explicit_limit {
            return Err(StrategyError::InvalidParameters(format!("{explicit} explicit vertices exceed the limit")));
        }
        if self.orbit {
            self.check_profiles(view)?;
        }
        let part = if self.bipartite { Part::Right } else { Part::Left };
        let mut next = view.next_fresh_id();
        let mut mv = AliceMove::default();
        let mut pool: Vec<Node> = Vec::with_capacity(explicit as usize);
        if self.fresh_right {
            for _ in 0..explicit {
                pool.push(Node { part, id: next });
                next += 1;
            }
        } else {
            pool.extend(self.active.iter().copied().take(explicit as usize));
            if (pool.len() as u64) < explicit {
                if !self.orbit {
                    return Err(StrategyError::InsufficientActiveVertices {
                        have: pool.len().to_string(),
                        need: explicit.to_string(),
                    });
                }
                let src = self.active[0];
                let deg = view.neighbors(src).len() as u64;
                while (pool.len() as u64) < explicit {
                    let dst = Node { part, id: next };
                    mv.clones.push(CloneOp { src, dst, ghost_start: next + 1 });
                    next += 1 + deg;
                    pool.push(dst);
                }
            }
        }
        self.clones += mv.clones.len() as u64;
        let w = self.eps(i - 1);
        let d = self.sched().d.clone();
        let mut it = pool.into_iter();
        self.stars.clear();
        for _ in 0..m {
            let center = if self.bipartite {
                let c = Node::left(next);
                next += 1;
                c
            } else {
                it.next().expect("pool sized")
            };
            let star_leaves: Vec<Node> = (0..leaves).map(|_| it.next().expect("pool sized")).collect();
            let center_load = if self.bipartite { Dyadic::zero() } else { self.profile_load(view, center, &mv) };
            let total = center_load + w.mul_int(&BigUint::from(leaves));
            if total > d {
                return Err(StrategyError::Assertion(format!("star center {center} would carry {total} > {d}")));
            }
            if total > self.max_center {
                self.max_center = total;
            }
            for &x in &star_leaves {
                mv.requests.push((Edge(center, x).normalized(), w.clone()));
            }
            self.stars.push(Star { center, leaves: star_leaves });
        }
        self.requests += mv.requests.len() as u64;
        self.star_count = stars;
        if self.bipartite {
            self.left_count -= &self.star_count;
        }
        self.phase = Phase::Harvest;
        Ok(mv)
    }

    /// Load of `v` once this move's copies are in place.
    fn profile_load(&self, view: &GameState, v: Node, mv: &AliceMove) -> Dyadic {
        match mv.clones.iter().find(|c| c.dst == v) {
            Some(c) => view.load(c.src),
            None => view.load(v),
        }
    }

    fn harvest(&mut self, view: &GameState) -> Result<(), StrategyError> {
        let i = self.stage;
        let k_prev = self.depth(i - 1);
        let k = self.depth(i);
        let mut witnesses: Vec<(Node, CantorInterval)> = Vec::with_capacity(self.stars.len());
        for star in &self.stars {
            let mut found = None;
            for &x in &star.leaves {
                let e = Edge(star.center, x).normalized();
                if !view.edge_satisfied(&e) {
                    return Err(StrategyError::ProtocolDesync(format!("star edge {e} is unmatched")));
                }
                let label = view.label(&e);
                for piece in label.intervals().iter().filter(|p| p.len() <= k_prev) {
                    if self.zone_a.meets_interval(piece) {
                        return Err(StrategyError::Assertion(format!("label piece {piece} of {e} meets zone (a)")));
                    }
                    if found.is_none() {
                        let outside = ClopenSet::from_interval(*piece).difference(&self.zone_b);
                        if let Some(first) = outside.intervals().first() {
                            let cell = if first.len() >= k { first.truncate(k) } else { CantorInterval::from_lo(first.lo(), k) };
                            found = Some((x, cell));
                        }
                    }
                }
            }
            match found {
                Some(w) => witnesses.push(w),
                None => {
                    return Err(StrategyError::Assertion(format!(
                        "star at {} left no label outside zone (b)",
                        star.center
                    )))
                }
            }
        }
        let mut counts: BTreeMap<CantorInterval, u64> = BTreeMap::new();
        for (_, c) in &witnesses {
            *counts.entry(*c).or_insert(0) += 1;
        }
        let top = *counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).expect("stars").0;
        let partial = self.orbit && BigUint::from(self.stars.len()) < self.star_count;
        if partial && counts.len() > 1 {
            return Err(StrategyError::ProtocolDesync(format!(
                "copies of one star produced different cells {:?}",
                counts.keys().map(|c| c.to_string()).collect::<Vec<_>>()
            )));
        }
        let survivors: Vec<Node> = witnesses.iter().filter(|(_, c)| *c == top).map(|(x, _)| *x).collect();
        self.active_count = if partial { self.star_count.clone() } else { BigUint::from(survivors.len()) };
        self.active = survivors;
        self.fresh_right = false;
        let zone = self.zone(view, &self.active, i)?;
        if !self.zone_b.is_subset(&zone) || !zone.contains_interval(&top) {
            return Err(StrategyError::Assertion(format!("zone (b) did not grow by {top}")));
        }
        self.zone_b = zone;
        let half = self.sched().d.half();
        for &x in &self.active {
            let spend = view.load(x);
            if spend > half {
                return Err(StrategyError::Assertion(format!("active {x} spent {spend} > {half}")));
            }
            if spend > self.max_spend {
                self.max_spend = spend;
            }
        }
        self.stars.clear();
        Ok(())
    }

    fn final_move(&mut self, view: &GameState) -> Result<AliceMove, StrategyError> {
        let half = self.sched().d.half();
        let e = if self.bipartite {
            let u = Node::left(view.next_fresh_id());
            Edge(u, self.active[0]).normalized()
        } else {
            if self.active.len() < 2 {
                return Err(StrategyError::InsufficientActiveVertices {
                    have: self.active.len().to_string(),
                    need: "2".into(),
                });
            }
            Edge(self.active[0], self.active[1]).normalized()
        };
        self.final_free = Some(view.free_cell_exists(&e, &half));
        self.final_edge = Some(e);
        self.requests += 1;
        self.phase = Phase::Done;
        Ok(AliceMove::requests(vec![(e, half)]))
    }
}

impl AliceStrategy for StagesAlice {
    fn name(&self) -> String {
        "stages".into()
    }

    fn next_move(&mut self, view: &GameState) -> Result<AliceMove, StrategyError> {
        match self.phase {
            Phase::Done => return Ok(AliceMove::pass()),
            Phase::Start => self.init(view)?,
            Phase::Harvest => self.harvest(view)?,
        }
        loop {
            if !self.fresh_right && self.goal_reached() {
                self.finish_stage()?;
                if self.stage == self.sched().stages {
                    return self.final_move(view);
                }
                self.start_stage(view, self.stage + 1)?;
                continue;
            }
            return self.plan_substage(view);
        }
    }

    fn summary(&self) -> Vec<String> {
        let mut out = vec![format!(
            "mode={} cap={} requests={} clones={} max_active_spend={} max_center_load={}",
            if self.orbit { "orbit" } else { "explicit" },
            self.cfg.cap,
            self.requests,
            self.clones,
            self.max_spend,
            self.max_center
        )];
        for l in &self.logs {
            out.push(format!(
                "stage={} substages={} zone_a={} zone_b={} growth={}",
                l.stage,
                l.substages,
                l.zone_a,
                l.zone_b,
                l.growth()
            ));
        }
        if let (Some(e), Some(free)) = (self.final_edge, self.final_free) {
            out.push(format!("final edge={e} free_cell={}", if free { "yes" } else { "no" }));
        }
        out
    }
}
