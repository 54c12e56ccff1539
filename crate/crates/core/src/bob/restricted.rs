//! Bob's strategy for the restricted game.
//!
//! The top half of every string's space is cut into `ell` blocks and
//! colored by a [`ColoringFamily`]; a request of size `eps` between `x` and
//! `y` goes into a common block of the two strings' `eps`-active colors.
//! When no such block is usable one endpoint is blamed and the request is
//! placed in the bottom half, which is cut into `regions` regions of `s`
//! blocks each and split by a [`DominanceFamily`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use crate::cantor::{first_free_cell, CantorInterval, ClopenSet, MAX_DEPTH};
use crate::dyadic::Dyadic;
use crate::error::StrategyError;
use crate::families::{
    ceil_log2, coloring_certificate, dominance_certificate, Certificate, ColoringFamily,
    ColoringParams, DominanceFamily, DominanceParams, FamilyError,
};
use crate::referee::{BobMove, BobStrategy, Edge, GameConfig, GameState, Node};

use super::{pending_edges, request_depth, Overlay};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedParams {
    pub n: u32,
    pub p: u32,
    pub d: Dyadic,
    /// Allowed request exponents, increasing.
    pub sizes: Vec<u32>,
    pub coloring: ColoringParams,
    pub dominance: DominanceParams,
    /// Number of bottom regions.
    pub regions: usize,
    pub blame_bound: u64,
}

impl RestrictedParams {
    /// Parameters for `2^m` strings with the default block counts scaled
    /// from the game: `r = 2|E|` colors and regions, `s = 64m`,
    /// `ell` the least power of two with `ell >= 2^7 r^3 m`.
    pub fn scaled(n: u32, p: u32, d: Dyadic, m: u32) -> Self {
        let cfg = GameConfig::restricted(n, p, d.clone());
        let sizes: Vec<u32> = cfg.restricted_exponents().collect();
        let r = (2 * sizes.len()).max(2);
        let need = 128 * (r as u64).pow(3) * m as u64;
        let ell = need.next_power_of_two() as usize;
        RestrictedParams {
            n,
            p,
            d,
            sizes,
            coloring: ColoringParams::new(n, m, r, ell),
            dominance: DominanceParams { n, m, s: 64 * m as usize },
            regions: r,
            blame_bound: 256 * (n as u64).pow(3),
        }
    }

    /// `n = 32`, `p = 6`, `d = 2^-7` over 256 strings.
    pub fn desk() -> Self {
        Self::scaled(32, 6, Dyadic::pow2_neg(7), 8)
    }

    pub fn top_depth(&self) -> u32 {
        1 + ceil_log2(self.coloring.ell as u64)
    }

    pub fn bottom_depth(&self) -> u32 {
        1 + ceil_log2((self.regions * self.dominance.s) as u64)
    }

    pub fn strings(&self) -> usize {
        self.coloring.size()
    }

    /// Every hypothesis the strategy relies on, checked at these constants.
    pub fn certificate(&self) -> Certificate {
        let mut c = coloring_certificate(&self.coloring);
        c.lines.extend(dominance_certificate(&self.dominance).lines);
        let r = self.coloring.r as u64;
        let e = self.sizes.len() as u64;
        let m = self.coloring.m as u64;
        let largest = self.sizes.first().copied().unwrap_or(0);
        c.check("ell is a power of two", self.coloring.ell, self.coloring.ell.next_power_of_two(), self.coloring.ell.is_power_of_two());
        c.check(
            "top block >= 2 max size",
            format!("2^-{}", largest.saturating_sub(1)),
            format!("2^-{}", self.top_depth()),
            self.top_depth() < largest,
        );
        c.check(
            "bottom block >= 2 max size",
            format!("2^-{}", largest.saturating_sub(1)),
            format!("2^-{}", self.bottom_depth()),
            self.bottom_depth() < largest,
        );
        c.check("initial colors r >= |E|", e, r, r >= e);
        c.check("initial regions >= |E|", e, self.regions, self.regions as u64 >= e);
        let spare = Dyadic::from_integer(r - e.min(r));
        c.check("64 r d <= r - |E|", self.d.mul_int(&(64 * r).into()), &spare, self.d.mul_int(&(64 * r).into()) <= spare);
        let need = 4 * r * r * (m + 2 + ceil_log2(r) as u64);
        c.check("ell >= 4 r^2 (m + 2 + log r)", need, self.coloring.ell, self.coloring.ell as u64 >= need);
        c.check("coloring and dominance sizes agree", self.dominance.m, m, self.dominance.m as u64 == m);
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blame {
    pub edge: Edge,
    pub blamed: Node,
    pub exponent: u32,
}

#[derive(Debug, Clone)]
pub struct RestrictedBob {
    params: RestrictedParams,
    coloring: Arc<ColoringFamily>,
    dominance: Arc<DominanceFamily>,
    top_depth: u32,
    bottom_depth: u32,
    active_color: HashMap<(usize, u32), u8>,
    used_colors: HashMap<usize, u64>,
    colors_full: HashMap<usize, u64>,
    full_colors: HashSet<(usize, u8)>,
    top_units: HashMap<(usize, usize), u128>,
    full_top: HashSet<(usize, usize)>,
    full_in_color: HashMap<(usize, u8), Vec<u64>>,
    active_region: HashMap<(usize, u32), usize>,
    used_regions: HashMap<usize, u64>,
    bottom_units: HashMap<(usize, usize), u128>,
    full_bottom: HashSet<(usize, usize)>,
    full_in_region: HashMap<(usize, usize), u64>,
    blames: BTreeMap<usize, u64>,
    log: Vec<Blame>,
    top_allocs: u64,
    bottom_allocs: u64,
    skipped_fragmented: u64,
    monitor_runs: u64,
    monitor_max: u64,
}

impl RestrictedBob {
    pub fn new(
        params: RestrictedParams,
        coloring: Arc<ColoringFamily>,
        dominance: Arc<DominanceFamily>,
    ) -> Result<Self, StrategyError> {
        let bad = |m: &str| Err(StrategyError::InvalidParameters(m.into()));
        if coloring.params.ell != params.coloring.ell
            || coloring.params.r != params.coloring.r
            || coloring.len() != params.strings()
        {
            return bad("coloring family does not match the parameters");
        }
        if dominance.params.s != params.dominance.s || dominance.len() != params.strings() {
            return bad("dominance family does not match the parameters");
        }
        if params.sizes.is_empty()
            || params.sizes.len() > params.coloring.r
            || params.sizes.len() > params.regions
            || params.regions > 64
        {
            return bad("need 1 <= |E| <= min(r, regions) and regions <= 64");
        }
        let top_depth = params.top_depth();
        let bottom_depth = params.bottom_depth();
        if !params.coloring.ell.is_power_of_two()
            || params.sizes.iter().any(|&k| k > MAX_DEPTH || k <= top_depth.max(bottom_depth))
        {
            return bad("blocks must be powers of two and hold at least two cells of every size");
        }
        Ok(RestrictedBob {
            params,
            coloring,
            dominance,
            top_depth,
            bottom_depth,
            active_color: HashMap::new(),
            used_colors: HashMap::new(),
            colors_full: HashMap::new(),
            full_colors: HashSet::new(),
            top_units: HashMap::new(),
            full_top: HashSet::new(),
            full_in_color: HashMap::new(),
            active_region: HashMap::new(),
            used_regions: HashMap::new(),
            bottom_units: HashMap::new(),
            full_bottom: HashSet::new(),
            full_in_region: HashMap::new(),
            blames: BTreeMap::new(),
            log: Vec::new(),
            top_allocs: 0,
            bottom_allocs: 0,
            skipped_fragmented: 0,
            monitor_runs: 0,
            monitor_max: 0,
        })
    }

    /// Builds both families from `seed` and checks them.
    pub fn build(params: RestrictedParams, seed: u64, max_attempts: u32) -> Result<Self, FamilyError> {
        let c = ColoringFamily::build(params.coloring.clone(), seed, max_attempts)?;
        let d = DominanceFamily::build(params.dominance.clone(), seed ^ 0x9e37_79b9, max_attempts)?;
        Self::new(params, Arc::new(c), Arc::new(d))
            .map_err(|e| FamilyError::InvalidParameters(e.to_string()))
    }

    pub fn params(&self) -> &RestrictedParams {
        &self.params
    }

    pub fn blame_log(&self) -> &[Blame] {
        &self.log
    }

    pub fn blames_of(&self, v: usize) -> u64 {
        self.blames.get(&v).copied().unwrap_or(0)
    }

    pub fn max_blames(&self) -> u64 {
        self.blames.values().copied().max().unwrap_or(0)
    }

    pub fn colors_full_of(&self, v: usize) -> u64 {
        self.colors_full.get(&v).copied().unwrap_or(0)
    }

    pub fn top_allocations(&self) -> u64 {
        self.top_allocs
    }

    pub fn bottom_allocations(&self) -> u64 {
        self.bottom_allocs
    }

    pub fn monitor_max(&self) -> u64 {
        self.monitor_max
    }

    pub fn monitor_runs(&self) -> u64 {
        self.monitor_runs
    }

    fn size_index(&self, k: u32) -> Result<usize, StrategyError> {
        self.params
            .sizes
            .iter()
            .position(|&x| x == k)
            .ok_or_else(|| StrategyError::InvalidParameters(format!("unexpected size 2^-{k}")))
    }

    fn string(&self, v: Node) -> Result<usize, StrategyError> {
        let id = v.id as usize;
        if id >= self.params.strings() {
            return Err(StrategyError::InvalidParameters(format!("vertex {v} outside the family")));
        }
        Ok(id)
    }

    pub fn active_color(&self, v: usize, k: u32) -> Option<u8> {
        let j = self.size_index(k).ok()?;
        Some(self.active_color.get(&(v, k)).copied().unwrap_or(j as u8))
    }

    pub fn active_region(&self, v: usize, k: u32) -> Option<usize> {
        let j = self.size_index(k).ok()?;
        Some(self.active_region.get(&(v, k)).copied().unwrap_or(j))
    }

    fn initial_mask(&self) -> u64 {
        (1u64 << self.params.sizes.len()) - 1
    }

    fn top_block(&self, i: usize) -> CantorInterval {
        CantorInterval::new(i as u128, self.top_depth).expect("block index fits")
    }

    fn bottom_block(&self, g: usize) -> CantorInterval {
        let len = self.bottom_depth;
        CantorInterval::new((1u128 << (len - 1)) | g as u128, len).expect("block index fits")
    }

    fn cell_in(
        view: &GameState,
        overlay: &Overlay,
        e: &Edge,
        block: CantorInterval,
        k: u32,
    ) -> Option<CantorInterval> {
        let within = ClopenSet::from_interval(block);
        let avoid = [view.occupied(e.0), overlay.get(e.0), view.occupied(e.1), overlay.get(e.1)];
        first_free_cell(k, Some(&within), &avoid)
    }

    fn full_bits(&mut self, v: usize, a: u8) -> &mut Vec<u64> {
        let words = self.params.coloring.ell.div_ceil(64);
        self.full_in_color.entry((v, a)).or_insert_with(|| vec![0; words])
    }

    /// Checks the family's conclusion for the full blocks of `v` in its
    /// color `a`.
    fn monitor(&mut self, v: usize, a: u8) -> Result<(), StrategyError> {
        let Some(bits) = self.full_in_color.get(&(v, a)) else { return Ok(()) };
        let size: u64 = bits.iter().map(|w| w.count_ones() as u64).sum();
        let p = &self.params.coloring;
        if size == 0 || 8 * p.r as u64 * size > p.ell as u64 {
            return Ok(());
        }
        let count = self.coloring.second_condition_count(v, a as usize, bits);
        self.monitor_runs += 1;
        self.monitor_max = self.monitor_max.max(count);
        if count > p.k_bound {
            return Err(StrategyError::Assertion(format!(
                "monitor count {count} > {} for string {v} color {a}",
                p.k_bound
            )));
        }
        Ok(())
    }

    fn rotate_color(&mut self, v: usize, a: u8) -> Result<(), StrategyError> {
        let r = self.params.coloring.r;
        let init = self.initial_mask();
        let used = self.used_colors.entry(v).or_insert(init);
        let Some(next) = (0..r as u8).find(|&b| *used >> b & 1 == 0) else {
            return Err(StrategyError::NoInactiveColorLeft(v as u64));
        };
        let mut moved = false;
        for (j, &k) in self.params.sizes.iter().enumerate() {
            let cur = self.active_color.get(&(v, k)).copied().unwrap_or(j as u8);
            if cur == a {
                self.active_color.insert((v, k), next);
                moved = true;
            }
        }
        if moved {
            *self.used_colors.get_mut(&v).expect("inserted") |= 1 << next;
        }
        Ok(())
    }

    fn record_top(&mut self, v: usize, i: usize, units: u128) -> Result<(), StrategyError> {
        let block_units = self.top_block(i).units();
        let u = self.top_units.entry((v, i)).or_insert(0);
        *u += units;
        if 2 * *u < block_units || !self.full_top.insert((v, i)) {
            return Ok(());
        }
        let a = self.coloring.color(v, i);
        self.full_bits(v, a)[i / 64] |= 1 << (i % 64);
        self.monitor(v, a)?;
        let full: u64 = self.full_in_color[&(v, a)].iter().map(|w| w.count_ones() as u64).sum();
        if 8 * full >= self.coloring.class_size(v, a as usize) && self.full_colors.insert((v, a)) {
            let n = self.colors_full.entry(v).or_insert(0);
            *n += 1;
            let bound = self.params.d.mul_int(&(64 * self.params.coloring.r as u64).into());
            if Dyadic::from_integer(*n) > bound {
                return Err(StrategyError::Assertion(format!(
                    "string {v} has {n} full colors, more than 64 r d = {bound}"
                )));
            }
            self.rotate_color(v, a)?;
        }
        Ok(())
    }

    /// Least common block of the active colors that is non-full for both
    /// strings and still has a free cell at both.
    fn first_try(
        &mut self,
        view: &GameState,
        overlay: &Overlay,
        e: &Edge,
        x: usize,
        y: usize,
        k: u32,
    ) -> Option<CantorInterval> {
        let a = self.active_color(x, k)? as usize;
        let b = self.active_color(y, k)? as usize;
        let cx = self.coloring.class(x, a);
        let cy = self.coloring.class(y, b);
        let mut skipped = 0;
        let mut found = None;
        'outer: for (w, (p, q)) in cx.iter().zip(cy).enumerate() {
            let mut bits = p & q;
            while bits != 0 {
                let i = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if self.full_top.contains(&(x, i)) || self.full_top.contains(&(y, i)) {
                    continue;
                }
                if let Some(cell) = Self::cell_in(view, overlay, e, self.top_block(i), k) {
                    found = Some(cell);
                    break 'outer;
                }
                skipped += 1;
            }
        }
        self.skipped_fragmented += skipped;
        found
    }

    fn choose_blamed(&self, x: usize, y: usize, k: u32) -> usize {
        let a = self.active_color(x, k).unwrap_or(0) as usize;
        let b = self.active_color(y, k).unwrap_or(0) as usize;
        let (mut common, mut fx, mut fy) = (0u64, 0u64, 0u64);
        for (w, (p, q)) in self.coloring.class(x, a).iter().zip(self.coloring.class(y, b)).enumerate() {
            let mut bits = p & q;
            while bits != 0 {
                let i = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                common += 1;
                fx += self.full_top.contains(&(x, i)) as u64;
                fy += self.full_top.contains(&(y, i)) as u64;
            }
        }
        let (lo, hi, flo, fhi) = if x < y { (x, y, fx, fy) } else { (y, x, fy, fx) };
        match (2 * flo >= common, 2 * fhi >= common) {
            (true, _) => lo,
            (false, true) => hi,
            (false, false) if fhi > flo => hi,
            _ => lo,
        }
    }

    fn rotate_region(&mut self, v: usize, region: usize) -> Result<(), StrategyError> {
        let init = self.initial_mask();
        let used = self.used_regions.entry(v).or_insert(init);
        let Some(next) = (0..self.params.regions).find(|&b| *used >> b & 1 == 0) else {
            return Err(StrategyError::NoCandidateBlock(format!("no unused bottom region for string {v}")));
        };
        let mut moved = false;
        for (j, &k) in self.params.sizes.iter().enumerate() {
            let cur = self.active_region.get(&(v, k)).copied().unwrap_or(j);
            if cur == region {
                self.active_region.insert((v, k), next);
                moved = true;
            }
        }
        if moved {
            *self.used_regions.get_mut(&v).expect("inserted") |= 1 << next;
        }
        Ok(())
    }

    fn second_try(
        &mut self,
        view: &GameState,
        overlay: &Overlay,
        e: &Edge,
        w: usize,
        z: usize,
        k: u32,
    ) -> Result<(CantorInterval, usize, usize), StrategyError> {
        let region = self.active_region(w, k).expect("size checked");
        let s = self.params.dominance.s;
        let mut candidate = false;
        for i in 0..s {
            let g = region * s + i;
            if !self.dominance.dominant(w, i)
                || self.dominance.dominant(z, i)
                || self.full_bottom.contains(&(w, g))
            {
                continue;
            }
            candidate = true;
            let block = self.bottom_block(g);
            let zu = self.bottom_units.get(&(z, g)).copied().unwrap_or(0);
            if 2 * zu >= block.units() {
                return Err(StrategyError::Assertion(format!(
                    "blamed string {z} holds half of bottom block {g}"
                )));
            }
            if let Some(cell) = Self::cell_in(view, overlay, e, block, k) {
                return Ok((cell, region, g));
            }
        }
        if candidate {
            Err(StrategyError::NoFreeInterval(format!("{e} in bottom region {region}")))
        } else {
            Err(StrategyError::NoCandidateBlock(format!("{e} in bottom region {region}")))
        }
    }

    fn record_bottom(&mut self, w: usize, z: usize, region: usize, g: usize, units: u128) -> Result<(), StrategyError> {
        *self.bottom_units.entry((z, g)).or_insert(0) += units;
        let block_units = self.bottom_block(g).units();
        let u = self.bottom_units.entry((w, g)).or_insert(0);
        *u += units;
        if 2 * *u < block_units || !self.full_bottom.insert((w, g)) {
            return Ok(());
        }
        let n = self.full_in_region.entry((w, region)).or_insert(0);
        *n += 1;
        let dominant: u64 = self.dominance.pattern(w).iter().map(|x| x.count_ones() as u64).sum();
        if 8 * *n >= dominant {
            self.rotate_region(w, region)?;
        }
        Ok(())
    }

    fn blame(&mut self, e: Edge, z: usize, k: u32) -> Result<Node, StrategyError> {
        let node = if e.0.id as usize == z { e.0 } else { e.1 };
        let n = self.blames.entry(z).or_insert(0);
        *n += 1;
        if *n > self.params.blame_bound {
            return Err(StrategyError::Assertion(format!(
                "string {z} blamed {n} times, bound {}",
                self.params.blame_bound
            )));
        }
        self.log.push(Blame { edge: e, blamed: node, exponent: k });
        if let Some(a) = self.active_color(z, k) {
            self.monitor(z, a)?;
        }
        Ok(node)
    }
}

impl BobStrategy for RestrictedBob {
    fn name(&self) -> String {
        "restricted".into()
    }

    fn respond(
        &mut self,
        view: &GameState,
        requests: &[(Edge, Dyadic)],
    ) -> Result<BobMove, StrategyError> {
        let c = view.config().c.clone();
        let mut overlay = Overlay::default();
        let mut mv = BobMove::default();
        for e in pending_edges(view, requests) {
            let k = request_depth(&c, &view.weight(&e))?;
            self.size_index(k)?;
            let (x, y) = (self.string(e.0)?, self.string(e.1)?);
            let units = 1u128 << (MAX_DEPTH - k);
            let cell = if let Some(cell) = self.first_try(view, &overlay, &e, x, y, k) {
                let i = (cell.bits() >> (k - self.top_depth)) as usize;
                if cell.bits() >> (k - 1) != 0 {
                    return Err(StrategyError::Assertion(format!("top allocation {cell} left the top half")));
                }
                self.top_allocs += 1;
                self.record_top(x, i, units)?;
                self.record_top(y, i, units)?;
                cell
            } else {
                let z = self.choose_blamed(x, y, k);
                let w = if z == x { y } else { x };
                let node = self.blame(e, z, k)?;
                mv.blames.push((e, node));
                let (cell, region, g) = self.second_try(view, &overlay, &e, w, z, k)?;
                if cell.bits() >> (k - 1) != 1 {
                    return Err(StrategyError::Assertion(format!("bottom allocation {cell} left the bottom half")));
                }
                self.bottom_allocs += 1;
                self.record_bottom(w, z, region, g, units)?;
                cell
            };
            let cell = ClopenSet::from_interval(cell);
            overlay.add(&e, &cell);
            mv.labels.push((e, view.label(&e).union(&cell)));
        }
        Ok(mv)
    }

    fn summary(&self) -> Vec<String> {
        vec![
            format!("top_allocations={}", self.top_allocs),
            format!("bottom_allocations={}", self.bottom_allocs),
            format!("blames={} max_per_string={}", self.log.len(), self.max_blames()),
            format!("colors_full_max={}", self.colors_full.values().max().copied().unwrap_or(0)),
            format!("fragmented_blocks_skipped={}", self.skipped_fragmented),
            format!("monitor_runs={} monitor_max={}", self.monitor_runs, self.monitor_max),
        ]
    }
}
