use std::collections::BTreeMap;

use crate::alice::eps_schedule;
use crate::cantor::{first_free_cell, CantorInterval, ClopenSet, MAX_DEPTH};
use crate::dyadic::Dyadic;
use crate::error::StrategyError;
use crate::referee::{BobMove, BobStrategy, Edge, GameState, Node};

use super::{pending_edges, request_depth, Overlay};

fn allocate_in(
    view: &GameState,
    e: &Edge,
    depth: u32,
    region: &ClopenSet,
    overlay: &Overlay,
) -> Result<CantorInterval, StrategyError> {
    let avoid = [view.occupied(e.0), overlay.get(e.0), view.occupied(e.1), overlay.get(e.1)];
    first_free_cell(depth, Some(region), &avoid)
        .ok_or_else(|| StrategyError::NoFreeInterval(e.to_string()))
}

/// Every request size owns a fixed region, identical for all vertices;
/// requests are placed greedily inside the region of their size.
#[derive(Debug, Clone)]
pub struct RegionsStatic {
    regions: BTreeMap<u32, ClopenSet>,
}

impl RegionsStatic {
    /// `portions` maps each request size to the measure of its region.
    /// Regions are carved in order of decreasing size.
    pub fn new(portions: &[(Dyadic, Dyadic)]) -> Result<Self, StrategyError> {
        let mut sorted: Vec<(u32, Dyadic)> = Vec::new();
        for (size, p) in portions {
            let k = size
                .neg_log2()
                .filter(|k| *k <= MAX_DEPTH as u64)
                .ok_or_else(|| StrategyError::InvalidParameters(format!("size {size}")))?;
            if !p.is_multiple_of(size) || p.is_zero() {
                return Err(StrategyError::InvalidParameters(format!(
                    "region measure {p} is not a positive multiple of {size}"
                )));
            }
            sorted.push((k as u32, p.clone()));
        }
        sorted.sort_by_key(|(k, _)| *k);
        let mut free = ClopenSet::full();
        let mut regions = BTreeMap::new();
        for (k, p) in sorted {
            let r = free.carve(&p).map_err(|_| {
                StrategyError::InvalidParameters("region measures exceed the whole space".into())
            })?;
            free = free.difference(&r);
            regions.insert(k, r);
        }
        Ok(RegionsStatic { regions })
    }

    /// Equal regions for each size (the sizes' count must be a power of two).
    pub fn uniform(sizes: &[Dyadic]) -> Result<Self, StrategyError> {
        let n = sizes.len() as u64;
        if !n.is_power_of_two() {
            return Err(StrategyError::InvalidParameters("size count must be a power of two".into()));
        }
        let p = Dyadic::pow2_neg(n.trailing_zeros() as u64);
        let portions: Vec<_> = sizes.iter().map(|s| (s.clone(), p.clone())).collect();
        Self::new(&portions)
    }

    /// Regions for the sizes the staged Alice uses at budget `d`: the final
    /// size `d/2` gets measure `d/2`, the stage sizes share the rest.
    pub fn for_budget(d: &Dyadic) -> Result<Self, StrategyError> {
        let s = eps_schedule(d)?;
        let last = d.half();
        let rest = Dyadic::one().checked_sub(&last).expect("d <= 1").shr(s.exponent(s.stages));
        let mut portions: Vec<_> = s.eps[..s.stages].iter().map(|e| (e.clone(), rest.clone())).collect();
        portions.push((last.clone(), last));
        Self::new(&portions)
    }

    pub fn region(&self, size: &Dyadic) -> Option<&ClopenSet> {
        self.regions.get(&(size.neg_log2()? as u32))
    }
}

impl BobStrategy for RegionsStatic {
    fn name(&self) -> String {
        "regions-static".into()
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
            let region = self.regions.get(&depth).ok_or_else(|| {
                StrategyError::InvalidParameters(format!("no region for size 2^-{depth}"))
            })?;
            let cell = ClopenSet::from_interval(allocate_in(view, &e, depth, region, &overlay)?);
            overlay.add(&e, &cell);
            mv.labels.push((e, view.label(&e).union(&cell)));
        }
        Ok(mv)
    }
}

/// `2s` equal regions shared by at most `s` sizes. Each size starts with
/// one region and receives another whenever the largest per-vertex load of
/// that size exceeds half the measure of the regions it holds.
#[derive(Debug, Clone)]
pub struct RegionsDynamic {
    sizes: Vec<u32>,
    chunk_depth: u32,
    total: usize,
    next_free: usize,
    assigned: BTreeMap<u32, Vec<usize>>,
    union: BTreeMap<u32, ClopenSet>,
    load: BTreeMap<(u32, Node), Dyadic>,
    max_load: BTreeMap<u32, Dyadic>,
}

impl RegionsDynamic {
    pub fn new(sizes: &[Dyadic]) -> Result<Self, StrategyError> {
        let s = sizes.len();
        if s == 0 {
            return Err(StrategyError::InvalidParameters("no sizes".into()));
        }
        let total = 2 * s;
        let chunk_depth = (total as u64).next_power_of_two().trailing_zeros();
        let mut ks = Vec::new();
        for size in sizes {
            let k = size
                .neg_log2()
                .filter(|k| *k <= MAX_DEPTH as u64 && *k >= chunk_depth as u64)
                .ok_or_else(|| StrategyError::InvalidParameters(format!("size {size}")))?;
            ks.push(k as u32);
        }
        let mut me = RegionsDynamic {
            sizes: ks.clone(),
            chunk_depth,
            total,
            next_free: 0,
            assigned: BTreeMap::new(),
            union: BTreeMap::new(),
            load: BTreeMap::new(),
            max_load: BTreeMap::new(),
        };
        for k in ks {
            me.assign(k)?;
        }
        Ok(me)
    }

    fn chunk(&self, i: usize) -> CantorInterval {
        CantorInterval::new(i as u128, self.chunk_depth).expect("chunk index fits")
    }

    fn assign(&mut self, k: u32) -> Result<(), StrategyError> {
        if self.next_free >= self.total {
            return Err(StrategyError::NoUnassignedRegion(format!("2^-{k}")));
        }
        let i = self.next_free;
        self.next_free += 1;
        self.assigned.entry(k).or_default().push(i);
        let u = self.union.entry(k).or_default();
        *u = u.union(&ClopenSet::from_interval(CantorInterval::new(i as u128, self.chunk_depth)
            .expect("chunk index fits")));
        Ok(())
    }

    /// The stage sizes of the staged Alice at budget `d`.
    pub fn for_budget(d: &Dyadic) -> Result<Self, StrategyError> {
        let s = eps_schedule(d)?;
        Self::new(&s.eps[..s.stages])
    }

    pub fn regions_assigned(&self) -> usize {
        self.next_free
    }

    pub fn region_count(&self) -> usize {
        self.total
    }

    pub fn regions_of(&self, size: &Dyadic) -> Vec<CantorInterval> {
        let k = size.neg_log2().unwrap_or(u64::MAX) as u32;
        self.assigned.get(&k).map(|v| v.iter().map(|&i| self.chunk(i)).collect()).unwrap_or_default()
    }

    fn assigned_measure(&self, k: u32) -> Dyadic {
        let n = self.assigned.get(&k).map(|v| v.len()).unwrap_or(0) as u64;
        Dyadic::from_integer(n).shr(self.chunk_depth as u64)
    }

    fn record(&mut self, k: u32, v: Node, w: &Dyadic) {
        let cur = self.load.entry((k, v)).or_default();
        *cur += w;
        let cur = cur.clone();
        let m = self.max_load.entry(k).or_default();
        if cur > *m {
            *m = cur;
        }
    }
}

impl BobStrategy for RegionsDynamic {
    fn name(&self) -> String {
        "regions-dynamic".into()
    }

    fn relabeling_invariant(&self) -> bool {
        true
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
            let w = view.weight(&e);
            let k = request_depth(&c, &w)?;
            if !self.sizes.contains(&k) {
                return Err(StrategyError::InvalidParameters(format!("unexpected size 2^-{k}")));
            }
            let eps = Dyadic::pow2_neg(k as u64);
            self.record(k, e.0, &eps);
            self.record(k, e.1, &eps);
            while self.max_load[&k] > self.assigned_measure(k).half() {
                self.assign(k)?;
            }
            let region = self.union[&k].clone();
            let cell = ClopenSet::from_interval(allocate_in(view, &e, k, &region, &overlay)?);
            overlay.add(&e, &cell);
            mv.labels.push((e, view.label(&e).union(&cell)));
        }
        Ok(mv)
    }

    fn summary(&self) -> Vec<String> {
        vec![format!("regions_assigned={}/{}", self.next_free, self.total)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn regions_for_a_budget() {
        let b = RegionsStatic::for_budget(&d("1/2")).unwrap();
        assert_eq!(b.region(&d("1/4")).unwrap().measure(), d("1/4"));
        assert_eq!(b.region(&d("1/1024")).unwrap().measure(), d("3/16"));
        let b = RegionsStatic::for_budget(&d("1/4")).unwrap();
        assert_eq!(b.region(&d("1/64")).unwrap().measure(), d("7/64"));
        let b = RegionsDynamic::for_budget(&d("1/2")).unwrap();
        assert_eq!(b.region_count(), 8);
        assert_eq!(b.regions_of(&d("1/16")).len(), 1);
    }

    #[test]
    fn static_regions_partition_by_decreasing_size() {
        let b = RegionsStatic::uniform(&[d("1/4"), d("1/8")]).unwrap();
        assert_eq!(b.region(&d("1/4")).unwrap().to_string(), "0");
        assert_eq!(b.region(&d("1/8")).unwrap().to_string(), "1");
        assert!(RegionsStatic::new(&[(d("1/4"), d("1/8"))]).is_err());
        assert!(RegionsStatic::new(&[(d("1/4"), d("3/4")), (d("1/8"), d("1/2"))]).is_err());
    }

    #[test]
    fn dynamic_regions_start_with_one_each() {
        let b = RegionsDynamic::new(&[d("1/16"), d("1/32")]).unwrap();
        assert_eq!(b.region_count(), 4);
        assert_eq!(b.regions_assigned(), 2);
        assert_eq!(b.regions_of(&d("1/16"))[0].to_string(), "00");
        assert_eq!(b.regions_of(&d("1/32"))[0].to_string(), "01");
    }
}
