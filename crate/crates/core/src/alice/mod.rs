//! Alice's strategies: the staged strategy for the equivalent game and a
//! random legal stream for the restricted game.

mod random;
mod stages;

pub use random::RandomLegalAlice;
pub use stages::{AliceConfig, OrbitMode, StageLog, StagesAlice};

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;

use crate::cantor::{ClopenSet, MAX_DEPTH};
use crate::dyadic::Dyadic;
use crate::error::StrategyError;
use crate::referee::{Edge, GameState, Node};

/// Weights used stage by stage: `eps[i]` for `i = 0..=stages`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub d: Dyadic,
    pub stages: usize,
    pub eps: Vec<Dyadic>,
}

impl Schedule {
    /// `-log2 eps[i]`.
    pub fn exponent(&self, i: usize) -> u64 {
        self.eps[i].neg_log2().expect("schedule entries are powers of two")
    }

    /// Leaves per star at stage `i`: `(d/2) / eps[i-1]`.
    pub fn leaves(&self, i: usize) -> u64 {
        1u64 << (self.exponent(i - 1) - self.exponent(self.stages))
    }

    /// Most substages stage `i` can take: `(d/2) / eps[i]`, as a power of two.
    pub fn max_substages_log2(&self, i: usize) -> u64 {
        self.exponent(i) - self.exponent(self.stages)
    }
}

/// `eps[N] = d/2`, `eps[i-1] = eps[i] d/2`, `N = 2/d`.
pub fn eps_schedule(d: &Dyadic) -> Result<Schedule, StrategyError> {
    let k = d
        .neg_log2()
        .filter(|k| *k >= 1 && *k < 32)
        .ok_or_else(|| StrategyError::InvalidParameters(format!("d = {d} must be 2^-k with 1 <= k < 32")))?;
    let stages = 1usize << (k + 1);
    let step = k + 1;
    let eps = (0..=stages).map(|i| Dyadic::pow2_neg(step * (stages - i + 1) as u64)).collect();
    Ok(Schedule { d: d.clone(), stages, eps })
}

fn stage_factor(s: &Schedule, i: usize, stars_per: &dyn Fn(u64) -> u64) -> (u64, BigUint) {
    (s.exponent(i), BigUint::from(stars_per(s.leaves(i))))
}

/// Active vertices needed before stage `i` (index `N + 1` is the final
/// request), for the star cost `per_star(L)`.
fn backward(s: &Schedule, per_star: &dyn Fn(u64) -> u64) -> Vec<BigUint> {
    let mut need = vec![BigUint::from(2u8); s.stages + 2];
    for i in (1..=s.stages).rev() {
        let (shift, f) = stage_factor(s, i, per_star);
        let q = 1u64 << s.max_substages_log2(i);
        let grown = f.pow(q as u32) << (shift * q);
        need[i] = &need[i + 1] * grown;
    }
    need
}

/// Vertices Alice needs in the non-bipartite game: each substage of stage
/// `i` turns `K / eps[i]` stars of `1 + L` vertices into `K` survivors.
pub fn required_vertices(d: &Dyadic) -> Result<BigUint, StrategyError> {
    let s = eps_schedule(d)?;
    Ok(backward(&s, &|l| 1 + l).swap_remove(1))
}

/// Left and right vertices needed in the bipartite game: stars take
/// their centers from the left and their leaves from the right.
pub fn required_vertices_bipartite(d: &Dyadic) -> Result<(BigUint, BigUint), StrategyError> {
    let s = eps_schedule(d)?;
    let right = backward(&s, &|l| l);
    let mut left = BigUint::one();
    for i in 1..=s.stages {
        // stars over the stage: sum over substages of K_after / eps_i
        let q = 1u64 << s.max_substages_log2(i);
        let f = BigUint::from(s.leaves(i)) << s.exponent(i);
        let mut k = right[i + 1].clone();
        for _ in 0..q {
            left += &k << s.exponent(i);
            k *= &f;
        }
    }
    Ok((left, right[1].clone()))
}

/// Grid `eps`-cells meeting the labels on edges from `x` to vertices for
/// which `counts` holds.
pub fn dirty_set(
    view: &GameState,
    x: Node,
    eps: &Dyadic,
    counts: &dyn Fn(Node) -> bool,
) -> Result<ClopenSet, StrategyError> {
    let depth = eps
        .neg_log2()
        .filter(|k| *k <= MAX_DEPTH as u64)
        .ok_or_else(|| StrategyError::InvalidParameters(format!("grid size {eps}")))? as u32;
    let mut used = ClopenSet::empty();
    for w in view.neighbors(x) {
        if counts(*w) {
            used = used.union(&view.label(&Edge(x, *w).normalized()));
        }
    }
    Ok(used.neighborhood_at_depth(depth))
}

/// Cells dirty for every vertex of `active`, counting only edges to
/// inactive vertices.
pub fn everywhere_dirty(view: &GameState, active: &[Node], eps: &Dyadic) -> Result<ClopenSet, StrategyError> {
    let set: BTreeSet<Node> = active.iter().copied().collect();
    intersect_dirty(view, active, eps, &|w| !set.contains(&w))
}

pub(crate) fn intersect_dirty(
    view: &GameState,
    active: &[Node],
    eps: &Dyadic,
    counts: &dyn Fn(Node) -> bool,
) -> Result<ClopenSet, StrategyError> {
    let mut zone = ClopenSet::full();
    for &x in active {
        zone = zone.intersection(&dirty_set(view, x, eps, counts)?);
        if zone.is_empty() {
            break;
        }
    }
    Ok(zone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::referee::{GameConfig, GameKind};

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn schedules() {
        let s = eps_schedule(&d("1/2")).unwrap();
        assert_eq!(s.stages, 4);
        let text: Vec<String> = s.eps.iter().map(|e| e.to_string()).collect();
        assert_eq!(text, ["1/2^10", "1/2^8", "1/2^6", "1/2^4", "1/2^2"]);
        assert_eq!(s.leaves(1), 256);
        assert_eq!(s.max_substages_log2(1), 6);
        let s = eps_schedule(&d("1/4")).unwrap();
        assert_eq!(s.stages, 8);
        assert_eq!(s.eps[8], d("1/8"));
        assert_eq!(s.eps[7], d("1/64"));
        assert_eq!(s.eps.len(), 9);
        assert!(eps_schedule(&d("3/4")).is_err());
        assert!(eps_schedule(&d("1")).is_err());
    }

    #[test]
    fn last_substage_needs_forty() {
        let s = eps_schedule(&d("1/2")).unwrap();
        let need = backward(&s, &|l| 1 + l);
        assert_eq!(need[5], BigUint::from(2u8));
        assert_eq!(need[4], BigUint::from(40u8));
        assert!(required_vertices(&d("1/2")).unwrap() > BigUint::from(10u8).pow(300));
    }

    #[test]
    fn bipartite_requirements() {
        let (l, r) = required_vertices_bipartite(&d("1/2")).unwrap();
        let n = required_vertices(&d("1/2")).unwrap();
        assert!(r < n);
        assert!(l > BigUint::from(1u8));
        // the last stage alone: 8 stars of 4 leaves
        let s = eps_schedule(&d("1/2")).unwrap();
        assert_eq!(backward(&s, &|l| l)[4], BigUint::from(32u8));
    }

    #[test]
    fn dirty_sets() {
        let mut g = GameState::new(GameConfig::equivalent(GameKind::Nonbipartite, d("1/2"), 10u32.into()));
        let all = |_: Node| true;
        assert!(dirty_set(&g, Node::v(0), &d("1/4"), &all).unwrap().is_empty());
        let e = Edge::between(0, 1);
        g.apply_alice_move(&[(e, d("1/8"))]).unwrap();
        g.apply_bob_move(&[(e, "001".parse().unwrap())]).unwrap();
        assert_eq!(dirty_set(&g, Node::v(0), &d("1/4"), &all).unwrap().to_string(), "00");
        assert_eq!(everywhere_dirty(&g, &[Node::v(0)], &d("1/4")).unwrap().to_string(), "00");
        assert!(everywhere_dirty(&g, &[Node::v(0), Node::v(1)], &d("1/4")).unwrap().is_empty());
        assert!(everywhere_dirty(&g, &[Node::v(0), Node::v(2)], &d("1/4")).unwrap().is_empty());
    }

    #[test]
    fn everywhere_dirty_intersects() {
        let mut g = GameState::new(GameConfig::equivalent(GameKind::Nonbipartite, d("1/2"), 10u32.into()));
        let reqs = [(Edge::between(0, 2), d("1/8")), (Edge::between(0, 3), d("1/8")), (Edge::between(1, 4), d("1/8")), (Edge::between(1, 5), d("1/8"))];
        g.apply_alice_move(&reqs).unwrap();
        let labs: Vec<_> = ["000", "011", "001", "110"]
            .iter()
            .zip(&reqs)
            .map(|(s, (e, _))| (*e, s.parse().unwrap()))
            .collect();
        g.apply_bob_move(&labs).unwrap();
        let z = everywhere_dirty(&g, &[Node::v(0), Node::v(1)], &d("1/4")).unwrap();
        assert_eq!(z.to_string(), "00");
    }
}
