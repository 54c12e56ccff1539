//! Intervals and clopen subsets of Cantor space.
//!
//! An interval `[z]` is the set of infinite sequences extending the finite
//! bit string `z`. Prefixes are limited to [`MAX_DEPTH`] bits so that every
//! endpoint fits in a `u128` measured in units of `2^-MAX_DEPTH`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::dyadic::Dyadic;
use crate::error::{CantorError, ParseError};

pub const MAX_DEPTH: u32 = 127;

/// `2^MAX_DEPTH`, the measure of the whole space in units.
pub const FULL: u128 = 1u128 << MAX_DEPTH;

/// The interval `[z]` for a prefix `z` of at most [`MAX_DEPTH`] bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CantorInterval {
    bits: u128,
    len: u8,
}

impl CantorInterval {
    pub fn root() -> Self {
        CantorInterval { bits: 0, len: 0 }
    }

    /// The prefix whose bits are the low `len` bits of `bits`, most
    /// significant first.
    pub fn new(bits: u128, len: u32) -> Result<Self, CantorError> {
        if len > MAX_DEPTH {
            return Err(CantorError::DepthExceeded(len as u64));
        }
        if len < 128 && bits >> len != 0 {
            return Err(CantorError::DepthExceeded(len as u64));
        }
        Ok(CantorInterval { bits, len: len as u8 })
    }

    fn raw(bits: u128, len: u32) -> Self {
        debug_assert!(len <= MAX_DEPTH);
        CantorInterval { bits, len: len as u8 }
    }

    /// The grid cell of depth `len` whose left endpoint is `lo` (in units).
    pub fn from_lo(lo: u128, len: u32) -> Self {
        debug_assert!(len <= MAX_DEPTH);
        Self::raw(lo >> (MAX_DEPTH - len), len)
    }

    pub fn len(&self) -> u32 {
        self.len as u32
    }

    pub fn is_root(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn size(&self) -> Dyadic {
        Dyadic::pow2_neg(self.len as u64)
    }

    /// Size in units of `2^-MAX_DEPTH`.
    pub fn units(&self) -> u128 {
        1u128 << (MAX_DEPTH - self.len as u32)
    }

    pub fn lo(&self) -> u128 {
        self.bits << (MAX_DEPTH - self.len as u32)
    }

    pub fn hi(&self) -> u128 {
        self.lo() + self.units()
    }

    /// True when `other` is a sub-interval (its prefix extends ours).
    pub fn contains(&self, other: &CantorInterval) -> bool {
        other.len >= self.len && (other.bits >> (other.len - self.len)) == self.bits
    }

    pub fn is_disjoint(&self, other: &CantorInterval) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    pub fn child(&self, bit: bool) -> Option<CantorInterval> {
        if self.len as u32 >= MAX_DEPTH {
            return None;
        }
        Some(Self::raw((self.bits << 1) | bit as u128, self.len as u32 + 1))
    }

    pub fn parent(&self) -> Option<CantorInterval> {
        (self.len > 0).then(|| Self::raw(self.bits >> 1, self.len as u32 - 1))
    }

    /// The ancestor of depth `depth`, or `self` when already that coarse.
    pub fn truncate(&self, depth: u32) -> CantorInterval {
        if self.len as u32 <= depth {
            *self
        } else {
            Self::raw(self.bits >> (self.len as u32 - depth), depth)
        }
    }
}

impl Ord for CantorInterval {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.lo(), self.len).cmp(&(other.lo(), other.len))
    }
}

impl PartialOrd for CantorInterval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CantorInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("*");
        }
        for i in (0..self.len).rev() {
            f.write_str(if (self.bits >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for CantorInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for CantorInterval {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "*" {
            return Ok(CantorInterval::root());
        }
        if s.is_empty() || s.len() > MAX_DEPTH as usize {
            return Err(ParseError::Prefix(s.to_string()));
        }
        let mut bits = 0u128;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(ParseError::Prefix(s.to_string())),
                };
        }
        Ok(CantorInterval::raw(bits, s.len() as u32))
    }
}

/// Depth of the grid whose cells have size `eps`.
pub fn grid_depth(eps: &Dyadic) -> Result<u32, CantorError> {
    let k = eps
        .neg_log2()
        .ok_or_else(|| CantorError::NotPowerOfTwo(eps.to_string()))?;
    if k > MAX_DEPTH as u64 {
        return Err(CantorError::DepthExceeded(k));
    }
    Ok(k as u32)
}

/// Converts a measure in units back to a dyadic.
pub fn units_to_dyadic(units: u128) -> Dyadic {
    Dyadic::new(units.into(), MAX_DEPTH as u64)
}

/// Converts a dyadic of at most one to units, if it is representable.
pub fn dyadic_to_units(d: &Dyadic) -> Option<u128> {
    if d.exponent() > MAX_DEPTH as u64 || d > &Dyadic::one() {
        return None;
    }
    let n = d.scaled(MAX_DEPTH as u64);
    u128::try_from(n).ok()
}

/// Splits `[lo, hi)` into maximal aligned blocks, appending in address order.
fn decompose(mut lo: u128, hi: u128, out: &mut Vec<CantorInterval>) {
    while lo < hi {
        let align = if lo == 0 { MAX_DEPTH } else { lo.trailing_zeros().min(MAX_DEPTH) };
        let span = 127 - (hi - lo).leading_zeros();
        let k = align.min(span);
        out.push(CantorInterval::from_lo(lo, MAX_DEPTH - k));
        lo += 1u128 << k;
    }
}

/// A finite union of intervals in canonical form: maximal dyadic intervals,
/// pairwise disjoint, sorted lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ClopenSet {
    intervals: Vec<CantorInterval>,
}

impl ClopenSet {
    pub const fn empty() -> Self {
        ClopenSet { intervals: Vec::new() }
    }

    pub fn full() -> Self {
        ClopenSet { intervals: vec![CantorInterval::root()] }
    }

    pub fn from_interval(iv: CantorInterval) -> Self {
        ClopenSet { intervals: vec![iv] }
    }

    /// Canonicalizes an arbitrary (possibly overlapping) list of intervals.
    pub fn from_intervals<I: IntoIterator<Item = CantorInterval>>(it: I) -> Self {
        let mut ranges: Vec<(u128, u128)> = it.into_iter().map(|iv| (iv.lo(), iv.hi())).collect();
        ranges.sort_unstable();
        Self::from_sorted_ranges(merge_sorted(ranges))
    }

    /// Builds from sorted, pairwise disjoint, non-adjacent ranges.
    fn from_sorted_ranges(ranges: Vec<(u128, u128)>) -> Self {
        let mut out = Vec::new();
        for (lo, hi) in ranges {
            decompose(lo, hi, &mut out);
        }
        ClopenSet { intervals: out }
    }

    /// The set `[lo, hi)` in units; must be aligned to the unit grid.
    pub fn from_range(lo: u128, hi: u128) -> Self {
        let mut out = Vec::new();
        decompose(lo, hi.min(FULL), &mut out);
        ClopenSet { intervals: out }
    }

    pub fn intervals(&self) -> &[CantorInterval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Maximal contiguous runs, sorted.
    pub fn ranges(&self) -> Vec<(u128, u128)> {
        let mut out: Vec<(u128, u128)> = Vec::with_capacity(self.intervals.len());
        for iv in &self.intervals {
            let (lo, hi) = (iv.lo(), iv.hi());
            match out.last_mut() {
                Some(last) if last.1 == lo => last.1 = hi,
                _ => out.push((lo, hi)),
            }
        }
        out
    }

    pub fn measure_units(&self) -> u128 {
        self.intervals.iter().map(|iv| iv.units()).sum()
    }

    pub fn measure(&self) -> Dyadic {
        units_to_dyadic(self.measure_units())
    }

    /// Size of the largest interval contained in the set.
    pub fn nu(&self) -> Dyadic {
        self.intervals
            .iter()
            .map(|iv| iv.len())
            .min()
            .map(|k| Dyadic::pow2_neg(k as u64))
            .unwrap_or_else(Dyadic::zero)
    }

    /// Shortest prefix length among the canonical intervals.
    pub fn nu_depth(&self) -> Option<u32> {
        self.intervals.iter().map(|iv| iv.len()).min()
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let a = self.ranges();
        let b = other.ranges();
        let mut all = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] <= b[j]) {
                all.push(a[i]);
                i += 1;
            } else {
                all.push(b[j]);
                j += 1;
            }
        }
        Self::from_sorted_ranges(merge_sorted(all))
    }

    pub fn intersection(&self, other: &ClopenSet) -> ClopenSet {
        let a = self.ranges();
        let b = other.ranges();
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_sorted_ranges(out)
    }

    pub fn difference(&self, other: &ClopenSet) -> ClopenSet {
        if other.is_empty() || self.is_empty() {
            return self.clone();
        }
        let b = other.ranges();
        let mut out = Vec::new();
        let mut j = 0;
        for (mut lo, hi) in self.ranges() {
            while j < b.len() && b[j].1 <= lo {
                j += 1;
            }
            let mut k = j;
            while k < b.len() && b[k].0 < hi {
                if b[k].0 > lo {
                    out.push((lo, b[k].0));
                }
                lo = lo.max(b[k].1);
                if b[k].1 > hi {
                    break;
                }
                k += 1;
            }
            if lo < hi {
                out.push((lo, hi));
            }
        }
        Self::from_sorted_ranges(out)
    }

    pub fn complement(&self) -> ClopenSet {
        ClopenSet::full().difference(self)
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> bool {
        let a = self.ranges();
        let b = other.ranges();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i].0.max(b[j].0) < a[i].1.min(b[j].1) {
                return false;
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        true
    }

    pub fn is_subset(&self, other: &ClopenSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn contains_interval(&self, iv: &CantorInterval) -> bool {
        let (lo, hi) = (iv.lo(), iv.hi());
        self.ranges().iter().any(|&(a, b)| a <= lo && hi <= b)
    }

    pub fn meets_interval(&self, iv: &CantorInterval) -> bool {
        let (lo, hi) = (iv.lo(), iv.hi());
        self.intervals.iter().any(|c| c.lo() < hi && lo < c.hi())
    }

    /// Union of all grid cells of depth `depth` meeting the set.
    pub fn neighborhood_at_depth(&self, depth: u32) -> ClopenSet {
        let depth = depth.min(MAX_DEPTH);
        ClopenSet::from_intervals(self.intervals.iter().map(|iv| iv.truncate(depth)))
    }

    /// Union of all grid intervals of size `eps` meeting the set.
    pub fn eps_neighborhood(&self, eps: &Dyadic) -> Result<ClopenSet, CantorError> {
        Ok(self.neighborhood_at_depth(grid_depth(eps)?))
    }

    /// Grid cells of depth `depth` meeting the set, in address order.
    pub fn cells_meeting(&self, depth: u32) -> Vec<CantorInterval> {
        let mut out = Vec::new();
        for iv in self.neighborhood_at_depth(depth).intervals() {
            let step = 1u128 << (MAX_DEPTH - depth);
            let mut lo = iv.lo();
            while lo < iv.hi() {
                out.push(CantorInterval::from_lo(lo, depth));
                lo += step;
            }
        }
        out
    }

    /// A subset of exactly `target` measure: whole canonical intervals in
    /// lexicographic order, the last one split at its left end.
    pub fn carve(&self, target: &Dyadic) -> Result<ClopenSet, CantorError> {
        let insufficient = || CantorError::InsufficientMeasure {
            have: self.measure().to_string(),
            need: target.to_string(),
        };
        let mut need = dyadic_to_units(target).ok_or_else(|| {
            if target.exponent() > MAX_DEPTH as u64 {
                CantorError::DepthExceeded(target.exponent())
            } else {
                insufficient()
            }
        })?;
        if need > self.measure_units() {
            return Err(insufficient());
        }
        let mut out = Vec::new();
        for (lo, hi) in self.ranges() {
            if need == 0 {
                break;
            }
            let take = need.min(hi - lo);
            out.push((lo, lo + take));
            need -= take;
        }
        // Consecutive taken ranges came from distinct maximal runs, so they
        // cannot touch.
        Ok(Self::from_sorted_ranges(out))
    }

    /// Least grid-aligned interval of the given size disjoint from `self`.
    pub fn find_free_interval(&self, size: &Dyadic) -> Result<Option<CantorInterval>, CantorError> {
        let depth = grid_depth(size)?;
        Ok(first_free_cell(depth, None, &[self]))
    }
}

fn merge_sorted(ranges: Vec<(u128, u128)>) -> Vec<(u128, u128)> {
    let mut out: Vec<(u128, u128)> = Vec::with_capacity(ranges.len());
    for (lo, hi) in ranges {
        if lo >= hi {
            continue;
        }
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn align_up(x: u128, step: u128) -> u128 {
    let r = x & (step - 1);
    if r == 0 {
        x
    } else {
        x - r + step
    }
}

/// Least grid cell of depth `depth` inside `within` (whole space when
/// `None`) that meets none of the sets in `avoid`.
pub fn first_free_cell(
    depth: u32,
    within: Option<&ClopenSet>,
    avoid: &[&ClopenSet],
) -> Option<CantorInterval> {
    let step = 1u128 << (MAX_DEPTH - depth);
    let mut blocked: Vec<(u128, u128)> = avoid.iter().flat_map(|s| s.ranges()).collect();
    blocked.sort_unstable();
    let blocked = merge_sorted(blocked);
    let allowed = match within {
        Some(w) => w.ranges(),
        None => vec![(0, FULL)],
    };
    let mut j = 0;
    for (a, b) in allowed {
        let mut cand = align_up(a, step);
        while cand < b && b - cand >= step {
            while j < blocked.len() && blocked[j].1 <= cand {
                j += 1;
            }
            if j < blocked.len() && blocked[j].0 < cand + step {
                cand = align_up(blocked[j].1, step);
                continue;
            }
            return Some(CantorInterval::from_lo(cand, depth));
        }
    }
    None
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("-");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for ClopenSet {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Ok(ClopenSet::empty());
        }
        let ivs = s
            .split(',')
            .map(|p| p.parse::<CantorInterval>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ParseError::Clopen(s.to_string()))?;
        Ok(ClopenSet::from_intervals(ivs))
    }
}
