use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::PlainError;

/// Online proper edge coloring, one independent graph per level. At level
/// `n` every vertex has degree below `2^n`, so the least color free at both
/// endpoints fits in `n + 1` bits.
#[derive(Debug, Clone, Default)]
pub struct EdgeColoring {
    used: BTreeMap<(u32, u64), BTreeSet<u64>>,
    partner: BTreeMap<(u32, u64, u64), u64>,
    colors: BTreeMap<(u32, u64, u64), u64>,
    order: Vec<(u32, u64, u64)>,
}

impl EdgeColoring {
    pub fn new() -> Self {
        Self::default()
    }

    /// Colors edge `u-v` at `level`; an edge seen before keeps its color.
    pub fn add(&mut self, level: u32, u: u64, v: u64) -> Result<u64, PlainError> {
        if level >= 63 {
            return Err(PlainError::InvalidParameters(format!("level {level}")));
        }
        if u == v {
            return Err(PlainError::InvalidParameters("loops are not edges".into()));
        }
        let key = (level, u.min(v), u.max(v));
        if let Some(&c) = self.colors.get(&key) {
            return Ok(c);
        }
        let limit = (1usize << level) - 1;
        for x in [u, v] {
            if self.used.get(&(level, x)).map_or(0, |s| s.len()) >= limit {
                return Err(PlainError::DegreePromiseViolated { level, vertex: x });
            }
        }
        let empty = BTreeSet::new();
        let a = self.used.get(&(level, u)).unwrap_or(&empty);
        let b = self.used.get(&(level, v)).unwrap_or(&empty);
        let c = (0..).find(|c| !a.contains(c) && !b.contains(c)).expect("unbounded");
        debug_assert!(c < 1 << (level + 1));
        self.used.entry((level, u)).or_default().insert(c);
        self.used.entry((level, v)).or_default().insert(c);
        self.partner.insert((level, c, u), v);
        self.partner.insert((level, c, v), u);
        self.colors.insert(key, c);
        self.order.push(key);
        Ok(c)
    }

    pub fn color(&self, level: u32, u: u64, v: u64) -> Option<u64> {
        self.colors.get(&(level, u.min(v), u.max(v))).copied()
    }

    /// The color as an `(n+1)`-bit string.
    pub fn color_bits(&self, level: u32, u: u64, v: u64) -> Option<String> {
        self.color(level, u, v).map(|c| format!("{c:0width$b}", width = level as usize + 1))
    }

    /// The vertex joined to `x` by the edge of color `c` at `level`.
    pub fn partner(&self, level: u32, color: u64, x: u64) -> Option<u64> {
        self.partner.get(&(level, color, x)).copied()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// One `level u v color` line per edge in arrival order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(l, u, v) in &self.order {
            let _ = writeln!(out, "{l}\t{u}\t{v}\t{}", self.color_bits(l, u, v).expect("colored"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_and_single_edge() {
        let mut c = EdgeColoring::new();
        c.add(1, 0, 1).unwrap();
        c.add(1, 1, 2).unwrap_err();
        let mut c = EdgeColoring::new();
        assert_eq!(c.add(2, 0, 1).unwrap(), 0);
        assert_eq!(c.add(2, 1, 2).unwrap(), 1);
        assert_eq!(c.color_bits(2, 0, 1).unwrap(), "000");
        assert_eq!(c.color_bits(2, 2, 1).unwrap(), "001");
        assert_eq!(c.partner(2, 1, 2), Some(1));
        assert_eq!(c.partner(2, 0, 2), None);
    }

    #[test]
    fn star_uses_distinct_colors() {
        let mut c = EdgeColoring::new();
        for leaf in 1..8 {
            c.add(3, 0, leaf).unwrap();
        }
        let colors: BTreeSet<u64> = (1..8).map(|l| c.color(3, 0, l).unwrap()).collect();
        assert_eq!(colors.len(), 7);
        assert!(colors.iter().all(|&x| x < 16));
        assert!(matches!(c.add(3, 0, 8), Err(PlainError::DegreePromiseViolated { level: 3, vertex: 0 })));
    }
}
