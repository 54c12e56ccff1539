//! Randomized families used by Bob's restricted-game strategy, each built by
//! sampling and then verified exactly.
//!
//! A coloring family assigns every string a word over `r` colors of length
//! `ell`; `v[a]` is the set of positions of `v` carrying color `a`. A
//! dominance family assigns every string an `s`-bit pattern.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("no valid family after {attempts} attempts")]
    RetryLimitExceeded { attempts: u32 },
    #[error("invalid family parameters: {0}")]
    InvalidParameters(String),
}

/// Bitset popcount of `a & b` over equal-length word slices.
pub fn and_count(a: &[u64], b: &[u64]) -> u64 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { and_count_popcnt(a, b) };
        }
    }
    and_count_plain(a, b)
}

fn and_count_plain(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "popcnt")]
unsafe fn and_count_popcnt(a: &[u64], b: &[u64]) -> u64 {
    and_count_plain(a, b)
}

fn popcount(a: &[u64]) -> u64 {
    a.iter().map(|x| x.count_ones() as u64).sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringParams {
    /// String length of the game.
    pub n: u32,
    /// The family has `2^m` members.
    pub m: u32,
    /// Number of colors.
    pub r: usize,
    /// Word length (number of blocks).
    pub ell: usize,
    /// Bound on the monitor's count.
    pub k_bound: u64,
}

impl ColoringParams {
    pub fn new(n: u32, m: u32, r: usize, ell: usize) -> Self {
        ColoringParams { n, m, r, ell, k_bound: 64 * (r as u64) * (r as u64) }
    }

    pub fn size(&self) -> usize {
        1usize << self.m
    }

    fn check(&self) -> Result<(), FamilyError> {
        if self.r < 2 || self.r > 36 {
            return Err(FamilyError::InvalidParameters("need 2 <= r <= 36".into()));
        }
        if self.ell == 0 || self.m > 20 {
            return Err(FamilyError::InvalidParameters("bad ell or m".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringFamily {
    pub params: ColoringParams,
    pub seed: u64,
    pub attempts: u32,
    symbols: Vec<u8>,
    words: usize,
    bits: Vec<u64>,
    class_sizes: Vec<u64>,
}

impl ColoringFamily {
    /// Samples uniform words until the pairwise overlap bounds hold.
    pub fn build(params: ColoringParams, seed: u64, max_attempts: u32) -> Result<Self, FamilyError> {
        params.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for attempt in 1..=max_attempts {
            let total = params.size() * params.ell;
            let symbols: Vec<u8> = (0..total).map(|_| rng.gen_range(0..params.r) as u8).collect();
            let fam = Self::from_symbols(params.clone(), seed, attempt, symbols)?;
            if fam.first_condition_violation().is_none() {
                return Ok(fam);
            }
        }
        Err(FamilyError::RetryLimitExceeded { attempts: max_attempts })
    }

    pub fn from_symbols(
        params: ColoringParams,
        seed: u64,
        attempts: u32,
        symbols: Vec<u8>,
    ) -> Result<Self, FamilyError> {
        params.check()?;
        if symbols.len() != params.size() * params.ell {
            return Err(FamilyError::InvalidParameters("symbol count mismatch".into()));
        }
        if symbols.iter().any(|&s| s as usize >= params.r) {
            return Err(FamilyError::InvalidParameters("symbol out of range".into()));
        }
        let words = params.ell.div_ceil(64);
        let mut bits = vec![0u64; params.size() * params.r * words];
        for v in 0..params.size() {
            for i in 0..params.ell {
                let a = symbols[v * params.ell + i] as usize;
                bits[(v * params.r + a) * words + i / 64] |= 1 << (i % 64);
            }
        }
        let class_sizes = bits.chunks(words).map(popcount).collect();
        Ok(ColoringFamily { params, seed, attempts, symbols, words, bits, class_sizes })
    }

    pub fn len(&self) -> usize {
        self.params.size()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn color(&self, v: usize, i: usize) -> u8 {
        self.symbols[v * self.params.ell + i]
    }

    pub fn word(&self, v: usize) -> &[u8] {
        &self.symbols[v * self.params.ell..(v + 1) * self.params.ell]
    }

    /// Bitset of `v[a]`.
    pub fn class(&self, v: usize, a: usize) -> &[u64] {
        let off = (v * self.params.r + a) * self.words;
        &self.bits[off..off + self.words]
    }

    pub fn class_size(&self, v: usize, a: usize) -> u64 {
        self.class_sizes[v * self.params.r + a]
    }

    /// Positions of `v[a]` in increasing order.
    pub fn class_positions(&self, v: usize, a: usize) -> Vec<usize> {
        (0..self.params.ell).filter(|&i| self.color(v, i) as usize == a).collect()
    }

    /// `|v[a] ∩ w[b]|` for all `a, b`, row-major.
    pub fn overlap_matrix(&self, v: usize, w: usize) -> Vec<u64> {
        let r = self.params.r;
        let mut m = vec![0u64; r * r];
        for a in 0..r - 1 {
            let mut row = 0;
            for b in 0..r - 1 {
                let c = and_count(self.class(v, a), self.class(w, b));
                m[a * r + b] = c;
                row += c;
            }
            m[a * r + r - 1] = self.class_size(v, a) - row;
        }
        for b in 0..r {
            let col: u64 = (0..r - 1).map(|a| m[a * r + b]).sum();
            m[(r - 1) * r + b] = self.class_size(w, b) - col;
        }
        m
    }

    /// First `(v, a, w, b, count)` with `v != w` whose overlap falls outside
    /// `[ell/(2r^2), 2 ell/r^2]`.
    pub fn first_condition_violation(&self) -> Option<(usize, usize, usize, usize, u64)> {
        let r = self.params.r;
        let rr = (r * r) as u64;
        let ell = self.params.ell as u64;
        for v in 0..self.len() {
            for w in v + 1..self.len() {
                let m = self.overlap_matrix(v, w);
                for a in 0..r {
                    for b in 0..r {
                        let c = m[a * r + b];
                        if 2 * rr * c < ell || rr * c > 2 * ell {
                            return Some((v, a, w, b, c));
                        }
                    }
                }
            }
        }
        None
    }

    /// Number of pairs `(w, b)`, `w` ranging over the whole family, with
    /// `v[a] ∩ w[b]` nonempty and `|I ∩ w[b]| >= |v[a] ∩ w[b]| / 2`, where
    /// `I ⊆ v[a]` is given as a bitset.
    pub fn second_condition_count(&self, v: usize, a: usize, i_set: &[u64]) -> u64 {
        let mut count = 0;
        let va = self.class(v, a);
        for w in 0..self.len() {
            for b in 0..self.params.r {
                let wb = self.class(w, b);
                let full = and_count(va, wb);
                if full > 0 && 2 * and_count(i_set, wb) >= full {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "#coloring n={} m={} r={} ell={} k_bound={} seed={} attempts={}\n",
            p.n, p.m, p.r, p.ell, p.k_bound, self.seed, self.attempts
        );
        for v in 0..self.len() {
            for &s in self.word(v) {
                out.push(char::from_digit(s as u32, 36).expect("r <= 36"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        let kv = header_values(header, "#coloring")?;
        let get = |k: &str| -> Result<u64, ParseError> {
            kv.iter()
                .find(|(a, _)| a == k)
                .and_then(|(_, b)| b.parse().ok())
                .ok_or_else(|| ParseError::Line { line: 1, msg: format!("header lacks {k}") })
        };
        let mut params =
            ColoringParams::new(get("n")? as u32, get("m")? as u32, get("r")? as usize, get("ell")? as usize);
        params.k_bound = get("k_bound")?;
        let mut symbols = Vec::new();
        for (i, line) in lines.enumerate() {
            for ch in line.trim().chars() {
                let d = ch.to_digit(36).ok_or_else(|| ParseError::Line {
                    line: i + 2,
                    msg: format!("bad symbol `{ch}`"),
                })?;
                symbols.push(d as u8);
            }
        }
        Self::from_symbols(params, get("seed")?, get("attempts")? as u32, symbols)
            .map_err(|e| ParseError::Line { line: 0, msg: e.to_string() })
    }
}

fn header_values(header: &str, tag: &str) -> Result<Vec<(String, String)>, ParseError> {
    let mut parts = header.split_whitespace();
    if parts.next() != Some(tag) {
        return Err(ParseError::Line { line: 1, msg: format!("expected `{tag}` header") });
    }
    Ok(parts
        .filter_map(|p| p.split_once('=').map(|(a, b)| (a.to_string(), b.to_string())))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceParams {
    pub n: u32,
    /// The family has `2^m` members.
    pub m: u32,
    /// Pattern length.
    pub s: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceFamily {
    pub params: DominanceParams,
    pub seed: u64,
    pub attempts: u32,
    words: usize,
    patterns: Vec<u64>,
}

impl DominanceFamily {
    /// Samples uniform patterns until every ordered pair `a != b` has at
    /// least `s/8` positions where `a` is 1 and `b` is 0.
    pub fn build(params: DominanceParams, seed: u64, max_attempts: u32) -> Result<Self, FamilyError> {
        if params.s == 0 || params.m > 20 {
            return Err(FamilyError::InvalidParameters("bad s or m".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = params.s.div_ceil(64);
        for attempt in 1..=max_attempts {
            let mut patterns: Vec<u64> = (0..(1usize << params.m) * words).map(|_| rng.gen()).collect();
            let tail = params.s % 64;
            if tail != 0 {
                for v in 0..1usize << params.m {
                    patterns[v * words + words - 1] &= (1u64 << tail) - 1;
                }
            }
            let fam = DominanceFamily { params: params.clone(), seed, attempts: attempt, words, patterns };
            if fam.first_violation().is_none() {
                return Ok(fam);
            }
        }
        Err(FamilyError::RetryLimitExceeded { attempts: max_attempts })
    }

    pub fn from_bits(params: DominanceParams, rows: &[Vec<bool>]) -> Result<Self, FamilyError> {
        let words = params.s.div_ceil(64);
        if rows.len() != 1usize << params.m || rows.iter().any(|r| r.len() != params.s) {
            return Err(FamilyError::InvalidParameters("pattern shape mismatch".into()));
        }
        let mut patterns = vec![0u64; rows.len() * words];
        for (v, row) in rows.iter().enumerate() {
            for (i, &b) in row.iter().enumerate() {
                if b {
                    patterns[v * words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        Ok(DominanceFamily { params, seed: 0, attempts: 0, words, patterns })
    }

    pub fn len(&self) -> usize {
        1usize << self.params.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pattern(&self, v: usize) -> &[u64] {
        &self.patterns[v * self.words..(v + 1) * self.words]
    }

    /// Whether block `i` is dominant (1) for string `v`.
    pub fn dominant(&self, v: usize, i: usize) -> bool {
        self.pattern(v)[i / 64] >> (i % 64) & 1 == 1
    }

    /// `Σ a_i (1 - b_i)` for the patterns of `a` and `b`.
    pub fn dominance(&self, a: usize, b: usize) -> u64 {
        self.pattern(a).iter().zip(self.pattern(b)).map(|(x, y)| (x & !y).count_ones() as u64).sum()
    }

    pub fn first_violation(&self) -> Option<(usize, usize, u64)> {
        let s = self.params.s as u64;
        for a in 0..self.len() {
            for b in 0..self.len() {
                if a != b {
                    let c = self.dominance(a, b);
                    if 8 * c < s {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "#dominance n={} m={} s={} seed={} attempts={}\n",
            p.n, p.m, p.s, self.seed, self.attempts
        );
        for v in 0..self.len() {
            for i in 0..p.s {
                out.push(if self.dominant(v, i) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = text.lines();
        let kv = header_values(lines.next().unwrap_or(""), "#dominance")?;
        let get = |k: &str| -> Result<u64, ParseError> {
            kv.iter()
                .find(|(a, _)| a == k)
                .and_then(|(_, b)| b.parse().ok())
                .ok_or_else(|| ParseError::Line { line: 1, msg: format!("header lacks {k}") })
        };
        let params = DominanceParams { n: get("n")? as u32, m: get("m")? as u32, s: get("s")? as usize };
        let rows: Vec<Vec<bool>> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().chars().map(|c| c == '1').collect())
            .collect();
        let mut fam = Self::from_bits(params, &rows)
            .map_err(|e| ParseError::Line { line: 0, msg: e.to_string() })?;
        fam.seed = get("seed")?;
        fam.attempts = get("attempts")? as u32;
        Ok(fam)
    }
}

/// One checked inequality of a parameter certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertLine {
    pub name: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub lines: Vec<CertLine>,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.lines.iter().all(|l| l.holds)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = writeln!(
                out,
                "{}\t{}\t{} <= {}",
                if l.holds { "ok" } else { "FAIL" },
                l.name,
                l.lhs,
                l.rhs
            );
        }
        out
    }

    pub(crate) fn check(&mut self, name: &'static str, lhs: impl ToString, rhs: impl ToString, holds: bool) {
        self.lines.push(CertLine { name, lhs: lhs.to_string(), rhs: rhs.to_string(), holds });
    }
}

/// `ceil(log2 x)` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Checks the coloring family's hypotheses `m >= 2 + log r` and
/// `ell >= 2^7 r^3 m`.
pub fn coloring_certificate(p: &ColoringParams) -> Certificate {
    let mut c = Certificate { lines: Vec::new() };
    let r = p.r as u64;
    // m >= 2 + log2 r  <=>  2^(m-2) >= r
    c.check("m >= 2 + log r", format!("2^{}", ceil_log2(r) + 2), format!("2^{}", p.m), p.m >= 2 && (1u64 << (p.m - 2)) >= r);
    let need = 128 * r * r * r * p.m as u64;
    c.check("ell >= 2^7 r^3 m", need, p.ell, p.ell as u64 >= need);
    c.check("k_bound = 64 r^2", p.k_bound, 64 * r * r, p.k_bound == 64 * r * r);
    c
}

/// Checks `s >= 64 m` and `2^(2m) exp(-2s/64) < 1` (i.e. `2s/64 > 2m ln 2`).
pub fn dominance_certificate(p: &DominanceParams) -> Certificate {
    let mut c = Certificate { lines: Vec::new() };
    c.check("s >= 64 m", 64 * p.m as u64, p.s, p.s as u64 >= 64 * p.m as u64);
    let exponent = 2.0 * p.m as f64 * std::f64::consts::LN_2 - 2.0 * p.s as f64 / 64.0;
    c.check("2^(2m) exp(-2s/64) < 1", format!("exp({exponent:.3})"), 1, exponent < 0.0);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_coloring_family_is_verified() {
        let p = ColoringParams::new(4, 2, 2, 128 * 8 * 2);
        let f = ColoringFamily::build(p, 1, 5).unwrap();
        assert_eq!(f.len(), 4);
        let ell = f.params.ell as u64;
        for v in 0..4 {
            for w in 0..4 {
                if v == w {
                    continue;
                }
                let m = f.overlap_matrix(v, w);
                for c in m {
                    assert!(c * 8 >= ell && c * 2 <= ell);
                }
            }
        }
    }

    #[test]
    fn overlap_matrix_matches_direct_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let syms = (0..800).map(|_| rng.gen_range(0..3u8)).collect();
        let f = ColoringFamily::from_symbols(ColoringParams::new(4, 2, 3, 200), 3, 1, syms).unwrap();
        for (v, w) in [(0, 1), (2, 3), (1, 1)] {
            let m = f.overlap_matrix(v, w);
            for a in 0..3 {
                for b in 0..3 {
                    let direct = (0..200)
                        .filter(|&i| f.color(v, i) as usize == a && f.color(w, i) as usize == b)
                        .count() as u64;
                    assert_eq!(m[a * 3 + b], direct);
                }
            }
        }
    }

    #[test]
    fn monitor_edge_cases() {
        let f = ColoringFamily::build(ColoringParams::new(4, 2, 2, 2048), 4, 5).unwrap();
        let empty = vec![0u64; 2048 / 64];
        assert_eq!(f.second_condition_count(0, 0, &empty), 0);
        let single =
            ColoringFamily::from_symbols(ColoringParams::new(1, 0, 2, 8), 0, 1, vec![0, 0, 0, 0, 1, 1, 1, 1])
                .unwrap();
        // I = {0, 1} is half of v[0] = {0, 1, 2, 3}
        assert_eq!(single.second_condition_count(0, 0, &[0b11]), 1);
        assert_eq!(single.second_condition_count(0, 0, &[0b1]), 0);
    }

    #[test]
    fn dominance_family_checks_both_orders() {
        let p = DominanceParams { n: 1, m: 1, s: 64 };
        let f = DominanceFamily::build(p.clone(), 11, 10).unwrap();
        assert!(f.dominance(0, 1) >= 8 && f.dominance(1, 0) >= 8);
        let ones = vec![true; 64];
        let zeros = vec![false; 64];
        let g = DominanceFamily::from_bits(p, &[ones, zeros]).unwrap();
        assert_eq!(g.dominance(0, 1), 64);
        assert_eq!(g.dominance(1, 0), 0);
        assert_eq!(g.first_violation(), Some((1, 0, 0)));
        assert_eq!(g.dominance(0, 0), 0);
    }

    #[test]
    fn text_round_trips() {
        let f = ColoringFamily::build(ColoringParams::new(4, 2, 2, 2048), 4, 5).unwrap();
        assert_eq!(ColoringFamily::parse(&f.to_text()).unwrap(), f);
        let g = DominanceFamily::build(DominanceParams { n: 3, m: 3, s: 200 }, 2, 5).unwrap();
        assert_eq!(DominanceFamily::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn certificates() {
        assert!(coloring_certificate(&ColoringParams::new(32, 8, 6, 1 << 18)).holds());
        assert!(!coloring_certificate(&ColoringParams::new(32, 8, 6, 1 << 17)).holds());
        assert!(dominance_certificate(&DominanceParams { n: 32, m: 8, s: 512 }).holds());
        assert!(!dominance_certificate(&DominanceParams { n: 32, m: 8, s: 256 }).holds());
        assert_eq!(ceil_log2(6), 3);
        assert_eq!(ceil_log2(8), 3);
    }
}
