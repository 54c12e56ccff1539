use std::collections::BTreeMap;

use crate::error::PlainError;
use crate::families::ceil_log2;

/// Codes the strings enumerated at level `n` by their ordinal number,
/// written with `n + ceil(log2 c)` bits; at most `c 2^n` strings fit.
#[derive(Debug, Clone)]
pub struct OrdinalEncoder {
    n: u32,
    c: u64,
    codes: BTreeMap<u64, u128>,
    items: Vec<u64>,
}

impl OrdinalEncoder {
    pub fn new(n: u32, c: u64) -> Result<Self, PlainError> {
        if c == 0 || n as u64 + ceil_log2(c) as u64 > 120 {
            return Err(PlainError::InvalidParameters(format!("n = {n}, c = {c}")));
        }
        Ok(OrdinalEncoder { n, c, codes: BTreeMap::new(), items: Vec::new() })
    }

    pub fn width(&self) -> u32 {
        self.n + ceil_log2(self.c)
    }

    pub fn capacity(&self) -> u128 {
        (self.c as u128) << self.n
    }

    /// Code of the next enumerated `y`; repeats keep their first code.
    pub fn push(&mut self, y: u64) -> Result<String, PlainError> {
        if let Some(&k) = self.codes.get(&y) {
            return Ok(self.format(k));
        }
        let k = self.items.len() as u128;
        if k >= self.capacity() {
            return Err(PlainError::CapacityExceeded { capacity: self.capacity() });
        }
        self.codes.insert(y, k);
        self.items.push(y);
        Ok(self.format(k))
    }

    pub fn code_of(&self, y: u64) -> Option<String> {
        self.codes.get(&y).map(|&k| self.format(k))
    }

    fn format(&self, k: u128) -> String {
        let w = self.width() as usize;
        if w == 0 {
            String::new()
        } else {
            format!("{k:0w$b}")
        }
    }

    /// Level and ordinal of a code: the level is its length less
    /// `ceil(log2 c)`.
    pub fn decode(&self, code: &str) -> Option<(u32, u128)> {
        let extra = ceil_log2(self.c) as usize;
        let n = code.len().checked_sub(extra)? as u32;
        if code.is_empty() {
            return Some((n, 0));
        }
        let k = u128::from_str_radix(code, 2).ok()?;
        Some((n, k))
    }

    /// The string a code stands for.
    pub fn lookup(&self, code: &str) -> Option<u64> {
        let (n, k) = self.decode(code)?;
        if n != self.n {
            return None;
        }
        self.items.get(usize::try_from(k).ok()?).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let mut e = OrdinalEncoder::new(2, 1).unwrap();
        e.push(7).unwrap();
        e.push(3).unwrap();
        assert_eq!(e.push(11).unwrap(), "10");
        assert_eq!(e.push(3).unwrap(), "01");
        assert_eq!(e.lookup("10"), Some(11));
        let mut e = OrdinalEncoder::new(1, 2).unwrap();
        assert_eq!(e.width(), 2);
        for y in 0..4 {
            e.push(y * 5).unwrap();
        }
        assert!(matches!(e.push(99), Err(PlainError::CapacityExceeded { capacity: 4 })));
        assert_eq!(e.decode("11"), Some((1, 3)));
    }
}
