//! Exact nonnegative dyadic rationals.
//!
//! Every weight, request size and measure in the crate is a number of the
//! form `numerator / 2^exponent`. Values are kept in canonical form (odd
//! numerator, or zero with exponent zero) so that structural equality is
//! value equality and the textual encoding is unique.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::ParseError;

/// A nonnegative rational `numerator / 2^exponent`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { num: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigUint::one(), exp: 0 }
    }

    /// Builds `num / 2^exp` and canonicalizes.
    pub fn new(num: BigUint, exp: u64) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn from_parts(num: u64, exp: u64) -> Self {
        Self::new(BigUint::from(num), exp)
    }

    pub fn from_integer(n: u64) -> Self {
        Self::new(BigUint::from(n), 0)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u64) -> Self {
        Dyadic { num: BigUint::one(), exp: k }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp);
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True for `2^-k`, `k >= 0`.
    pub fn is_neg_power_of_two(&self) -> bool {
        self.num.is_one()
    }

    /// For `2^-k` returns `k`.
    pub fn neg_log2(&self) -> Option<u64> {
        self.is_neg_power_of_two().then_some(self.exp)
    }

    /// Smallest `k` with `2^-k <= self`, i.e. the exponent of the largest
    /// negative power of two not exceeding the value. `None` for zero or
    /// values above one.
    pub fn floor_neg_log2(&self) -> Option<u64> {
        if self.is_zero() || *self > Dyadic::one() {
            return None;
        }
        // value = num / 2^exp with num odd; 2^-k <= num/2^exp  <=>  2^(exp-k) <= num
        let bits = self.num.bits(); // 2^(bits-1) <= num < 2^bits
        Some(self.exp - (bits - 1))
    }

    /// Largest `k` with `2^-k >= self` (ceiling in size); `None` for zero or
    /// values above one.
    pub fn ceil_neg_log2(&self) -> Option<u64> {
        let k = self.floor_neg_log2()?;
        if self.is_neg_power_of_two() {
            Some(k)
        } else {
            Some(k - 1)
        }
    }

    pub fn checked_sub(&self, other: &Dyadic) -> Option<Dyadic> {
        let e = self.exp.max(other.exp);
        let a = self.scaled(e);
        let b = other.scaled(e);
        if a < b {
            None
        } else {
            Some(Dyadic::new(a - b, e))
        }
    }

    /// Saturating difference; zero when `other >= self`.
    pub fn saturating_sub(&self, other: &Dyadic) -> Dyadic {
        self.checked_sub(other).unwrap_or_else(Dyadic::zero)
    }

    /// Numerator of the value at denominator `2^e` (`e >= exponent`).
    pub fn scaled(&self, e: u64) -> BigUint {
        debug_assert!(e >= self.exp);
        &self.num << (e - self.exp)
    }

    /// `self / 2^k`.
    pub fn shr(&self, k: u64) -> Dyadic {
        Dyadic::new(self.num.clone(), self.exp + k)
    }

    /// `self * 2^k`.
    pub fn shl(&self, k: u64) -> Dyadic {
        if k <= self.exp {
            Dyadic::new(self.num.clone(), self.exp - k)
        } else {
            Dyadic::new(&self.num << (k - self.exp), 0)
        }
    }

    pub fn half(&self) -> Dyadic {
        self.shr(1)
    }

    /// `self * n` for an integer `n`.
    pub fn mul_int(&self, n: &BigUint) -> Dyadic {
        Dyadic::new(&self.num * n, self.exp)
    }

    /// `self / other` when the quotient is an integer.
    pub fn div_exact(&self, other: &Dyadic) -> Option<BigUint> {
        if other.is_zero() {
            return None;
        }
        let e = self.exp.max(other.exp);
        let a = self.scaled(e);
        let b = other.scaled(e);
        let (q, r) = num_integer::Integer::div_rem(&a, &b);
        r.is_zero().then_some(q)
    }

    /// True when `self` is an integer multiple of `other`.
    pub fn is_multiple_of(&self, other: &Dyadic) -> bool {
        self.div_exact(other).is_some()
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::INFINITY);
        n * (-(self.exp as f64)).exp2()
    }

    pub fn min(self, other: Dyadic) -> Dyadic {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Dyadic) -> Dyadic {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        self.scaled(e).cmp(&other.scaled(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exp.max(rhs.exp);
        Dyadic::new(self.scaled(e) + rhs.scaled(e), e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl<'a> std::iter::Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        let mut acc = Dyadic::zero();
        for d in iter {
            acc += d;
        }
        acc
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `a/2^b`, `a/b` with `b` a power of two, and plain integers.
impl FromStr for Dyadic {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ParseError::Dyadic(s.to_string());
        let parse_big = |t: &str| t.trim().parse::<BigUint>().map_err(|_| bad());
        match s.split_once('/') {
            None => Ok(Dyadic::new(parse_big(s)?, 0)),
            Some((num, den)) => {
                let num = parse_big(num)?;
                let den = den.trim();
                if let Some(e) = den.strip_prefix("2^") {
                    let e: u64 = e.parse().map_err(|_| bad())?;
                    Ok(Dyadic::new(num, e))
                } else {
                    let den = parse_big(den)?;
                    if den.is_zero() || den.count_ones() != 1 {
                        return Err(bad());
                    }
                    let e = den.bits() - 1;
                    Ok(Dyadic::new(num, e))
                }
            }
        }
    }
}
