use std::fmt::Write as _;

use crate::error::PlainError;

/// Strings agreeing with an `n`-bit string outside its first `k` and last
/// `l` positions, over all `k + l <= m`; the count does not depend on the
/// string. A prefix pattern whose last change is at position `k - 1` can
/// be completed in `2^(k-1)` ways.
pub fn prefix_suffix_ball(n: u32, m: u32) -> Result<u128, PlainError> {
    check(n, m)?;
    let f = |k: u32| if k == 0 { 1u128 } else { 1u128 << (k - 1) };
    let mut total = 0;
    for k in 0..=m {
        for l in 0..=m - k {
            total += f(k) * f(l);
        }
    }
    Ok(total)
}

/// Strings agreeing with an `n`-bit string outside its first `m` positions.
pub fn single_sided_ball(n: u32, m: u32) -> Result<u128, PlainError> {
    check(n, m)?;
    Ok(1u128 << m)
}

fn check(n: u32, m: u32) -> Result<(), PlainError> {
    if n > 64 {
        return Err(PlainError::InvalidParameters(format!("n = {n} exceeds 64")));
    }
    if 2 * m > n {
        return Err(PlainError::OverlapRegime { m, half: n / 2 });
    }
    Ok(())
}

/// The members of the ball around `x` (bit 0 is the first position),
/// in increasing order.
pub fn prefix_suffix_members(x: u64, n: u32, m: u32) -> Result<Vec<u64>, PlainError> {
    check(n, m)?;
    if n > 40 {
        return Err(PlainError::InvalidParameters("enumeration needs n <= 40".into()));
    }
    let mut out = Vec::new();
    for k in 0..=m {
        let l = m - k;
        for pre in 0..1u64 << k {
            for suf in 0..1u64 << l {
                let diff = pre | suf << (n - l);
                out.push(x ^ diff);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `n,m,count` lines for each `m`.
pub fn ball_csv(n: u32, ms: impl IntoIterator<Item = u32>) -> Result<String, PlainError> {
    let mut out = String::from("n,m,count,single_sided\n");
    for m in ms {
        let _ = writeln!(out, "{n},{m},{},{}", prefix_suffix_ball(n, m)?, single_sided_ball(n, m)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(prefix_suffix_ball(8, 0).unwrap(), 1);
        assert_eq!(prefix_suffix_ball(8, 1).unwrap(), 3);
        assert_eq!(prefix_suffix_ball(8, 4).unwrap(), 48);
        assert_eq!(prefix_suffix_ball(24, 8).unwrap(), 1280);
        assert!(matches!(prefix_suffix_ball(8, 5), Err(PlainError::OverlapRegime { .. })));
        assert_eq!(prefix_suffix_members(0b1010_0101, 8, 2).unwrap().len(), 8);
    }
}
