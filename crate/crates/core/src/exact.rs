//! Exact integer and rational helpers shared by the modules.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn rat_from_uint(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v.clone()))
}

pub fn upow(b: u64, e: u32) -> BigUint {
    BigUint::from(b).pow(e)
}

/// q^e for integer e (q nonzero when e < 0).
pub fn rat_powi(q: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        Pow::pow(q, e as u64)
    } else {
        Pow::pow(q.recip(), (-e) as u64)
    }
}

/// Exact k-th root of a nonnegative integer, if it exists.
pub fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if Pow::pow(&r, k) == *n {
        Some(r)
    } else {
        None
    }
}

/// q^e for rational e when the result is rational.
pub fn rat_pow_exact(q: &BigRational, e: &BigRational) -> Option<BigRational> {
    if q.is_zero() {
        return if e.is_positive() { Some(BigRational::zero()) } else { None };
    }
    if q.is_negative() {
        return None;
    }
    let k = e.denom().to_u32()?;
    let p = e.numer().to_i64()?;
    let n = exact_root(q.numer(), k)?;
    let d = exact_root(q.denom(), k)?;
    Some(rat_powi(&BigRational::new(n, d), p))
}

/// Smallest c with n = c^i; returns (c, i).
pub fn perfect_power_base(n: u64) -> (u64, u32) {
    if n < 4 {
        return (n, 1);
    }
    let mut best = (n, 1);
    let mut i = 2u32;
    while i < 64 && (1u64 << i) <= n {
        let c = (n as f64).powf(1.0 / i as f64).round() as u64;
        for cand in c.saturating_sub(1)..=c + 1 {
            if cand >= 2 && cand.checked_pow(i) == Some(n) && cand < best.0 {
                best = (cand, i);
            }
        }
        i += 1;
    }
    best
}

/// Largest k with a^k <= x, for a >= 2 and x >= 1.
pub fn floor_log(a: u64, x: &BigUint) -> u64 {
    assert!(a >= 2 && !x.is_zero());
    let a = BigUint::from(a);
    let mut k = 0u64;
    let mut p = BigUint::one();
    loop {
        let next = &p * &a;
        if &next > x {
            return k;
        }
        p = next;
        k += 1;
    }
}

/// Floor of n*log_a(b), i.e. the largest k with a^k <= b^n.
pub fn floor_n_log(a: u64, b: u64, n: u32) -> u64 {
    floor_log(a, &upow(b, n))
}

pub fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        if f.is_empty() || !f.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = i.starts_with('-');
        let i: BigInt = if i.is_empty() || i == "-" { BigInt::zero() } else { i.parse().map_err(|_| bad())? };
        let scale = Pow::pow(&BigInt::from(10), f.len() as u32);
        let f: BigInt = f.parse().map_err(|_| bad())?;
        let frac = BigRational::new(f, scale);
        let whole = BigRational::from_integer(i.abs());
        let v = whole + frac;
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Decimal string of q with `digits` significant digits, rounded down or up.
pub fn fmt_decimal(q: &BigRational, digits: u32, up: bool) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let neg = q.is_negative();
    let a = q.abs();
    // e = floor(log10 a)
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let ten = BigRational::from_integer(10.into());
    loop {
        let p = rat_powi(&ten, e);
        if p > a {
            e -= 1;
        } else if rat_powi(&ten, e + 1) <= a {
            e += 1;
        } else {
            break;
        }
    }
    let shift = digits as i64 - 1 - e;
    let scaled = &a * rat_powi(&ten, shift);
    // round magnitude; direction flips for negatives
    let toward_up = up != neg;
    let m: BigInt = if toward_up { scaled.ceil().to_integer() } else { scaled.floor().to_integer() };
    let mut s = m.to_string();
    // ceil may carry into an extra digit
    let mut e = e;
    if s.len() as u32 > digits {
        e += 1;
        s.pop();
    }
    let body = if (-6..=20).contains(&e) {
        if e >= 0 {
            let int_len = (e + 1) as usize;
            if s.len() <= int_len {
                format!("{}{}", s, "0".repeat(int_len - s.len()))
            } else {
                let (i, f) = s.split_at(int_len);
                let f = f.trim_end_matches('0');
                if f.is_empty() { i.to_string() } else { format!("{i}.{f}") }
            }
        } else {
            let f = format!("{}{}", "0".repeat((-e - 1) as usize), s);
            let f = f.trim_end_matches('0');
            format!("0.{f}")
        }
    } else {
        let (i, f) = s.split_at(1);
        let f = f.trim_end_matches('0');
        if f.is_empty() { format!("{i}e{e}") } else { format!("{i}.{f}e{e}") }
    };
    if neg { format!("-{body}") } else { body }
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Integer part helper for gcd-free lcm of exponent denominators.
pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_and_powers() {
        assert_eq!(rat_pow_exact(&rat(8, 27), &rat(1, 3)), Some(rat(2, 3)));
        assert_eq!(rat_pow_exact(&rat(8, 1), &rat(-2, 3)), Some(rat(1, 4)));
        assert_eq!(rat_pow_exact(&rat(2, 1), &rat(1, 2)), None);
        assert_eq!(perfect_power_base(64), (2, 6));
        assert_eq!(perfect_power_base(9), (3, 2));
        assert_eq!(perfect_power_base(12), (12, 1));
    }

    #[test]
    fn floors() {
        assert_eq!(floor_n_log(2, 9, 10), 31);
        assert_eq!(floor_n_log(2, 3, 3), 4);
        assert_eq!(floor_n_log(2, 4, 5), 10);
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("1.5").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!(fmt_decimal(&rat(1, 3), 5, false), "0.33333");
        assert_eq!(fmt_decimal(&rat(1, 3), 5, true), "0.33334");
        assert_eq!(fmt_decimal(&rat(-1, 3), 3, false), "-0.334");
        assert_eq!(fmt_decimal(&rat(99999, 1), 3, true), "100000");
        assert_eq!(fmt_decimal(&rat(1, 10_000_000_000), 3, false), "1e-10");
        assert_eq!(fmt_decimal(&rat(5, 2), 10, false), "2.5");
        assert_eq!(fmt_rational(&rat(6, 3)), "2");
        assert_eq!(fmt_rational(&rat(3, 6)), "1/2");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
                let q = rat(n, d);
                prop_assert_eq!(parse_rational(&fmt_rational(&q)).unwrap(), q);
            }

            #[test]
            fn floor_log_by_search(a in 2u64..6, b in 2u64..30, n in 0u32..25) {
                // largest k with a^k <= b^n
                let target = upow(b, n);
                let k = (0u32..).take_while(|k| upow(a, *k) <= target).last().unwrap();
                prop_assert_eq!(floor_n_log(a, b, n), k as u64);
            }
        }
    }
}
