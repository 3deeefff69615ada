use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An exact binary fraction `m * 2^e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    m: BigInt,
    e: i64,
}

fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

fn div_dir(n: &BigInt, d: &BigInt, up: bool) -> BigInt {
    if up {
        -((-n).div_floor(d))
    } else {
        n.div_floor(d)
    }
}

impl Dyadic {
    pub fn new(m: BigInt, e: i64) -> Self {
        Dyadic { m, e }
    }

    pub fn zero() -> Self {
        Dyadic { m: BigInt::zero(), e: 0 }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { m: BigInt::from(v), e: 0 }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Dyadic { m: v, e: 0 }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.m
    }

    pub fn exponent(&self) -> i64 {
        self.e
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.m.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Upper bound on log2 |self|, i.e. |self| < 2^top().
    pub fn top(&self) -> i64 {
        self.m.bits() as i64 + self.e
    }

    /// Round to `prec` significant bits, towards +inf when `up`, else towards -inf.
    pub fn round(self, prec: u32, up: bool) -> Self {
        let bits = self.m.bits();
        if bits <= prec as u64 {
            return self;
        }
        let k = bits - prec as u64;
        let m = div_dir(&self.m, &pow2(k), up);
        Dyadic { m, e: self.e + k as i64 }
    }

    pub fn neg(&self) -> Self {
        Dyadic { m: -&self.m, e: self.e }
    }

    pub fn abs(&self) -> Self {
        Dyadic { m: self.m.abs(), e: self.e }
    }

    /// Multiply by 2^k exactly.
    pub fn shl(&self, k: i64) -> Self {
        Dyadic { m: self.m.clone(), e: self.e + k }
    }

    pub fn add(&self, o: &Dyadic) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &o.m << (o.e - e) as u64;
        Dyadic { m: a + b, e }
    }

    pub fn sub(&self, o: &Dyadic) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Dyadic) -> Self {
        Dyadic { m: &self.m * &o.m, e: self.e + o.e }
    }

    /// Directed quotient n/d rounded to `prec` significant bits.
    pub fn from_ratio(n: &BigInt, d: &BigInt, prec: u32, up: bool) -> Self {
        assert!(!d.is_zero(), "division by zero");
        let (n, d) = if d.is_negative() { (-n, -d) } else { (n.clone(), d.clone()) };
        if n.is_zero() {
            return Dyadic::zero();
        }
        let s = prec as i64 + 2 + d.bits() as i64 - n.bits() as i64;
        let q = if s >= 0 {
            div_dir(&(n << s as u64), &d, up)
        } else {
            div_dir(&n, &(d << (-s) as u64), up)
        };
        Dyadic { m: q, e: -s }.round(prec, up)
    }

    pub fn from_rational(q: &BigRational, prec: u32, up: bool) -> Self {
        Dyadic::from_ratio(q.numer(), q.denom(), prec, up)
    }

    pub fn div(&self, o: &Dyadic, prec: u32, up: bool) -> Self {
        let q = Dyadic::from_ratio(&self.m, &o.m, prec, up);
        Dyadic { m: q.m, e: q.e + self.e - o.e }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.e >= 0 {
            BigRational::from_integer(&self.m << self.e as u64)
        } else {
            BigRational::new(self.m.clone(), pow2((-self.e) as u64))
        }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.m.bits() as i64;
        let shift = (bits - 60).max(0);
        let m = if shift > 0 { &self.m >> shift as u64 } else { self.m.clone() };
        let mf: f64 = m.to_string().parse().unwrap_or(0.0);
        mf * 2f64.powi((self.e + shift) as i32)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        self.sub(o).m.sign().cmp(&Sign::NoSign)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_directed() {
        let x = Dyadic::from_ratio(&BigInt::from(1), &BigInt::from(3), 20, false);
        let y = Dyadic::from_ratio(&BigInt::from(1), &BigInt::from(3), 20, true);
        let third = BigRational::new(1.into(), 3.into());
        assert!(x.to_rational() < third);
        assert!(y.to_rational() > third);
        assert!(y.sub(&x).to_rational() < BigRational::new(1.into(), (1i64 << 19).into()));
    }

    #[test]
    fn negative_rounding() {
        let x = Dyadic::from_int(-7).round(2, false);
        let y = Dyadic::from_int(-7).round(2, true);
        assert_eq!(x.to_rational(), BigRational::from_integer((-8).into()));
        assert_eq!(y.to_rational(), BigRational::from_integer((-6).into()));
    }

    #[test]
    fn ordering_and_add() {
        let a = Dyadic::new(3.into(), -2);
        let b = Dyadic::new(1.into(), 0);
        assert!(a < b);
        assert_eq!(a.add(&b).to_rational(), BigRational::new(7.into(), 4.into()));
        assert!((a.to_f64() - 0.75).abs() < 1e-15);
    }
}
