//! Certified real arithmetic: outward-rounded dyadic intervals, exact
//! power products with logarithmic exponents, and small expression trees.
//!
//! Comparisons are decided exactly when every exponent is rational and by
//! interval refinement otherwise. An undecided comparison is an error, never
//! a guess.

mod dyadic;
mod interval;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use dyadic::Dyadic;
pub use interval::{exp_point, ln2, ln_point, ln_rational, Interval};

use crate::error::{Error, Result};
use crate::exact::{fmt_decimal, fmt_rational, perfect_power_base, rat_pow_exact, rat_powi};

/// Precision ladder used by refinement loops.
pub const PRECISIONS: [u32; 7] = [64, 128, 256, 512, 1024, 2048, 4096];

/// A real exponent: rational, or `scale * ln(num) / ln(den)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Exponent {
    Rational(BigRational),
    LogRatio { scale: BigRational, num: u64, den: u64 },
}

impl Exponent {
    pub fn rational(q: BigRational) -> Self {
        Exponent::Rational(q)
    }

    pub fn int(v: i64) -> Self {
        Exponent::Rational(BigRational::from_integer(v.into()))
    }

    /// `scale * log_den(num)`, reduced to a rational when num and den share a power base.
    pub fn log_ratio(scale: BigRational, num: u64, den: u64) -> Self {
        assert!(num >= 2 && den >= 2, "log ratio needs arguments >= 2");
        if scale.is_zero() {
            return Exponent::Rational(scale);
        }
        let (cn, i) = perfect_power_base(num);
        let (cd, j) = perfect_power_base(den);
        if cn == cd {
            return Exponent::Rational(scale * BigRational::new(i.into(), j.into()));
        }
        Exponent::LogRatio { scale, num, den }
    }

    /// log_a b.
    pub fn tau(a: u64, b: u64) -> Self {
        Exponent::log_ratio(BigRational::one(), b, a)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Exponent::Rational(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Exponent::Rational(q) if q.is_zero())
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Exponent::Rational(q) => q.is_positive(),
            Exponent::LogRatio { scale, .. } => scale.is_positive(),
        }
    }

    pub fn recip(&self) -> Self {
        match self {
            Exponent::Rational(q) => Exponent::Rational(q.recip()),
            Exponent::LogRatio { scale, num, den } => {
                Exponent::LogRatio { scale: scale.recip(), num: *den, den: *num }
            }
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&BigRational::from_integer((-1).into()))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        match self {
            Exponent::Rational(r) => Exponent::Rational(r * q),
            Exponent::LogRatio { scale, num, den } => Exponent::log_ratio(scale * q, *num, *den),
        }
    }

    /// Product of two exponents when one of them is rational.
    pub fn mul(&self, o: &Exponent) -> Option<Self> {
        match (self, o) {
            (Exponent::Rational(q), e) | (e, Exponent::Rational(q)) => Some(e.scale(q)),
            _ => None,
        }
    }

    /// Sum when both exponents are of the same shape.
    pub fn add(&self, o: &Exponent) -> Option<Self> {
        match (self, o) {
            (Exponent::Rational(p), Exponent::Rational(q)) => Some(Exponent::Rational(p + q)),
            (
                Exponent::LogRatio { scale: s, num: n, den: d },
                Exponent::LogRatio { scale: t, num: m, den: e },
            ) if n == m && d == e => Some(Exponent::log_ratio(s + t, *n, *d)),
            _ => None,
        }
    }

    pub fn enclose(&self, prec: u32) -> Interval {
        match self {
            Exponent::Rational(q) => Interval::from_rational(q, prec),
            Exponent::LogRatio { scale, num, den } => {
                let wp = prec + 8;
                let n = ln_rational(&BigRational::from_integer((*num).into()), wp);
                let d = ln_rational(&BigRational::from_integer((*den).into()), wp);
                let s = Interval::from_rational(scale, wp);
                let v = s.mul(&n, wp).div(&d, wp);
                Interval { lo: v.lo.round(prec, false), hi: v.hi.round(prec, true) }
            }
        }
    }

    /// Certified floor.
    pub fn floor(&self) -> Result<BigInt> {
        match self {
            Exponent::Rational(q) => Ok(q.floor().to_integer()),
            _ => floor_of(|p| self.enclose(p)),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.enclose(64).midpoint_f64()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Rational(q) => write!(f, "{}", fmt_rational(q)),
            Exponent::LogRatio { scale, num, den } => {
                if scale.is_one() {
                    write!(f, "log_{den}({num})")
                } else {
                    write!(f, "{}*log_{den}({num})", fmt_rational(scale))
                }
            }
        }
    }
}

fn floor_of(enc: impl Fn(u32) -> Interval) -> Result<BigInt> {
    for &p in PRECISIONS.iter() {
        let iv = enc(p);
        let lo = iv.lo.to_rational().floor().to_integer();
        let hi = iv.hi.to_rational().floor().to_integer();
        if lo == hi {
            return Ok(lo);
        }
    }
    Err(Error::Undecided(*PRECISIONS.last().unwrap()))
}

/// A nonnegative real `coeff * prod base_i ^ exp_i` with rational bases > 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowProduct {
    coeff: BigRational,
    factors: Vec<(BigRational, Exponent)>,
}

impl PowProduct {
    pub fn zero() -> Self {
        PowProduct { coeff: BigRational::zero(), factors: vec![] }
    }

    pub fn one() -> Self {
        PowProduct::rational(BigRational::one())
    }

    pub fn rational(q: BigRational) -> Self {
        assert!(!q.is_negative(), "power products are nonnegative");
        PowProduct { coeff: q, factors: vec![] }
    }

    pub fn int(v: u64) -> Self {
        PowProduct::rational(BigRational::from_integer(v.into()))
    }

    /// base^e for base >= 0.
    pub fn pow(base: BigRational, e: Exponent) -> Self {
        assert!(!base.is_negative(), "negative base");
        if base.is_zero() {
            return if e.is_zero() { PowProduct::one() } else { PowProduct::zero() };
        }
        PowProduct { coeff: BigRational::one(), factors: vec![(base, e)] }.normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn factors(&self) -> &[(BigRational, Exponent)] {
        &self.factors
    }

    /// The exact value when no irreducible factor remains.
    pub fn exact(&self) -> Option<BigRational> {
        if self.factors.is_empty() || self.coeff.is_zero() {
            Some(self.coeff.clone())
        } else {
            None
        }
    }

    fn normalized(mut self) -> Self {
        if self.coeff.is_zero() {
            self.factors.clear();
            return self;
        }
        let mut pending: Vec<(BigRational, Exponent)> = std::mem::take(&mut self.factors);
        let mut out: Vec<(BigRational, Exponent)> = Vec::new();
        while let Some((base, e)) = pending.pop() {
            if base.is_one() || e.is_zero() {
                continue;
            }
            // keep bases above 1 so that q^e and (1/q)^(-e) merge
            let (base, e) = if base < BigRational::one() { (base.recip(), e.neg()) } else { (base, e) };
            match &e {
                Exponent::Rational(q) => {
                    if q.is_integer() {
                        self.coeff *= rat_powi(&base, q.to_integer().try_into().expect("exponent too large"));
                        continue;
                    }
                    if let Some(v) = rat_pow_exact(&base, q) {
                        self.coeff *= v;
                        continue;
                    }
                }
                Exponent::LogRatio { scale, num, den } => {
                    // den^(log_den num) = num
                    if let Some(k) = log_of_base(&base, *den) {
                        pending.push((BigRational::from_integer((*num).into()), Exponent::Rational(scale * k)));
                        continue;
                    }
                }
            }
            if let Some(slot) = out.iter_mut().find(|(b, x)| *b == base && x.add(&e).is_some()) {
                slot.1 = slot.1.add(&e).unwrap();
                continue;
            }
            out.push((base, e));
        }
        out.retain(|(b, e)| !b.is_one() && !e.is_zero());
        // merged rational exponents may have become integral
        let mut again = false;
        for (_, e) in &out {
            if let Exponent::Rational(q) = e {
                if q.is_integer() {
                    again = true;
                }
            }
        }
        out.sort();
        self.factors = out;
        if again {
            return self.normalized();
        }
        self
    }

    pub fn mul(&self, o: &PowProduct) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(o.factors.iter().cloned());
        PowProduct { coeff: &self.coeff * &o.coeff, factors }.normalized()
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        self.mul(&PowProduct::rational(q.clone()))
    }

    /// self^e, defined when the product of exponents stays representable.
    pub fn powr(&self, e: &Exponent) -> Option<Self> {
        if self.is_zero() {
            return Some(if e.is_zero() { PowProduct::one() } else { PowProduct::zero() });
        }
        let mut factors = vec![(self.coeff.clone(), e.clone())];
        for (b, x) in &self.factors {
            factors.push((b.clone(), x.mul(e)?));
        }
        Some(PowProduct { coeff: BigRational::one(), factors }.normalized())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        self.powr(&Exponent::int(-1)).unwrap()
    }

    /// Enclosure of ln(self); self must be nonzero.
    pub fn ln_enclose(&self, prec: u32) -> Interval {
        assert!(!self.is_zero(), "ln of zero");
        let wp = prec + 8;
        let mut acc = ln_rational(&self.coeff, wp);
        for (b, e) in &self.factors {
            let t = e.enclose(wp).mul(&ln_rational(b, wp), wp);
            acc = acc.add(&t, wp);
        }
        Interval { lo: acc.lo.round(prec, false), hi: acc.hi.round(prec, true) }
    }

    pub fn enclose(&self, prec: u32) -> Interval {
        if let Some(q) = self.exact() {
            return Interval::from_rational(&q, prec);
        }
        let wp = prec + 16;
        let v = self.ln_enclose(wp).exp(wp);
        Interval { lo: v.lo.round(prec, false), hi: v.hi.round(prec, true) }
    }

    pub fn cmp_certified(&self, o: &PowProduct) -> Result<Ordering> {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => return Ok(Ordering::Equal),
            (true, false) => return Ok(Ordering::Less),
            (false, true) => return Ok(Ordering::Greater),
            _ => {}
        }
        let q = self.mul(&o.recip());
        if let Some(v) = q.exact() {
            return Ok(v.cmp(&BigRational::one()));
        }
        if let Some(ord) = q.cmp_one_rational() {
            return Ok(ord);
        }
        for &p in PRECISIONS.iter() {
            let l = q.ln_enclose(p);
            if l.lo.signum() > 0 {
                return Ok(Ordering::Greater);
            }
            if l.hi.signum() < 0 {
                return Ok(Ordering::Less);
            }
        }
        Err(Error::Undecided(*PRECISIONS.last().unwrap()))
    }

    /// Exact comparison with 1 when all exponents are rational.
    fn cmp_one_rational(&self) -> Option<Ordering> {
        let mut l = BigInt::one();
        for (_, e) in &self.factors {
            l = crate::exact::lcm(&l, e.as_rational()?.denom());
        }
        let lq = BigRational::from_integer(l.clone());
        let mut v = rat_powi(&self.coeff, l.clone().try_into().ok()?);
        for (b, e) in &self.factors {
            let k = (e.as_rational()? * &lq).to_integer();
            v *= rat_powi(b, k.try_into().ok()?);
        }
        Some(v.cmp(&BigRational::one()))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut l = crate::exact::to_f64(&self.coeff).ln();
        for (b, e) in &self.factors {
            l += e.to_f64() * crate::exact::to_f64(b).ln();
        }
        l.exp()
    }
}

/// k with base = den^k, when it exists and is rational.
fn log_of_base(base: &BigRational, den: u64) -> Option<BigRational> {
    let (cd, j) = perfect_power_base(den);
    let (n, sign) = if base.is_integer() {
        (base.numer().clone(), 1i64)
    } else if base.numer().is_one() {
        (base.denom().clone(), -1)
    } else {
        return None;
    };
    let n: u64 = n.try_into().ok()?;
    if n < 2 {
        return None;
    }
    let (cb, i) = perfect_power_base(n);
    if cb != cd {
        return None;
    }
    Some(BigRational::new((sign * i as i64).into(), (j as i64).into()))
}

/// A nonnegative-or-signed real built from power products.
#[derive(Clone, Debug)]
pub enum Real {
    Pow(PowProduct),
    /// Signed sum: each term carries a sign flag (true = subtract).
    Sum(Vec<(bool, Real)>),
    Prod(Vec<Real>),
    /// base^e with base >= 0 and e > 0.
    Power(Box<Real>, Exponent),
}

impl From<PowProduct> for Real {
    fn from(p: PowProduct) -> Self {
        Real::Pow(p)
    }
}

impl From<BigRational> for Real {
    fn from(q: BigRational) -> Self {
        if q.is_negative() {
            Real::Sum(vec![(true, Real::Pow(PowProduct::rational(-q)))])
        } else {
            Real::Pow(PowProduct::rational(q))
        }
    }
}

impl Real {
    pub fn rational(q: BigRational) -> Self {
        q.into()
    }

    pub fn exact(&self) -> Option<BigRational> {
        match self {
            Real::Pow(p) => p.exact(),
            Real::Sum(ts) => {
                let mut acc = BigRational::zero();
                for (neg, t) in ts {
                    let v = t.exact()?;
                    if *neg {
                        acc -= v
                    } else {
                        acc += v
                    }
                }
                Some(acc)
            }
            Real::Prod(ts) => {
                let mut acc = BigRational::one();
                for t in ts {
                    acc *= t.exact()?;
                }
                Some(acc)
            }
            Real::Power(b, e) => {
                let v = b.exact()?;
                rat_pow_exact(&v, e.as_rational()?)
            }
        }
    }

    pub fn enclose(&self, prec: u32) -> Interval {
        if let Some(q) = self.exact() {
            return Interval::from_rational(&q, prec);
        }
        let wp = prec + 16;
        let v = match self {
            Real::Pow(p) => p.enclose(wp),
            Real::Sum(ts) => {
                let mut acc = Interval::from_int(0);
                for (neg, t) in ts {
                    let v = t.enclose(wp);
                    acc = if *neg { acc.sub(&v, wp) } else { acc.add(&v, wp) };
                }
                acc
            }
            Real::Prod(ts) => {
                let mut acc = Interval::from_int(1);
                for t in ts {
                    acc = acc.mul(&t.enclose(wp), wp);
                }
                acc
            }
            Real::Power(b, e) => {
                let x = b.enclose(wp + 16);
                let ei = e.enclose(wp);
                if x.hi.signum() <= 0 {
                    Interval::from_int(0)
                } else if x.lo.signum() <= 0 {
                    let top = ei.mul(&Interval::point(x.hi.clone()).ln(wp), wp).exp(wp);
                    Interval { lo: Dyadic::zero(), hi: top.hi }
                } else {
                    ei.mul(&x.ln(wp), wp).exp(wp)
                }
            }
        };
        Interval { lo: v.lo.round(prec, false), hi: v.hi.round(prec, true) }
    }

    pub fn cmp_certified(&self, o: &Real) -> Result<Ordering> {
        if let (Some(a), Some(b)) = (self.exact(), o.exact()) {
            return Ok(a.cmp(&b));
        }
        if let (Real::Pow(a), Real::Pow(b)) = (self, o) {
            return a.cmp_certified(b);
        }
        for &p in PRECISIONS.iter() {
            let a = self.enclose(p);
            let b = o.enclose(p);
            if a.hi < b.lo {
                return Ok(Ordering::Less);
            }
            if a.lo > b.hi {
                return Ok(Ordering::Greater);
            }
        }
        Err(Error::Undecided(*PRECISIONS.last().unwrap()))
    }

    /// Enclosure whose width is at most `tol` times the magnitude (or `tol` absolutely near 0).
    pub fn enclose_to(&self, tol: f64) -> Interval {
        let mut last = self.enclose(PRECISIONS[0]);
        for &p in PRECISIONS.iter() {
            let iv = self.enclose(p);
            let w = iv.width().to_f64();
            let m = iv.lo.to_f64().abs().max(iv.hi.to_f64().abs());
            if w <= tol * m.max(1e-300) || w == 0.0 || (m == 0.0 && w <= tol) {
                return iv;
            }
            last = iv;
        }
        last
    }

    /// "num/den" when exact, else an outward-rounded "[lo,hi]" enclosure.
    pub fn format(&self, tol: f64) -> String {
        if let Some(q) = self.exact() {
            return fmt_rational(&q);
        }
        format_interval(&self.enclose_to(tol))
    }

    pub fn to_f64(&self) -> f64 {
        self.enclose(64).midpoint_f64()
    }
}

pub fn format_interval(iv: &Interval) -> String {
    format!(
        "[{},{}]",
        fmt_decimal(&iv.lo.to_rational(), 17, false),
        fmt_decimal(&iv.hi.to_rational(), 17, true)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn tau_rational_when_powers_align() {
        assert_eq!(Exponent::tau(2, 4), Exponent::int(2));
        assert_eq!(Exponent::tau(4, 8), Exponent::rational(rat(3, 2)));
        assert_eq!(Exponent::tau(3, 3), Exponent::int(1));
        assert!(Exponent::tau(2, 3).as_rational().is_none());
    }

    #[test]
    fn tau_enclosure_and_floor() {
        let t = Exponent::tau(2, 3);
        let iv = t.enclose(100);
        assert!(iv.lo.to_f64() <= 3f64.log2() && 3f64.log2() <= iv.hi.to_f64());
        assert_eq!(t.scale(&rat(10, 1)).floor().unwrap(), 15.into());
        // n(2tau - 1) for n = 3 is 6.5..
        let two_tau = t.scale(&rat(6, 1));
        assert_eq!(two_tau.floor().unwrap(), 9.into());
    }

    #[test]
    fn pow_products_cancel() {
        let t = Exponent::tau(2, 3);
        let v = BigRational::from_integer(40.into());
        let a = PowProduct::pow(v.clone(), t.recip().neg());
        let b = PowProduct::pow(v, t.recip());
        assert_eq!(a.mul(&b).exact(), Some(rat(1, 1)));
        // b^(1/tau) = a
        let c = PowProduct::pow(rat(3, 1), t.recip());
        assert_eq!(c.exact(), Some(rat(2, 1)));
    }

    #[test]
    fn certified_comparisons() {
        // 2^(1/2) vs 7/5
        let r2 = PowProduct::pow(rat(2, 1), Exponent::rational(rat(1, 2)));
        assert_eq!(r2.cmp_certified(&PowProduct::rational(rat(7, 5))).unwrap(), Ordering::Greater);
        assert_eq!(r2.cmp_certified(&PowProduct::rational(rat(3, 2))).unwrap(), Ordering::Less);
        // 3^(log_2 3 ... ) irrational path: 2^tau = 3 exactly via base simplification
        let t = Exponent::tau(2, 3);
        let x = PowProduct::pow(rat(2, 1), t.clone());
        assert_eq!(x.exact(), Some(rat(3, 1)));
        let y = PowProduct::pow(rat(5, 1), t);
        let z = PowProduct::rational(rat(1279, 100));
        // 5^1.58496 = 12.8...
        assert_eq!(y.cmp_certified(&z).unwrap(), Ordering::Greater);
    }

    #[test]
    fn real_sum_and_power() {
        let eight = Real::from(rat(8, 1));
        let cube = Real::Power(Box::new(eight), Exponent::rational(rat(1, 3)));
        assert_eq!(cube.exact(), Some(rat(2, 1)));
        let two = Real::Power(Box::new(Real::from(rat(2, 1))), Exponent::rational(rat(1, 2)));
        let s = Real::Sum(vec![(false, two.clone()), (false, two)]);
        let iv = s.enclose_to(1e-15);
        let v = 2.0 * 2f64.sqrt();
        assert!(iv.lo.to_f64() <= v && v <= iv.hi.to_f64());
        let f = s.format(1e-12);
        assert!(f.starts_with("[2.82842712474619"), "{f}");
    }

    mod props {
        use super::super::*;
        use crate::exact::rat;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn enclosures_contain_float_values(n in 1i64..500, d in 1i64..500, en in -6i64..7, ed in 1i64..5) {
                let v = PowProduct::pow(rat(n, d), Exponent::rational(rat(en, ed)));
                let iv = v.enclose(128);
                let f = (n as f64 / d as f64).powf(en as f64 / ed as f64);
                prop_assert!(iv.lo.to_f64() <= f * (1.0 + 1e-12) && f * (1.0 - 1e-12) <= iv.hi.to_f64());
                prop_assert_eq!(v.mul(&v.recip()).exact(), Some(rat(1, 1)));
            }

            #[test]
            fn comparison_matches_rationals(a in 1i64..1000, b in 1i64..1000, c in 1i64..1000, d in 1i64..1000) {
                let (x, y) = (rat(a, b), rat(c, d));
                let got = PowProduct::rational(x.clone()).cmp_certified(&PowProduct::rational(y.clone())).unwrap();
                prop_assert_eq!(got, x.cmp(&y));
            }

            #[test]
            fn log_ratios_bracket_floor(a in 2u64..6, b in 2u64..40, n in 1i64..30) {
                let e = Exponent::tau(a, b).scale(&rat(n, 1));
                let fl = e.floor().unwrap();
                let v = e.to_f64();
                prop_assert!(fl.to_string().parse::<f64>().unwrap() <= v + 1e-9);
                prop_assert!(v < fl.to_string().parse::<f64>().unwrap() + 1.0 + 1e-9);
            }
        }
    }
}
