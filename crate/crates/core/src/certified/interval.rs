use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::dyadic::Dyadic;

/// Closed interval with dyadic endpoints, every operation rounded outward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Interval {
    pub fn point(d: Dyadic) -> Self {
        Interval { lo: d.clone(), hi: d }
    }

    pub fn from_int(v: i64) -> Self {
        Interval::point(Dyadic::from_int(v))
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        Interval {
            lo: Dyadic::from_rational(q, prec, false),
            hi: Dyadic::from_rational(q, prec, true),
        }
    }

    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn is_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo.to_rational() <= q && q <= &self.hi.to_rational()
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn add(&self, o: &Interval, prec: u32) -> Self {
        Interval {
            lo: self.lo.add(&o.lo).round(prec, false),
            hi: self.hi.add(&o.hi).round(prec, true),
        }
    }

    pub fn sub(&self, o: &Interval, prec: u32) -> Self {
        Interval {
            lo: self.lo.sub(&o.hi).round(prec, false),
            hi: self.hi.sub(&o.lo).round(prec, true),
        }
    }

    pub fn neg(&self) -> Self {
        Interval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn mul(&self, o: &Interval, prec: u32) -> Self {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo: lo.round(prec, false), hi: hi.round(prec, true) }
    }

    /// Division; panics if the divisor straddles zero.
    pub fn div(&self, o: &Interval, prec: u32) -> Self {
        assert!(!o.contains_zero(), "interval division by an interval containing zero");
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&o.lo, &o.hi] {
                let l = a.div(b, prec, false);
                let h = a.div(b, prec, true);
                lo = Some(match lo {
                    Some(x) if x <= l => x,
                    _ => l,
                });
                hi = Some(match hi {
                    Some(x) if x >= h => x,
                    _ => h,
                });
            }
        }
        Interval { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    /// Widen symmetrically by `r >= 0`.
    pub fn widen(&self, r: &Dyadic) -> Self {
        Interval { lo: self.lo.sub(r), hi: self.hi.add(r) }
    }

    pub fn max(&self, o: &Interval) -> Self {
        Interval {
            lo: self.lo.clone().max(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    /// Enclosure of exp over the interval.
    pub fn exp(&self, prec: u32) -> Self {
        Interval { lo: exp_point(&self.lo, prec).lo, hi: exp_point(&self.hi, prec).hi }
    }

    /// Enclosure of ln over a positive interval.
    pub fn ln(&self, prec: u32) -> Self {
        assert!(self.is_positive(), "ln of a non-positive interval");
        Interval { lo: ln_point(&self.lo, prec).lo, hi: ln_point(&self.hi, prec).hi }
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }
}

/// Sum of z^(2i+1)/(2i+1), |z| <= 2^-(c/100) for the given c, plus a rigorous tail.
fn atanh_series(z: &Interval, wp: u32, c: u64) -> Interval {
    let mut n: u64 = 1;
    while (c * (2 * n + 1)) / 100 < wp as u64 + 4 {
        n += 1;
    }
    let z2 = z.mul(z, wp);
    let mut pw = z.clone();
    let mut sum = Interval::from_int(0);
    for i in 0..n {
        let term = pw.div(&Interval::from_int((2 * i + 1) as i64), wp);
        sum = sum.add(&term, wp);
        pw = pw.mul(&z2, wp);
    }
    // tail <= |z|^(2n+1) / ((2n+1)(1 - z^2)) <= 2 * 2^-floor(c(2n+1)/100)
    let t = (c * (2 * n + 1)) / 100;
    let tail = Dyadic::new(BigInt::one(), 1 - t as i64);
    sum.widen(&tail)
}

fn ln2_cache() -> &'static Mutex<HashMap<u32, Interval>> {
    static C: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Enclosure of ln 2.
pub fn ln2(prec: u32) -> Interval {
    if let Some(v) = ln2_cache().lock().unwrap().get(&prec) {
        return v.clone();
    }
    let wp = prec + 16;
    let third = Interval::from_rational(&BigRational::new(1.into(), 3.into()), wp);
    // log2(3) > 1.58
    let s = atanh_series(&third, wp, 158);
    let two = Interval::from_int(2);
    let v = s.mul(&two, wp);
    let v = Interval { lo: v.lo.round(prec, false), hi: v.hi.round(prec, true) };
    ln2_cache().lock().unwrap().insert(prec, v.clone());
    v
}

/// Enclosure of ln d for d > 0.
pub fn ln_point(d: &Dyadic, prec: u32) -> Interval {
    assert!(d.signum() > 0, "ln of non-positive value");
    let wp = prec + 16;
    // d = y * 2^k with y in [0.75, 1.5)
    let mut k = d.top() - 1;
    let mut y = d.shl(-k);
    let three_halves = Dyadic::new(3.into(), -1);
    if y >= three_halves {
        k += 1;
        y = y.shl(-1);
    }
    let one = Dyadic::from_int(1);
    let num = y.sub(&one);
    let den = y.add(&one);
    let z = Interval { lo: num.div(&den, wp, false), hi: num.div(&den, wp, true) };
    // |z| <= 1/5 and log2(5) > 2.32
    let s = atanh_series(&z, wp, 232);
    let two = Interval::from_int(2);
    let mut v = s.mul(&two, wp);
    if k != 0 {
        v = v.add(&ln2(wp).mul(&Interval::from_int(k), wp), wp);
    }
    Interval { lo: v.lo.round(prec, false), hi: v.hi.round(prec, true) }
}

/// Enclosure of exp t.
pub fn exp_point(t: &Dyadic, prec: u32) -> Interval {
    if t.is_zero() {
        return Interval::from_int(1);
    }
    // halve until |u| <= 1/2
    let n = (t.top() + 1).max(0) as u32;
    let wp = prec + 24 + n;
    let u = Interval::point(t.shl(-(n as i64)));
    let mut terms: u32 = 1;
    // tail 2 * 2^-N / N! <= 2^-wp, with one bit of slack for the f64 log sum
    let mut log2_fact = 0f64;
    while (terms as f64) + log2_fact.floor() < wp as f64 + 2.0 {
        terms += 1;
        log2_fact += (terms as f64).log2();
    }
    let mut sum = Interval::from_int(1);
    let mut term = Interval::from_int(1);
    for i in 1..terms {
        term = term.mul(&u, wp).div(&Interval::from_int(i as i64), wp);
        sum = sum.add(&term, wp);
    }
    let tail = Dyadic::new(BigInt::one(), -(wp as i64));
    let mut v = sum.widen(&tail);
    for _ in 0..n {
        v = v.mul(&v, wp);
    }
    Interval { lo: v.lo.round(prec, false), hi: v.hi.round(prec, true) }
}

fn ln_rat_cache() -> &'static Mutex<HashMap<(BigRational, u32), Interval>> {
    static C: OnceLock<Mutex<HashMap<(BigRational, u32), Interval>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Enclosure of ln q for rational q > 0, memoized.
pub fn ln_rational(q: &BigRational, prec: u32) -> Interval {
    assert!(q > &BigRational::zero(), "ln of non-positive rational");
    let key = (q.clone(), prec);
    if let Some(v) = ln_rat_cache().lock().unwrap().get(&key) {
        return v.clone();
    }
    let wp = prec + 8;
    let v = if q.is_integer() {
        ln_point(&Dyadic::from_bigint(q.numer().clone()), wp)
    } else {
        let a = ln_point(&Dyadic::from_bigint(q.numer().clone()), wp);
        let b = ln_point(&Dyadic::from_bigint(q.denom().clone()), wp);
        a.sub(&b, wp)
    };
    let v = Interval { lo: v.lo.round(prec, false), hi: v.hi.round(prec, true) };
    let mut c = ln_rat_cache().lock().unwrap();
    if c.len() > 200_000 {
        c.clear();
    }
    c.insert(key, v.clone());
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(iv: &Interval, x: f64) -> bool {
        let t = x.abs() * 1e-14;
        iv.lo.to_f64() <= x + t && iv.hi.to_f64() >= x - t
    }

    #[test]
    fn ln_values() {
        for &(n, x) in &[(2i64, 2f64.ln()), (3, 3f64.ln()), (10, 10f64.ln()), (1000003, 1000003f64.ln())] {
            let iv = ln_point(&Dyadic::from_int(n), 80);
            assert!(close(&iv, x), "ln {n}: {:?}", iv);
            assert!(iv.width().to_f64() < 1e-20);
        }
        let iv = ln_rational(&BigRational::new(1.into(), 7.into()), 64);
        assert!(close(&iv, -(7f64.ln())));
    }

    #[test]
    fn exp_values() {
        for &x in &[0.5f64, -0.75, 3.0, 40.0, -20.0] {
            let t = Dyadic::from_rational(&BigRational::from_float(x).unwrap(), 64, false);
            let iv = exp_point(&t, 80);
            assert!(close(&iv, x.exp()), "exp {x}: {:?}", iv);
        }
    }

    #[test]
    fn exp_ln_roundtrip_encloses() {
        let q = BigRational::new(22.into(), 7.into());
        let iv = ln_rational(&q, 100).exp(100);
        assert!(iv.contains(&q));
        assert!(iv.width().to_f64() < 1e-25);
    }

    #[test]
    fn ln2_squares_to_ln4() {
        let a = ln2(128).add(&ln2(128), 128);
        let b = ln_point(&Dyadic::from_int(4), 128);
        assert!(a.overlaps(&b));
    }
}
