//! Ball averages on finite graphs and the elementary ball-growth bounds.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{v_q, DistanceTable, SimpleGraph};

/// Ω_{m,Q} = (Q^(m+1) - 1) / (Q - 1), or m + 1 when Q = 1.
pub fn omega(m: u32, q: u32) -> BigUint {
    if q <= 1 {
        return BigUint::from(m + 1);
    }
    let qb = BigUint::from(q);
    (qb.pow(m + 1) - 1u32) / (qb - 1u32)
}

/// A ball inequality that failed at x (and y for two-centre bounds).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallViolation {
    pub lemma: &'static str,
    pub x: usize,
    pub y: Option<usize>,
    pub r: u32,
    pub n: u32,
    pub lhs: BigUint,
    pub rhs: BigUint,
}

/// |B_r(x)| <= V^Q(r) for r <= min(rmax, safe radius of x).
pub fn estball_violations(g: &SimpleGraph, dt: &DistanceTable, rmax: u32) -> Vec<BallViolation> {
    let mut out = Vec::new();
    for x in 0..g.len() {
        for r in 0..=rmax.min(g.safe_radius(x)) {
            let lhs = BigUint::from(dt.ball_size(x, r));
            let rhs = v_q(g.q(), r);
            if lhs > rhs {
                out.push(BallViolation { lemma: "estball", x, y: None, r, n: 0, lhs, rhs });
            }
        }
    }
    out
}

/// |B_{r+n}(x)| <= Ω_{n,Q} |B_r(x)| for n >= 1, r >= 0, r + n within the safe radius and rmax.
pub fn compball_violations(g: &SimpleGraph, dt: &DistanceTable, rmax: u32) -> Vec<BallViolation> {
    let mut out = Vec::new();
    for x in 0..g.len() {
        let top = rmax.min(g.safe_radius(x));
        for r in 0..top {
            let small = BigUint::from(dt.ball_size(x, r));
            for n in 1..=top - r {
                let lhs = BigUint::from(dt.ball_size(x, r + n));
                let rhs = omega(n, g.q()) * &small;
                if lhs > rhs {
                    out.push(BallViolation { lemma: "compball", x, y: None, r, n, lhs, rhs });
                }
            }
        }
    }
    out
}

/// |B_r(y)| <= Ω_{K,Q} |B_r(x)| with K = d(x, y) <= kmax, both balls safe.
pub fn compball_ii_violations(g: &SimpleGraph, dt: &DistanceTable, kmax: u32, rmax: u32) -> Vec<BallViolation> {
    let mut out = Vec::new();
    for x in 0..g.len() {
        for &y in dt.ball(x, kmax) {
            let k = dt.dist(x, y);
            let top = rmax.min(g.safe_radius(x)).min(g.safe_radius(y));
            for r in 0..=top {
                let lhs = BigUint::from(dt.ball_size(y, r));
                let rhs = omega(k, g.q()) * BigUint::from(dt.ball_size(x, r));
                if lhs > rhs {
                    out.push(BallViolation { lemma: "compball II", x, y: Some(y), r, n: k, lhs, rhs });
                }
            }
        }
    }
    out
}

/// Checks #{after > α} <= factor · #{f > α} for every α >= 0.
///
/// Both sides are step functions; it is enough to let α increase to each
/// positive value v of `after`, where the sides become #{after >= v} and
/// #{f >= v}. Returns the first failing v with both counts.
pub fn level_set_bound(
    after: &[BigRational],
    f: &[BigRational],
    factor: &BigUint,
) -> Option<(BigRational, BigUint, BigUint)> {
    let mut a: Vec<&BigRational> = after.iter().filter(|v| v.is_positive()).collect();
    let mut b: Vec<BigRational> = f.iter().map(|v| v.abs()).filter(|v| v.is_positive()).collect();
    a.sort();
    b.sort();
    let mut last: Option<&BigRational> = None;
    for (i, v) in a.iter().enumerate() {
        if last == Some(v) {
            continue;
        }
        last = Some(v);
        let lhs = BigUint::from(a.len() - i);
        let rhs = BigUint::from(b.len() - b.partition_point(|w| w < *v));
        if lhs > factor * &rhs {
            return Some(((*v).clone(), lhs, rhs));
        }
    }
    None
}

/// Ball averages A_R |f|(z) for all z and R <= rmax, and the maximal
/// operators built from them.
pub struct Averages<'a> {
    dt: &'a DistanceTable,
    rmax: u32,
    avg: Vec<Vec<BigRational>>,
}

impl<'a> Averages<'a> {
    pub fn new(dt: &'a DistanceTable, f: &[BigRational], rmax: u32) -> Self {
        let support: Vec<(usize, BigRational)> =
            f.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.abs())).collect();
        let avg = (0..dt.len())
            .map(|z| {
                let mut mass = vec![BigRational::zero(); rmax as usize + 1];
                for (y, v) in &support {
                    let d = dt.dist(z, *y);
                    if d <= rmax {
                        mass[d as usize] += v;
                    }
                }
                let mut acc = BigRational::zero();
                mass.into_iter()
                    .enumerate()
                    .map(|(r, m)| {
                        acc += m;
                        &acc / BigRational::from_integer(dt.ball_size(z, r as u32).into())
                    })
                    .collect()
            })
            .collect();
        Averages { dt, rmax, avg }
    }

    pub fn rmax(&self) -> u32 {
        self.rmax
    }

    /// A_R f(z).
    pub fn a(&self, r: u32, z: usize) -> &BigRational {
        &self.avg[z][r as usize]
    }

    /// 𝒜_R f(z): the largest average over radius-R balls containing z.
    pub fn a_unc(&self, r: u32, z: usize) -> BigRational {
        self.dt.ball(z, r).iter().map(|&w| self.a(r, w)).max().cloned().unwrap_or_else(BigRational::zero)
    }

    fn max_over<F: Fn(u32) -> BigRational>(lo: u32, hi: u32, f: F) -> BigRational {
        (lo..=hi).map(f).max().unwrap_or_else(BigRational::zero)
    }

    /// M^K f(z) = max_{R <= K} A_R f(z).
    pub fn m_upper(&self, k: u32, z: usize) -> BigRational {
        Self::max_over(0, k.min(self.rmax), |r| self.a(r, z).clone())
    }

    /// M_K f(z) = max_{K < R <= rmax} A_R f(z).
    pub fn m_lower(&self, k: u32, z: usize) -> BigRational {
        Self::max_over(k + 1, self.rmax, |r| self.a(r, z).clone())
    }

    pub fn m(&self, z: usize) -> BigRational {
        Self::max_over(0, self.rmax, |r| self.a(r, z).clone())
    }

    pub fn n_upper(&self, k: u32, z: usize) -> BigRational {
        Self::max_over(0, k.min(self.rmax), |r| self.a_unc(r, z))
    }

    pub fn n_lower(&self, k: u32, z: usize) -> BigRational {
        Self::max_over(k + 1, self.rmax, |r| self.a_unc(r, z))
    }

    pub fn n(&self, z: usize) -> BigRational {
        Self::max_over(0, self.rmax, |r| self.a_unc(r, z))
    }
}
