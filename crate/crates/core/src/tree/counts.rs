//! Sphere and ball cardinalities without enumeration.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{Family, Tree, VertexAddress};
use crate::error::{Error, Result};
use crate::exact::{big, upow};

/// One summand of the layered sphere decomposition around x.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereLayer {
    /// The layer lies below p^k(x), or is p^r(x) itself when k = r.
    pub k: u32,
    pub height: i64,
    pub count: BigUint,
}

/// (V^b(r), S^b(r)): ball and sphere sizes in the homogeneous tree T_b.
pub fn volume_profile(b: u64, r: u32) -> (BigUint, BigUint) {
    assert!(b >= 1, "volume profile needs b >= 1");
    if r == 0 {
        return (BigUint::one(), BigUint::one());
    }
    if b == 1 {
        return (big(2 * r as u64 + 1), big(2));
    }
    let v = (upow(b, r + 1) + upow(b, r) - big(2)) / big(b - 1);
    let s = big(b + 1) * upow(b, r - 1);
    (v, s)
}

impl Tree {
    /// D(h, j) = number of j-step successors of a vertex at height h.
    pub fn descendant_product(&self, h: i64, j: u32) -> BigUint {
        let rule = self.rule.as_ref().expect("descendant_product needs a height rule");
        if let Some(v) = self.desc.read().unwrap().get(&(h, j)) {
            return v.clone();
        }
        let mut acc = BigUint::one();
        for i in 0..j as i64 {
            acc *= rule.valence(h - i) - 1;
        }
        self.desc.write().unwrap().insert((h, j), acc.clone());
        acc
    }

    /// Number of vertices j steps below v in the successor direction.
    pub fn descendants(&self, v: &VertexAddress, j: u32) -> BigUint {
        if self.rule.is_some() {
            return self.descendant_product(v.height(), j);
        }
        match *self.spec.family() {
            Family::Flower { a, b } => match v.down.first() {
                Some(0) => upow(b as u64, j),
                Some(_) => upow(a as u64, j),
                None if j == 0 => BigUint::one(),
                None => upow(b as u64, j - 1) + upow(a as u64, j),
            },
            Family::Escalator => {
                if v.down.iter().all(|&i| i == 0) {
                    self.ray_descendants(v.down.len(), j)
                } else {
                    upow(2, j)
                }
            }
            _ => unreachable!(),
        }
    }

    fn ray_descendants(&self, i: usize, j: u32) -> BigUint {
        if j == 0 {
            return BigUint::one();
        }
        if let Some(v) = self.ray_desc.read().unwrap().get(&(i, j)) {
            return v.clone();
        }
        let offray: u64 = if i == 0 { 2 } else { i as u64 + 1 };
        let v = self.ray_descendants(i + 1, j - 1) + big(offray) * upow(2, j - 1);
        self.ray_desc.write().unwrap().insert((i, j), v.clone());
        v
    }

    /// The layered decomposition of S_r(x) for height-rule families.
    pub fn sphere_layers(&self, x: &VertexAddress, r: u32) -> Result<Vec<SphereLayer>> {
        let rule = self.rule.as_ref().ok_or_else(|| {
            Error::Unsupported(format!("no closed form for {}; enumerate instead", self.spec))
        })?;
        let h = x.height();
        let r64 = r as i64;
        if r == 0 {
            return Ok(vec![SphereLayer { k: 0, height: h, count: BigUint::one() }]);
        }
        let mut out = vec![SphereLayer { k: 0, height: h - r64, count: self.descendant_product(h, r) }];
        for k in 1..r {
            let k64 = k as i64;
            let siblings = rule.valence(h + k64) - 2;
            let count = self.descendant_product(h + k64 - 1, r - k - 1) * siblings;
            out.push(SphereLayer { k, height: h + 2 * k64 - r64, count });
        }
        out.push(SphereLayer { k: r, height: h + r64, count: BigUint::one() });
        Ok(out)
    }

    /// |S_r(x)| from the layered decomposition; height-rule families only.
    pub fn sphere_size_closed_form(&self, x: &VertexAddress, r: u32) -> Result<BigUint> {
        Ok(self.sphere_layers(x, r)?.into_iter().map(|l| l.count).sum())
    }

    /// |S_r(x)| for any family, summing descendant counts over the ancestors of x.
    pub fn sphere_size(&self, x: &VertexAddress, r: u32) -> BigUint {
        if self.rule.is_some() {
            return self.sphere_size_closed_form(x, r).unwrap();
        }
        let mut total = self.descendants(x, r);
        let mut cur = x.clone();
        for k in 1..=r {
            let Some(p) = self.parent(&cur) else { break };
            if k == r {
                total += 1u32;
            } else {
                for c in self.children(&p) {
                    if c != cur {
                        total += self.descendants(&c, r - k - 1);
                    }
                }
            }
            cur = p;
        }
        total
    }

    /// |B_0(x)|, ..., |B_rmax(x)|.
    pub fn ball_volumes(&self, x: &VertexAddress, rmax: u32) -> Vec<BigUint> {
        let key = self.volume_key(x);
        if let Some(v) = self.balls.read().unwrap().get(&key) {
            if v.len() > rmax as usize {
                return v[..=rmax as usize].to_vec();
            }
        }
        let mut out = Vec::with_capacity(rmax as usize + 1);
        let mut acc = BigUint::zero();
        for r in 0..=rmax {
            acc += self.sphere_size(x, r);
            out.push(acc.clone());
        }
        self.balls.write().unwrap().insert(key, out.clone());
        out
    }

    pub fn ball_volume(&self, x: &VertexAddress, r: u32) -> BigUint {
        self.ball_volumes(x, r).pop().unwrap()
    }

    pub fn sphere_sizes(&self, x: &VertexAddress, rmax: u32) -> Vec<BigUint> {
        (0..=rmax).map(|r| self.sphere_size(x, r)).collect()
    }
}
