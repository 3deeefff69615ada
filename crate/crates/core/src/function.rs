//! Finitely supported nonnegative functions on vertices.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{fmt_rational, parse_rational};
use crate::tree::VertexAddress;

/// A sparse map vertex -> value > 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteFunction {
    entries: BTreeMap<VertexAddress, BigRational>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    addr: VertexAddress,
    value: String,
}

impl FiniteFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn delta(x: VertexAddress) -> Self {
        let mut f = Self::new();
        f.entries.insert(x, BigRational::from_integer(1.into()));
        f
    }

    pub fn indicator<I: IntoIterator<Item = VertexAddress>>(set: I) -> Self {
        let one = BigRational::from_integer(1.into());
        FiniteFunction { entries: set.into_iter().map(|v| (v, one.clone())).collect() }
    }

    /// Values are replaced by their absolute values; zeros are dropped.
    pub fn from_entries<I: IntoIterator<Item = (VertexAddress, BigRational)>>(it: I) -> Self {
        let mut f = Self::new();
        for (v, q) in it {
            f.add(v, q.abs());
        }
        f
    }

    /// Adds q to the value at v.
    pub fn add(&mut self, v: VertexAddress, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let e = self.entries.entry(v.clone()).or_insert_with(BigRational::zero);
        *e += q;
        if e.is_zero() {
            self.entries.remove(&v);
        }
    }

    pub fn get(&self, v: &VertexAddress) -> BigRational {
        self.entries.get(v).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexAddress, &BigRational)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &VertexAddress> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn l1(&self) -> BigRational {
        self.entries.values().sum()
    }

    pub fn sup(&self) -> BigRational {
        self.entries.values().max().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        FiniteFunction::from_entries(self.entries.iter().map(|(v, q)| (v.clone(), q * c)))
    }

    pub fn restrict<P: Fn(&VertexAddress) -> bool>(&self, keep: P) -> Self {
        FiniteFunction {
            entries: self.entries.iter().filter(|(v, _)| keep(v)).map(|(v, q)| (v.clone(), q.clone())).collect(),
        }
    }

    /// Push forward along an injective address map; fails on a missing image.
    pub fn map_addresses<F: Fn(&VertexAddress) -> Option<VertexAddress>>(&self, map: F) -> Result<Self> {
        let mut out = FiniteFunction::new();
        for (v, q) in &self.entries {
            let w = map(v).ok_or_else(|| Error::Domain(format!("{v} has no image")))?;
            out.add(w, q.clone());
        }
        Ok(out)
    }

    /// Random function: up to `max_support` vertices of `pool`, integer values in 1..=max_value.
    pub fn random<R: Rng>(pool: &[VertexAddress], max_support: usize, max_value: u32, rng: &mut R) -> Self {
        let k = rng.gen_range(1..=max_support.min(pool.len()).max(1));
        let picks: Vec<&VertexAddress> = pool.choose_multiple(rng, k).collect();
        FiniteFunction::from_entries(
            picks
                .into_iter()
                .map(|v| (v.clone(), BigRational::from_integer(rng.gen_range(1..=max_value).into()))),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<Entry> =
            self.entries.iter().map(|(v, q)| Entry { addr: v.clone(), value: fmt_rational(q) }).collect();
        serde_json::to_value(entries).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let entries: Vec<Entry> = serde_json::from_value(v.clone())?;
        let mut out = FiniteFunction::new();
        for e in entries {
            let q = parse_rational(&e.value)?;
            if q.is_negative() {
                return Err(Error::Parse(format!("negative value at {}", e.addr)));
            }
            out.add(e.addr, q);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use rand::SeedableRng;

    #[test]
    fn json_round_trip() {
        let f = FiniteFunction::from_entries([
            (VertexAddress::new(1, vec![2]), rat(3, 4)),
            (VertexAddress::origin(), rat(-2, 1)),
        ]);
        assert_eq!(f.get(&VertexAddress::origin()), rat(2, 1));
        let j = f.to_json();
        assert_eq!(FiniteFunction::from_json(&j).unwrap(), f);
        assert_eq!(f.l1(), rat(11, 4));
    }

    #[test]
    fn zeros_are_not_stored() {
        let mut f = FiniteFunction::delta(VertexAddress::origin());
        f.add(VertexAddress::origin(), rat(-1, 1));
        assert!(f.is_empty());
        f.add(VertexAddress::origin(), rat(0, 1));
        assert!(f.is_empty());
    }

    #[test]
    fn random_is_reproducible() {
        let pool: Vec<_> = (0..10).map(|i| VertexAddress::new(0, vec![i])).collect();
        let mut r1 = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut r2 = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f = FiniteFunction::random(&pool, 5, 5, &mut r1);
        assert_eq!(f, FiniteFunction::random(&pool, 5, 5, &mut r2));
        assert!(f.len() <= 5 && !f.is_empty());
    }
}
