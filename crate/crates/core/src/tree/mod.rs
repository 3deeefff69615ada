//! Tree families, canonical addressing, distances, and sphere/ball counts.

mod address;
mod cheeger;
mod counts;
mod spec;
mod walk;

use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::BigUint;

pub use address::VertexAddress;
pub use cheeger::{boundary_and_cheeger_ratio, connected_subsets};
pub use counts::{volume_profile, SphereLayer};
pub use spec::{Addressing, Family, HeightRule, TreeSpec};
pub use walk::{sphere_check, SphereCheck, SphereCounter, SphereMismatch};

use crate::error::{Error, Result};

/// Default enumeration limit in vertices.
pub const DEFAULT_GUARD: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum VolumeKey {
    Height(i64),
    Flower(u8, usize),
    Addr(VertexAddress),
}

/// A tree family together with memoized count tables.
pub struct Tree {
    spec: TreeSpec,
    rule: Option<HeightRule>,
    guard: u64,
    desc: RwLock<HashMap<(i64, u32), BigUint>>,
    ray_desc: RwLock<HashMap<(usize, u32), BigUint>>,
    balls: RwLock<HashMap<VolumeKey, Vec<BigUint>>>,
}

impl Clone for Tree {
    fn clone(&self) -> Self {
        Tree::new(self.spec.clone()).with_guard(self.guard)
    }
}

impl std::fmt::Debug for Tree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tree").field("spec", &self.spec).field("guard", &self.guard).finish()
    }
}

impl Tree {
    pub fn new(spec: TreeSpec) -> Self {
        let rule = spec.height_rule();
        Tree {
            spec,
            rule,
            guard: DEFAULT_GUARD,
            desc: RwLock::new(HashMap::new()),
            ray_desc: RwLock::new(HashMap::new()),
            balls: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_guard(mut self, guard: u64) -> Self {
        self.guard = guard;
        self
    }

    pub fn guard(&self) -> u64 {
        self.guard
    }

    pub fn spec(&self) -> &TreeSpec {
        &self.spec
    }

    pub fn rule(&self) -> Option<&HeightRule> {
        self.rule.as_ref()
    }

    pub fn is_rooted(&self) -> bool {
        self.spec.is_rooted()
    }

    pub fn origin(&self) -> VertexAddress {
        VertexAddress::origin()
    }

    pub fn height(&self, v: &VertexAddress) -> Result<i64> {
        if self.is_rooted() {
            return Err(Error::Unsupported("height is undefined in rooted addressing".into()));
        }
        Ok(v.height())
    }

    pub fn valence(&self, v: &VertexAddress) -> u32 {
        if let Some(r) = &self.rule {
            return r.valence(v.height());
        }
        match self.spec.family() {
            Family::Flower { a, b } => match v.down.first() {
                Some(0) => b + 1,
                _ => a + 1,
            },
            Family::Escalator => {
                if v.down.iter().all(|&i| i == 0) {
                    v.down.len() as u32 + 3
                } else {
                    3
                }
            }
            _ => unreachable!("horocyclic family without a height rule"),
        }
    }

    /// Checked valence: rejects non-canonical or out-of-range addresses.
    pub fn valence_at(&self, v: &VertexAddress) -> Result<u32> {
        self.check(v)?;
        Ok(self.valence(v))
    }

    pub fn is_root(&self, v: &VertexAddress) -> bool {
        self.is_rooted() && v.down.is_empty()
    }

    pub fn num_children(&self, v: &VertexAddress) -> u32 {
        let nu = self.valence(v);
        if self.is_root(v) {
            nu
        } else {
            nu - 1
        }
    }

    pub fn child(&self, v: &VertexAddress, i: u32) -> VertexAddress {
        if !self.is_rooted() && v.up > 0 && v.down.is_empty() && i == 0 {
            return VertexAddress::spine(v.up - 1);
        }
        let mut d = v.down.clone();
        d.push(i);
        VertexAddress::new(v.up, d)
    }

    pub fn children(&self, v: &VertexAddress) -> Vec<VertexAddress> {
        (0..self.num_children(v)).map(|i| self.child(v, i)).collect()
    }

    /// Predecessor (parent in rooted addressing); `None` at a rooted root.
    pub fn parent(&self, v: &VertexAddress) -> Option<VertexAddress> {
        if !v.down.is_empty() {
            let mut d = v.down.clone();
            d.pop();
            Some(VertexAddress::new(v.up, d))
        } else if self.is_rooted() {
            None
        } else {
            Some(VertexAddress::spine(v.up + 1))
        }
    }

    pub fn ancestor(&self, v: &VertexAddress, k: u32) -> Option<VertexAddress> {
        let mut cur = v.clone();
        for _ in 0..k {
            cur = self.parent(&cur)?;
        }
        Some(cur)
    }

    /// Predecessor first, then successors in index order.
    pub fn neighbors(&self, v: &VertexAddress) -> Vec<VertexAddress> {
        let mut out = Vec::with_capacity(self.valence(v) as usize);
        if let Some(p) = self.parent(v) {
            out.push(p);
        }
        out.extend(self.children(v));
        out
    }

    pub fn check(&self, v: &VertexAddress) -> Result<()> {
        if self.is_rooted() {
            if v.up != 0 {
                return Err(Error::Address(format!("{v}: rooted addresses have up = 0")));
            }
        } else if !v.is_canonical() {
            return Err(Error::Address(format!("{v} is not canonical")));
        }
        let mut cur = VertexAddress::new(v.up, vec![]);
        for &i in &v.down {
            let nc = self.num_children(&cur);
            if i >= nc {
                return Err(Error::Address(format!("{v}: child index {i} out of range at {cur}")));
            }
            cur.down.push(i);
        }
        Ok(())
    }

    pub fn distance(&self, u: &VertexAddress, v: &VertexAddress) -> u64 {
        u.distance(v)
    }

    /// Vertices of the geodesic from u to v, both ends included.
    pub fn geodesic(&self, u: &VertexAddress, v: &VertexAddress) -> Vec<VertexAddress> {
        let k = u.up.max(v.up);
        let pu = u.anchored_path(k);
        let pv = v.anchored_path(k);
        let c = pu.iter().zip(&pv).take_while(|(x, y)| x == y).count();
        let mut out = vec![u.clone()];
        let mut cur = u.clone();
        for _ in c..pu.len() {
            cur = self.parent(&cur).expect("geodesic leaves the tree");
            out.push(cur.clone());
        }
        for &i in &pv[c..] {
            cur = self.child(&cur, i);
            out.push(cur.clone());
        }
        debug_assert_eq!(&cur, v);
        out
    }

    fn volume_key(&self, v: &VertexAddress) -> VolumeKey {
        if self.rule.is_some() {
            return VolumeKey::Height(v.height());
        }
        match self.spec.family() {
            Family::Flower { .. } => {
                let class = match v.down.first() {
                    None => 0,
                    Some(0) => 1,
                    Some(_) => 2,
                };
                VolumeKey::Flower(class, v.down.len())
            }
            _ => VolumeKey::Addr(v.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn va(up: u32, down: &[u32]) -> VertexAddress {
        VertexAddress::new(up, down.to_vec())
    }

    #[test]
    fn neighbor_examples() {
        let t = Tree::new(TreeSpec::homogeneous(2).unwrap());
        assert_eq!(t.neighbors(&va(0, &[])), vec![va(1, &[]), va(0, &[0]), va(0, &[1])]);
        let n = t.neighbors(&va(1, &[]));
        // valence 3: index 0 is the spine descent, so one non-spine child remains
        assert_eq!(n, vec![va(2, &[]), va(0, &[]), va(1, &[1])]);
        for (i, x) in n.iter().enumerate() {
            assert_eq!(x.distance(&va(1, &[])), 1);
            for y in &n[i + 1..] {
                assert_ne!(x, y);
            }
        }
        let f = Tree::new(TreeSpec::flower(2, 3).unwrap());
        assert_eq!(f.neighbors(&va(0, &[])), vec![va(0, &[0]), va(0, &[1]), va(0, &[2])]);
    }

    #[test]
    fn valence_examples() {
        let t = Tree::new(TreeSpec::stromberg(2, 3).unwrap());
        assert_eq!(t.valence_at(&va(1, &[])).unwrap(), 4);
        assert_eq!(t.valence_at(&va(0, &[])).unwrap(), 3);
        assert!(t.valence_at(&va(1, &[0])).is_err());
        assert!(t.valence_at(&va(0, &[2])).is_err());
        let f = Tree::new(TreeSpec::flower(2, 3).unwrap());
        assert_eq!(f.valence(&va(0, &[0, 2])), 4);
        assert_eq!(f.valence(&va(0, &[1, 1])), 3);
        assert_eq!(f.valence(&va(0, &[])), 3);
        let e = Tree::new(TreeSpec::escalator());
        assert_eq!(e.valence(&va(0, &[0, 0, 0])), 6);
        assert_eq!(e.valence(&va(0, &[0, 2])), 3);
        assert!(e.height(&va(0, &[])).is_err());
    }

    #[test]
    fn geodesics() {
        let t = Tree::new(TreeSpec::stromberg(2, 3).unwrap());
        let g = t.geodesic(&va(2, &[]), &va(0, &[1]));
        assert_eq!(g, vec![va(2, &[]), va(1, &[]), va(0, &[]), va(0, &[1])]);
        let g = t.geodesic(&va(0, &[1, 1]), &va(1, &[2]));
        assert_eq!(g.len() as u64, va(0, &[1, 1]).distance(&va(1, &[2])) + 1);
        for w in g.windows(2) {
            assert_eq!(w[0].distance(&w[1]), 1);
        }
    }

    #[test]
    fn heights_shift_along_edges() {
        let t = Tree::new(TreeSpec::striped(2, 3, 1, 1).unwrap());
        let v = va(2, &[1, 0, 1]);
        assert_eq!(t.height(&t.parent(&v).unwrap()).unwrap(), v.height() + 1);
        for c in t.children(&v) {
            assert_eq!(c.height(), v.height() - 1);
        }
        assert_eq!(t.children(&v).len() as u32, t.valence(&v) - 1);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn specs() -> Vec<TreeSpec> {
            vec![
                TreeSpec::homogeneous(3).unwrap(),
                TreeSpec::stromberg(2, 3).unwrap(),
                TreeSpec::striped(2, 3, 1, 2).unwrap(),
                TreeSpec::semi_homogeneous(2, 4).unwrap(),
                TreeSpec::flower(2, 3).unwrap(),
                TreeSpec::escalator(),
            ]
        }

        fn walk(t: &Tree, steps: &[usize]) -> VertexAddress {
            let mut v = t.origin();
            for &i in steps {
                let n = t.neighbors(&v);
                v = n[i % n.len()].clone();
            }
            v
        }

        proptest! {
            #[test]
            fn metric_axioms(k in 0usize..6, s1 in prop::collection::vec(0usize..8, 0..7),
                             s2 in prop::collection::vec(0usize..8, 0..7), s3 in prop::collection::vec(0usize..8, 0..7)) {
                let t = Tree::new(specs()[k].clone());
                let (u, v, w) = (walk(&t, &s1), walk(&t, &s2), walk(&t, &s3));
                prop_assert_eq!(t.distance(&u, &v), t.distance(&v, &u));
                prop_assert!(t.distance(&u, &v) <= t.distance(&u, &w) + t.distance(&w, &v));
                prop_assert_eq!(t.geodesic(&u, &v).len() as u64, t.distance(&u, &v) + 1);
                prop_assert_eq!(t.distance(&u, &u), 0);
            }

            #[test]
            fn neighbours_are_mutual(k in 0usize..6, s in prop::collection::vec(0usize..8, 0..7)) {
                let t = Tree::new(specs()[k].clone());
                let v = walk(&t, &s);
                let ns = t.neighbors(&v);
                prop_assert_eq!(ns.len() as u32, t.valence(&v));
                for n in &ns {
                    prop_assert!(t.neighbors(n).contains(&v));
                    prop_assert_eq!(t.distance(&v, n), 1);
                }
            }

            #[test]
            fn sphere_counts_match_enumeration(k in 0usize..6, s in prop::collection::vec(0usize..8, 0..5), r in 0u32..6) {
                let t = Tree::new(specs()[k].clone());
                let x = walk(&t, &s);
                let walked = t.enumerate_sphere(&x, r).unwrap().len();
                prop_assert_eq!(t.sphere_size(&x, r), num_bigint::BigUint::from(walked));
                if t.rule().is_some() {
                    prop_assert_eq!(t.sphere_size_closed_form(&x, r).unwrap(), num_bigint::BigUint::from(walked));
                }
            }
        }
    }
}
