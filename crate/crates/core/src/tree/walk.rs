//! Explicit enumeration of spheres and balls by non-backtracking expansion.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{Tree, VertexAddress};
use crate::error::{Error, Result};

/// A mutable cursor moving along tree edges.
struct Cursor<'a> {
    tree: &'a Tree,
    up: u32,
    down: Vec<u32>,
}

/// Where the cursor came from, so the walk never backtracks.
#[derive(Clone, Copy, PartialEq, Eq)]
enum From {
    Start,
    Parent,
    Child(u32),
}

impl<'a> Cursor<'a> {
    fn new(tree: &'a Tree, x: &VertexAddress) -> Self {
        Cursor { tree, up: x.up, down: x.down.clone() }
    }

    fn addr(&self) -> VertexAddress {
        VertexAddress::new(self.up, self.down.clone())
    }

    fn height(&self) -> i64 {
        self.up as i64 - self.down.len() as i64
    }

    fn has_parent(&self) -> bool {
        !self.down.is_empty() || !self.tree.is_rooted()
    }

    fn on_spine(&self) -> bool {
        !self.tree.is_rooted() && self.down.is_empty()
    }

    fn to_child(&mut self, i: u32) {
        if self.on_spine() && self.up > 0 && i == 0 {
            self.up -= 1;
        } else {
            self.down.push(i);
        }
    }

    /// Move to the parent; returns the child index we left.
    fn to_parent(&mut self) -> u32 {
        match self.down.pop() {
            Some(i) => i,
            None => {
                self.up += 1;
                0
            }
        }
    }

    fn undo_child(&mut self, i: u32) {
        if self.down.is_empty() && i == 0 && !self.tree.is_rooted() {
            self.up += 1;
        } else {
            self.down.pop();
        }
    }

    fn undo_parent(&mut self, i: u32) {
        if self.down.is_empty() && i == 0 && !self.tree.is_rooted() && self.up > 0 {
            self.up -= 1;
        } else {
            self.down.push(i);
        }
    }
}

/// Counts |S_0(x)|, ..., |S_rmax(x)| by walking every vertex of the ball.
///
/// Valences of height-rule families are read from a table built once per
/// height range; everything else asks the tree.
pub struct SphereCounter<'a> {
    tree: &'a Tree,
    table: Vec<u32>,
    hmin: i64,
}

impl<'a> SphereCounter<'a> {
    /// Table covering heights reachable within `span` steps of heights in [lo, hi].
    pub fn new(tree: &'a Tree, lo: i64, hi: i64, span: u32) -> Self {
        let hmin = lo - span as i64;
        let hmax = hi + span as i64;
        let table = match tree.rule() {
            Some(r) => (hmin..=hmax).map(|h| r.valence(h)).collect(),
            None => vec![],
        };
        SphereCounter { tree, table, hmin }
    }

    fn valence(&self, c: &Cursor) -> u32 {
        if self.table.is_empty() {
            self.tree.valence(&c.addr())
        } else {
            self.table[(c.height() - self.hmin) as usize]
        }
    }

    fn num_children(&self, c: &Cursor) -> u32 {
        let nu = self.valence(c);
        if c.has_parent() {
            nu - 1
        } else {
            nu
        }
    }

    pub fn counts(&self, x: &VertexAddress, rmax: u32) -> Vec<u64> {
        let mut counts = vec![0u64; rmax as usize + 1];
        let mut c = Cursor::new(self.tree, x);
        self.go(&mut c, 0, From::Start, rmax, &mut counts);
        counts
    }

    fn go(&self, c: &mut Cursor, depth: u32, from: From, rmax: u32, counts: &mut [u64]) {
        counts[depth as usize] += 1;
        if depth == rmax {
            return;
        }
        if depth + 1 == rmax {
            // every neighbour except the one we came from is on the next sphere
            let nu = self.valence(c) as u64;
            counts[rmax as usize] += if from == From::Start { nu } else { nu - 1 };
            return;
        }
        if from != From::Parent && c.has_parent() {
            let i = c.to_parent();
            self.go(c, depth + 1, From::Child(i), rmax, counts);
            c.undo_parent(i);
        }
        for i in 0..self.num_children(c) {
            if from == From::Child(i) {
                continue;
            }
            c.to_child(i);
            self.go(c, depth + 1, From::Parent, rmax, counts);
            c.undo_child(i);
        }
    }
}

/// A disagreement between the counting walk and the closed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereMismatch {
    pub x: VertexAddress,
    pub r: u32,
    pub formula: BigUint,
    pub walked: u64,
}

/// Result of comparing formula counts with walked counts.
#[derive(Clone, Debug, Default)]
pub struct SphereCheck {
    /// Per radius: number of centres compared.
    pub checked: Vec<u64>,
    pub mismatches: Vec<SphereMismatch>,
}

/// Compare |S_r(x)| from the formula with a full walk, for all x in B_xmax(o), r <= rmax.
///
/// Height-rule families use the layered closed form; rooted ones the
/// structured ancestor count.
pub fn sphere_check(tree: &Tree, xmax: u32, rmax: u32) -> Result<SphereCheck> {
    let centres = tree.enumerate_ball(&tree.origin(), xmax)?;
    let counter = SphereCounter::new(tree, -(xmax as i64), xmax as i64, rmax);
    let mut out = SphereCheck { checked: vec![0; rmax as usize + 1], mismatches: vec![] };
    for x in &centres {
        let walked = counter.counts(x, rmax);
        for r in 0..=rmax {
            let formula = match tree.rule() {
                Some(_) => tree.sphere_size_closed_form(x, r)?,
                None => tree.sphere_size(x, r),
            };
            out.checked[r as usize] += 1;
            if formula.to_u64() != Some(walked[r as usize]) {
                out.mismatches.push(SphereMismatch { x: x.clone(), r, formula, walked: walked[r as usize] });
            }
        }
    }
    Ok(out)
}

impl Tree {
    fn check_guard(&self, x: &VertexAddress, r: u32) -> Result<()> {
        let n = self.ball_volume(x, r);
        match n.to_u64() {
            Some(v) if v <= self.guard => Ok(()),
            _ => Err(Error::Guard { requested: n.to_string(), limit: self.guard }),
        }
    }

    /// S_0(x), ..., S_r(x) as explicit vertex lists.
    pub fn enumerate_layers(&self, x: &VertexAddress, r: u32) -> Result<Vec<Vec<VertexAddress>>> {
        self.check(x)?;
        self.check_guard(x, r)?;
        let mut layers: Vec<Vec<VertexAddress>> = vec![Vec::new(); r as usize + 1];
        let mut c = Cursor::new(self, x);
        self.collect(&mut c, 0, From::Start, r, &mut layers);
        Ok(layers)
    }

    fn collect(&self, c: &mut Cursor, depth: u32, from: From, r: u32, layers: &mut [Vec<VertexAddress>]) {
        layers[depth as usize].push(c.addr());
        if depth == r {
            return;
        }
        if from != From::Parent && c.has_parent() {
            let i = c.to_parent();
            self.collect(c, depth + 1, From::Child(i), r, layers);
            c.undo_parent(i);
        }
        let nc = self.num_children(&c.addr());
        for i in 0..nc {
            if from == From::Child(i) {
                continue;
            }
            c.to_child(i);
            self.collect(c, depth + 1, From::Parent, r, layers);
            c.undo_child(i);
        }
    }

    pub fn enumerate_sphere(&self, x: &VertexAddress, r: u32) -> Result<Vec<VertexAddress>> {
        Ok(self.enumerate_layers(x, r)?.pop().unwrap())
    }

    /// B_r(x) in order of distance from x.
    pub fn enumerate_ball(&self, x: &VertexAddress, r: u32) -> Result<Vec<VertexAddress>> {
        Ok(self.enumerate_layers(x, r)?.into_iter().flatten().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{HeightRule, TreeSpec};
    use std::collections::{BTreeMap, HashSet};

    fn va(up: u32, down: &[u32]) -> VertexAddress {
        VertexAddress::new(up, down.to_vec())
    }

    #[test]
    fn sphere_examples() {
        let t = Tree::new(TreeSpec::homogeneous(2).unwrap());
        assert_eq!(t.enumerate_sphere(&va(2, &[1]), 2).unwrap().len(), 6);
        assert_eq!(t.enumerate_sphere(&va(2, &[1]), 0).unwrap(), vec![va(2, &[1])]);
        let s = Tree::new(TreeSpec::stromberg(2, 3).unwrap());
        assert_eq!(s.enumerate_sphere(&va(0, &[]), 1).unwrap().len(), 3);
    }

    #[test]
    fn enumerated_vertices_are_canonical_and_distinct() {
        for spec in [TreeSpec::striped(2, 3, 1, 1).unwrap(), TreeSpec::flower(2, 3).unwrap(), TreeSpec::escalator()] {
            let t = Tree::new(spec);
            let x = if t.is_rooted() { va(0, &[0, 1]) } else { va(2, &[1, 0]) };
            let layers = t.enumerate_layers(&x, 5).unwrap();
            let mut seen = HashSet::new();
            for (d, layer) in layers.iter().enumerate() {
                for v in layer {
                    t.check(v).unwrap();
                    assert_eq!(x.distance(v), d as u64);
                    assert!(seen.insert(v.clone()));
                }
                assert_eq!(layer.len() as u64, t.sphere_size(&x, d as u32).to_u64().unwrap());
            }
        }
    }

    #[test]
    fn counter_matches_enumeration() {
        let mut mid = BTreeMap::new();
        mid.insert(-1, 5);
        let rule = HeightRule::new(Some((2, 4)), mid, vec![3, 4, 4]).unwrap();
        for spec in [
            TreeSpec::homogeneous(3).unwrap(),
            TreeSpec::semi_homogeneous(2, 4).unwrap(),
            TreeSpec::custom(2, 4, rule).unwrap(),
            TreeSpec::flower(2, 4).unwrap(),
            TreeSpec::escalator(),
        ] {
            let t = Tree::new(spec);
            let xs = if t.is_rooted() {
                vec![va(0, &[]), va(0, &[0, 0]), va(0, &[2, 1])]
            } else {
                vec![va(0, &[]), va(3, &[]), va(1, &[2, 0])]
            };
            let c = SphereCounter::new(&t, -4, 4, 6);
            for x in xs {
                let got = c.counts(&x, 6);
                let want: Vec<u64> = t.enumerate_layers(&x, 6).unwrap().iter().map(|l| l.len() as u64).collect();
                assert_eq!(got, want, "{} at {x}", t.spec());
            }
        }
    }

    #[test]
    fn guard_refuses_large_balls() {
        let t = Tree::new(TreeSpec::homogeneous(5).unwrap()).with_guard(1000);
        assert!(matches!(t.enumerate_ball(&va(0, &[]), 10), Err(Error::Guard { .. })));
        assert!(t.enumerate_ball(&va(0, &[]), 2).is_ok());
    }
}
