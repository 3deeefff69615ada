//! Isometric embedding of a window of a tree into the homogeneous tree T_b.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::function::FiniteFunction;
use crate::tree::{Tree, TreeSpec, VertexAddress};

/// J: B_R(o) -> T_b, built outward from o by matching neighbour lists.
pub struct Embedding {
    target: Tree,
    radius: u32,
    forward: HashMap<VertexAddress, VertexAddress>,
}

/// Neighbours of v in order, with `skip` removed.
fn onward(tree: &Tree, v: &VertexAddress, skip: Option<&VertexAddress>) -> Vec<VertexAddress> {
    tree.neighbors(v).into_iter().filter(|n| Some(n) != skip).collect()
}

pub fn embed_into_homogeneous(tree: &Tree, radius: u32) -> Result<Embedding> {
    let b = tree
        .spec()
        .b()
        .ok_or_else(|| Error::Unsupported(format!("{} has unbounded valence", tree.spec())))?;
    let target = Tree::new(TreeSpec::homogeneous(b)?).with_guard(tree.guard());
    let o = tree.origin();
    let mut forward = HashMap::new();
    forward.insert(o.clone(), target.origin());
    let mut queue = VecDeque::new();
    queue.push_back((o, target.origin(), None::<(VertexAddress, VertexAddress)>, 0u32));
    while let Some((v, w, from, d)) = queue.pop_front() {
        if d == radius {
            continue;
        }
        let nv = onward(tree, &v, from.as_ref().map(|p| &p.0));
        let nw = onward(&target, &w, from.as_ref().map(|p| &p.1));
        if nv.len() > nw.len() {
            return Err(Error::Construction(format!("valence at {v} exceeds b+1 = {}", b + 1)));
        }
        for (x, y) in nv.into_iter().zip(nw) {
            forward.insert(x.clone(), y.clone());
            queue.push_back((x, y, Some((v.clone(), w.clone())), d + 1));
        }
    }
    Ok(Embedding { target, radius, forward })
}

impl Embedding {
    pub fn target(&self) -> &Tree {
        &self.target
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn image(&self, v: &VertexAddress) -> Option<VertexAddress> {
        self.forward.get(v).cloned()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&VertexAddress, &VertexAddress)> {
        self.forward.iter()
    }

    /// f♯ = f ∘ J⁻¹ on the image, 0 elsewhere.
    pub fn sharp(&self, f: &FiniteFunction) -> Result<FiniteFunction> {
        f.map_addresses(|v| self.image(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::lorentz::{lorentz_quasinorm, LorentzIndex};

    #[test]
    fn homogeneous_is_identity() {
        let t = Tree::new(TreeSpec::homogeneous(3).unwrap());
        let j = embed_into_homogeneous(&t, 3).unwrap();
        for (v, w) in j.pairs() {
            assert_eq!(v, w);
        }
        assert_eq!(j.len(), 1 + 4 + 12 + 36);
    }

    #[test]
    fn stromberg_window_is_isometric() {
        let t = Tree::new(TreeSpec::stromberg(2, 3).unwrap());
        let j = embed_into_homogeneous(&t, 4).unwrap();
        let ball = t.enumerate_ball(&t.origin(), 4).unwrap();
        assert_eq!(j.len(), ball.len());
        let img: Vec<VertexAddress> = ball.iter().map(|v| j.image(v).unwrap()).collect();
        for i in 0..ball.len() {
            for k in i + 1..ball.len() {
                assert_eq!(ball[i].distance(&ball[k]), img[i].distance(&img[k]));
            }
        }
    }

    #[test]
    fn sharp_preserves_norms() {
        let t = Tree::new(TreeSpec::flower(2, 3).unwrap());
        let j = embed_into_homogeneous(&t, 3).unwrap();
        let f = FiniteFunction::from_entries([
            (VertexAddress::rooted(vec![0, 1]), rat(2, 1)),
            (VertexAddress::rooted(vec![2]), rat(1, 3)),
        ]);
        let g = j.sharp(&f).unwrap();
        assert_eq!(g.l1(), f.l1());
        let idx = LorentzIndex::new(rat(3, 2), Some(rat(1, 1))).unwrap();
        let a = lorentz_quasinorm(&f, &idx);
        let b = lorentz_quasinorm(&g, &idx);
        assert_eq!(a.format(1e-12), b.format(1e-12));
    }
}
