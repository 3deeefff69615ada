//! The uncentred maximal function via the convex hull of the support.
//!
//! A ball B_r(z) containing x with z outside H = hull(supp f ∪ {x}) can be
//! replaced by B_{r-t}(z'), z' the projection of z on H and t = d(z, z'):
//! the smaller ball still contains x, carries the same mass and is no larger.
//! So centres range over H, and for each centre the radius ranges over the
//! mass jumps at or beyond d(z, x), plus d(z, x) itself.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{Jumps, MaximalValue, MARGIN};
use crate::certified::PowProduct;
use crate::error::Result;
use crate::exact::{rat_from_uint, to_f64};
use crate::function::FiniteFunction;
use crate::tree::{Tree, VertexAddress};

/// Extra radius kept in the per-centre volume tables.
const VOLUME_PAD: u32 = 24;

struct CentreTable {
    jumps: Jumps,
    mass_f: Vec<f64>,
    vols: Vec<BigUint>,
    vols_f: Vec<f64>,
    /// suffix[i] = max_{j >= i} mass_j / vol(radius_j)
    suffix: Vec<f64>,
}

impl CentreTable {
    fn new(tree: &Tree, z: &VertexAddress, jumps: Jumps) -> Self {
        let top = jumps.radii.last().copied().unwrap_or(0) + VOLUME_PAD;
        let vols = tree.ball_volumes(z, top);
        let vols_f: Vec<f64> = vols.iter().map(|v| v.to_f64().unwrap_or(f64::INFINITY)).collect();
        let mass_f: Vec<f64> = jumps.mass.iter().map(to_f64).collect();
        let mut suffix = vec![0.0f64; jumps.radii.len() + 1];
        for i in (0..jumps.radii.len()).rev() {
            let v = mass_f[i] / vols_f[jumps.radii[i] as usize];
            suffix[i] = suffix[i + 1].max(v);
        }
        CentreTable { jumps, mass_f, vols, vols_f, suffix }
    }

    fn vol(&self, tree: &Tree, z: &VertexAddress, r: u32) -> (BigUint, f64) {
        match self.vols.get(r as usize) {
            Some(v) => (v.clone(), self.vols_f[r as usize]),
            None => {
                let v = tree.ball_volume(z, r);
                let f = v.to_f64().unwrap_or(f64::INFINITY);
                (v, f)
            }
        }
    }
}

/// Candidate ball with exact data.
struct Cand {
    center: VertexAddress,
    radius: u32,
    mass: BigRational,
    vol: BigUint,
}

/// Evaluates 𝓝f at many points for one fixed f.
pub struct UncentredEvaluator<'a> {
    tree: &'a Tree,
    hull: Vec<VertexAddress>,
    index: HashMap<VertexAddress, usize>,
    dist: Vec<Vec<u32>>,
    tables: Vec<CentreTable>,
}

impl<'a> UncentredEvaluator<'a> {
    pub fn new(tree: &'a Tree, f: &FiniteFunction) -> Result<Self> {
        let supp: Vec<&VertexAddress> = f.support().collect();
        let mut hull: Vec<VertexAddress> = Vec::new();
        let mut index: HashMap<VertexAddress, usize> = HashMap::new();
        if let Some(&s0) = supp.first() {
            for s in &supp {
                for v in tree.geodesic(s0, s) {
                    if !index.contains_key(&v) {
                        index.insert(v.clone(), hull.len());
                        hull.push(v);
                    }
                }
            }
        }
        let n = hull.len();
        let mut dist = vec![vec![0u32; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = hull[i].distance(&hull[j]) as u32;
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        let support: Vec<(usize, BigRational)> = f.iter().map(|(y, q)| (index[y], q.clone())).collect();
        let tables = (0..n)
            .map(|z| {
                let d = support.iter().map(|(y, q)| (dist[z][*y], q.clone())).collect();
                CentreTable::new(tree, &hull[z], Jumps::new(d))
            })
            .collect();
        Ok(UncentredEvaluator { tree, hull, index, dist, tables })
    }

    pub fn hull(&self) -> &[VertexAddress] {
        &self.hull
    }

    /// Geodesic from x to its projection on the hull, projection last.
    fn gate(&self, x: &VertexAddress) -> Vec<VertexAddress> {
        let path = self.tree.geodesic(x, &self.hull[0]);
        let k = path.iter().position(|v| self.index.contains_key(v)).expect("hull contains its base point");
        path[..=k].to_vec()
    }

    pub fn eval(&self, x: &VertexAddress) -> Result<MaximalValue> {
        if self.hull.is_empty() {
            return Ok(MaximalValue { value: PowProduct::zero(), radius: 0, center: x.clone() });
        }
        let path = self.gate(x);
        let l = (path.len() - 1) as u32;
        let pi = self.index[path.last().unwrap()];
        // path vertices off the hull: distance s from the projection, l - s from x
        let off: Vec<(VertexAddress, u32, Vec<BigUint>)> = path[..path.len() - 1]
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let s = l - i as u32;
                let top = s + self.tables[pi].jumps.radii.last().unwrap();
                (v.clone(), s, self.tree.ball_volumes(v, top.max(l)))
            })
            .collect();

        let mut best = 0.0f64;
        self.scan(pi, l, &off, &mut |v, _| best = best.max(v), None);
        let thr = best * (1.0 - MARGIN);
        let mut cands: Vec<Cand> = Vec::new();
        self.scan(pi, l, &off, &mut |v, c| {
            if v >= thr {
                cands.push(c());
            }
        }, Some(thr));

        let mut pick: Option<(BigRational, Cand)> = None;
        for c in cands {
            let v = &c.mass / rat_from_uint(&c.vol);
            let better = match &pick {
                None => true,
                Some((bv, bc)) => match v.cmp(bv) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => (c.radius, &c.center) < (bc.radius, &bc.center),
                },
            };
            if better {
                pick = Some((v, c));
            }
        }
        let (v, c) = pick.expect("at least one candidate ball");
        Ok(MaximalValue { value: PowProduct::rational(v), radius: c.radius, center: c.center })
    }

    /// Visits every candidate ball with its f64 value and a builder for the exact record.
    /// With `prune`, centres whose best value is below it are skipped.
    fn scan(
        &self,
        pi: usize,
        l: u32,
        off: &[(VertexAddress, u32, Vec<BigUint>)],
        visit: &mut dyn FnMut(f64, &dyn Fn() -> Cand),
        prune: Option<f64>,
    ) {
        for (zi, t) in self.tables.iter().enumerate() {
            let r0 = l + self.dist[pi][zi];
            let k = t.jumps.radii.partition_point(|&s| s < r0);
            match prune {
                None => visit(t.suffix[k], &|| unreachable!("values only")),
                Some(p) if t.suffix[k] >= p => {
                    for i in k..t.jumps.radii.len() {
                        let r = t.jumps.radii[i];
                        visit(t.mass_f[i] / t.vols_f[r as usize], &|| Cand {
                            center: self.hull[zi].clone(),
                            radius: r,
                            mass: t.jumps.mass[i].clone(),
                            vol: t.vols[r as usize].clone(),
                        });
                    }
                }
                Some(_) => {}
            }
            // the smallest ball around z that reaches x
            let m = t.jumps.radii.partition_point(|&s| s <= r0);
            if m > 0 && t.jumps.radii[m - 1] != r0 {
                let (vol, vf) = t.vol(self.tree, &self.hull[zi], r0);
                let v = t.mass_f[m - 1] / vf;
                visit(v, &|| Cand {
                    center: self.hull[zi].clone(),
                    radius: r0,
                    mass: t.jumps.mass[m - 1].clone(),
                    vol: vol.clone(),
                });
            }
        }
        let t = &self.tables[pi];
        for (z, s, vols) in off {
            let dx = l - s;
            let mut reach: Option<usize> = None;
            for (i, &r) in t.jumps.radii.iter().enumerate() {
                let rz = r + s;
                if rz <= dx {
                    reach = Some(i);
                    continue;
                }
                let v = t.mass_f[i] / vols[rz as usize].to_f64().unwrap_or(f64::INFINITY);
                visit(v, &|| Cand { center: z.clone(), radius: rz, mass: t.jumps.mass[i].clone(), vol: vols[rz as usize].clone() });
            }
            if let Some(i) = reach {
                let v = t.mass_f[i] / vols[dx as usize].to_f64().unwrap_or(f64::INFINITY);
                visit(v, &|| Cand { center: z.clone(), radius: dx, mass: t.jumps.mass[i].clone(), vol: vols[dx as usize].clone() });
            }
        }
    }
}
