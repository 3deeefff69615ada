//! Strict rough isometries between finite graphs and the average transfer bound.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{omega, v_q, DistanceTable, SimpleGraph, EXHAUSTIVE_PAIR_LIMIT, UNREACHED};
use crate::error::{Error, Result};
use crate::exact::rat_from_uint;

/// Graphs up to this size get full distance tables.
const TABLE_LIMIT: usize = 4096;
/// Sources drawn when the pair scan is sampled.
const SAMPLED_SOURCES: usize = 256;

/// A validated map φ: source -> target with distortion β and density K.
pub struct RoughIsometry {
    source: SimpleGraph,
    target: SimpleGraph,
    map: Vec<usize>,
    beta: u32,
    k: u32,
    /// True when the distortion scan used sampled sources.
    pub sampled: bool,
    pub pairs_checked: u64,
    /// max |φ^{-1}(y')| and its bound V^Q(β).
    pub max_preimage: usize,
    pub preimage_bound: BigUint,
    /// max #{x : z' ∈ B_K(φ(x))} and its bound V^Q(β) V^{Q'}(K).
    pub max_overlap: usize,
    pub overlap_bound: BigUint,
    tables: Option<(DistanceTable, DistanceTable)>,
}

impl RoughIsometry {
    pub fn source(&self) -> &SimpleGraph {
        &self.source
    }

    pub fn target(&self) -> &SimpleGraph {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Distance tables of source and target, when the graphs are small enough.
    pub fn tables(&self) -> Option<(&DistanceTable, &DistanceTable)> {
        self.tables.as_ref().map(|(s, t)| (s, t))
    }

    fn need_tables(&self) -> Result<(&DistanceTable, &DistanceTable)> {
        self.tables().ok_or_else(|| Error::Unsupported(format!("graphs above {TABLE_LIMIT} vertices")))
    }

    /// (πf)(y') = Σ_{B_K(y')} |f| at every target vertex.
    pub fn pi(&self, f: &[BigRational]) -> Result<Vec<BigRational>> {
        let (_, tt) = self.need_tables()?;
        Ok((0..self.target.len())
            .map(|y| tt.ball(y, self.k).iter().map(|&w| f[w].abs()).sum())
            .collect())
    }

    /// (πf)∘φ on the source.
    pub fn pi_pullback(&self, f: &[BigRational]) -> Result<Vec<BigRational>> {
        if f.len() != self.target.len() {
            return Err(Error::Domain(format!("function has {} values, target has {} vertices", f.len(), self.target.len())));
        }
        let p = self.pi(f)?;
        Ok(self.map.iter().map(|&y| p[y].clone()).collect())
    }
}

/// Checks d(x,y) - β <= d'(φx, φy) <= d(x,y) + β and computes K and the overlap counts.
pub fn validate_rough_isometry(
    source: &SimpleGraph,
    target: &SimpleGraph,
    map: &[usize],
    beta: u32,
) -> Result<RoughIsometry> {
    let n = source.len();
    if map.len() != n {
        return Err(Error::Construction(format!("map has {} entries, source has {n} vertices", map.len())));
    }
    if let Some(x) = map.iter().position(|&y| y >= target.len()) {
        return Err(Error::Construction(format!("φ({x}) = {} is not a target vertex", map[x])));
    }
    let small = n <= TABLE_LIMIT && target.len() <= TABLE_LIMIT;
    let tables = small.then(|| (DistanceTable::new(source), DistanceTable::new(target)));
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let sampled = pairs > EXHAUSTIVE_PAIR_LIMIT;
    let sources: Vec<usize> = if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        (0..SAMPLED_SOURCES).map(|_| rng.gen_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let witness = sources
        .par_iter()
        .filter_map(|&x| {
            let (dx, dpx): (Vec<u32>, Vec<u32>) = match &tables {
                Some((s, t)) => (s.row(x).to_vec(), t.row(map[x]).to_vec()),
                None => (source.bfs(x), target.bfs(map[x])),
            };
            let lo = if sampled { 0 } else { x + 1 };
            (lo..n).find_map(|y| {
                let d = dx[y];
                let dp = dpx[map[y]];
                (dp + beta < d || dp > d + beta).then_some((x, y, d, dp))
            })
        })
        .min();
    if let Some((x, y, d, dp)) = witness {
        return Err(Error::Construction(format!(
            "not a rough isometry: d({x},{y}) = {d} but d'(φ{x}, φ{y}) = {dp}, β = {beta}"
        )));
    }
    let pairs_checked = if sampled { (SAMPLED_SOURCES * n) as u64 } else { pairs };

    let mut images: Vec<usize> = map.to_vec();
    images.sort_unstable();
    images.dedup();
    let dens = target.multi_bfs(&images);
    let k = *dens.iter().max().unwrap();
    if k == UNREACHED {
        return Err(Error::Construction("image does not reach every target vertex".into()));
    }

    let mut pre = vec![0usize; target.len()];
    for &y in map {
        pre[y] += 1;
    }
    let max_preimage = *pre.iter().max().unwrap();
    let preimage_bound = v_q(source.q(), beta);
    if BigUint::from(max_preimage) > preimage_bound {
        return Err(Error::Violation(format!("|φ^-1(y')| = {max_preimage} > V^Q(β) = {preimage_bound}")));
    }
    let mut overlap = vec![0usize; target.len()];
    for &y in &images {
        let near: Vec<usize> = match &tables {
            Some((_, t)) => t.ball(y, k).to_vec(),
            None => {
                let d = target.bfs(y);
                (0..target.len()).filter(|&z| d[z] <= k).collect()
            }
        };
        for z in near {
            overlap[z] += pre[y];
        }
    }
    if let Some(z) = overlap.iter().position(|&c| c == 0) {
        return Err(Error::Violation(format!("B_K(φ(x)) do not cover target vertex {z}")));
    }
    let max_overlap = *overlap.iter().max().unwrap();
    let overlap_bound = &preimage_bound * v_q(target.q(), k);
    if BigUint::from(max_overlap) > overlap_bound {
        return Err(Error::Violation(format!("overlap {max_overlap} > V^Q(β) V^Q'(K) = {overlap_bound}")));
    }
    Ok(RoughIsometry {
        source: source.clone(),
        target: target.clone(),
        map: map.to_vec(),
        beta,
        k,
        sampled,
        pairs_checked,
        max_preimage,
        preimage_bound,
        max_overlap,
        overlap_bound,
        tables,
    })
}

/// C_{β,K} = V^Q(β) Ω_{2K+β,Q} Ω_{β,Q'} Ω_{K,Q'}.
pub fn transfer_constant(beta: u32, k: u32, q: u32, q_prime: u32) -> BigUint {
    v_q(q, beta) * omega(2 * k + beta, q) * omega(beta, q_prime) * omega(k, q_prime)
}

/// One instance of the average transfer bound at z'.
#[derive(Clone, Debug)]
pub struct TransferReport {
    pub z_prime: usize,
    pub z: usize,
    pub r: u32,
    pub r_prime: u32,
    pub constant: BigUint,
    /// A_R f(z').
    pub lhs: BigRational,
    /// C_{β,K} times the average of (πf)∘φ over B_{R'}(z).
    pub rhs: BigRational,
    /// |B_{R'}(z)| / |B_R(z')|, bounded by C_{β,K}.
    pub volume_ratio: BigRational,
}

impl TransferReport {
    pub fn slack(&self) -> BigRational {
        &self.rhs - &self.lhs
    }
}

/// The source centre z for (z', R), when every ball the check uses lies within the safe radii.
pub fn transfer_is_safe(ri: &RoughIsometry, z_prime: usize, r: u32) -> Option<usize> {
    let (_, tt) = ri.tables()?;
    let z = (0..ri.source.len()).find(|&x| tt.dist(ri.map[x], z_prime) <= ri.k)?;
    let r_prime = r + 2 * ri.k + ri.beta;
    (ri.source.safe_radius(z) >= r_prime && ri.target.safe_radius(z_prime) >= r + 2 * ri.k).then_some(z)
}

/// Verifies the transfer bound and each inclusion and estimate it rests on.
pub fn transfer_inequality_check(
    ri: &RoughIsometry,
    f: &[BigRational],
    r: u32,
    z_prime: usize,
) -> Result<TransferReport> {
    let (st, tt) = ri.need_tables()?;
    let k = ri.k;
    if r <= k {
        return Err(Error::Domain(format!("R = {r} must exceed K = {k}")));
    }
    let z = transfer_is_safe(ri, z_prime, r)
        .ok_or_else(|| Error::Domain(format!("B_R({z_prime}) with R = {r} leaves the safe region")))?;
    let r_prime = r + 2 * k + ri.beta;
    let constant = transfer_constant(ri.beta, k, ri.source.q(), ri.target.q());
    let c = rat_from_uint(&constant);

    // {y : B_K(φ(y)) ∩ B_R(z') ≠ ∅} ⊆ B_{R'}(z)
    if let Some(y) = (0..ri.source.len()).find(|&y| tt.dist(ri.map[y], z_prime) <= r + k && st.dist(y, z) > r_prime) {
        return Err(Error::Violation(format!("covering inclusion fails at source vertex {y}")));
    }
    let mass: BigRational = tt.ball(z_prime, r).iter().map(|&w| f[w].abs()).sum();
    let g = ri.pi_pullback(f)?;
    let pulled: BigRational = st.ball(z, r_prime).iter().map(|&y| g[y].clone()).sum();
    if mass > pulled {
        return Err(Error::Violation(format!("mass {mass} on B_R(z') exceeds pulled-back mass {pulled}")));
    }
    let vol = BigRational::from_integer(tt.ball_size(z_prime, r).into());
    let vol_prime = BigRational::from_integer(st.ball_size(z, r_prime).into());
    let volume_ratio = &vol_prime / &vol;
    if volume_ratio > c {
        return Err(Error::Violation(format!("|B_R'(z)| / |B_R(z')| = {volume_ratio} > C = {constant}")));
    }
    let lhs = mass / vol;
    let rhs = &c * pulled / vol_prime;
    if lhs > rhs {
        return Err(Error::Violation(format!("transfer bound fails at z' = {z_prime}, R = {r}: {lhs} > {rhs}")));
    }
    Ok(TransferReport { z_prime, z, r, r_prime, constant, lhs, rhs, volume_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::graph::{triangle_splice, window_graph};
    use crate::tree::{Tree, TreeSpec};

    #[test]
    fn identity_is_an_isometry() {
        let t = Tree::new(TreeSpec::homogeneous(2).unwrap());
        let g = window_graph(&t, &t.origin(), 3).unwrap();
        let id: Vec<usize> = (0..g.len()).collect();
        let ri = validate_rough_isometry(&g, &g, &id, 0).unwrap();
        assert_eq!((ri.k(), ri.max_preimage, ri.max_overlap), (0, 1, 1));
        assert_eq!(transfer_constant(0, 0, 2, 2), BigUint::from(1u32));
        let mut f = vec![rat(0, 1); g.len()];
        f[3] = rat(2, 1);
        assert_eq!(ri.pi_pullback(&f).unwrap(), f);
        let rep = transfer_inequality_check(&ri, &f, 1, 0).unwrap();
        assert_eq!(rep.lhs, rep.rhs);
    }

    #[test]
    fn collapsing_map_is_rejected() {
        let t = Tree::new(TreeSpec::homogeneous(2).unwrap());
        let g = window_graph(&t, &t.origin(), 3).unwrap();
        let mut m: Vec<usize> = (0..g.len()).collect();
        let far = g.len() - 1;
        m[far] = 0;
        let err = validate_rough_isometry(&g, &g, &m, 1).err().unwrap();
        assert!(err.to_string().contains("not a rough isometry"), "{err}");
    }

    #[test]
    fn splice_map_constants() {
        let (base, g, phi) = triangle_splice(5).unwrap();
        let ri = validate_rough_isometry(&base, &g, &phi, 1).unwrap();
        assert_eq!(ri.k(), 1);
        assert!(!ri.sampled);
        assert!(validate_rough_isometry(&base, &g, &phi, 0).is_err());
        // δ at a vertex of the triangle, pulled back over B_1
        let mut f = vec![rat(0, 1); g.len()];
        f[g.len() - 2] = rat(1, 1);
        let pb = ri.pi_pullback(&f).unwrap();
        let (_, tt) = ri.tables().unwrap();
        for x in 0..base.len() {
            let want = if tt.dist(phi[x], g.len() - 2) <= 1 { rat(1, 1) } else { rat(0, 1) };
            assert_eq!(pb[x], want);
        }
        let rep = transfer_inequality_check(&ri, &f, 2, g.len() - 1).unwrap();
        assert_eq!(rep.constant, BigUint::from(4u32 * 15 * 3 * 3));
        assert!(rep.slack() > rat(0, 1));
    }
}
