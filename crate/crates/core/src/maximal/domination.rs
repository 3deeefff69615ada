//! Pointwise domination of one maximal operator by another.
//!
//! Mode A: 𝓜f(x) <= C_{a,b}^{-1} 𝓜^b_τ f♯(Jx), with τ = log_a b and J the
//! embedding into T_b. Mode B: 𝓝f(x) <= C_B^{-1} 𝓜_{2τ} f(x). Mode C:
//! 𝓝f(x) <= K 𝓜^b_2 f♯(x) on trees with |B_r(x)| >= C b^r.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::{centred_max, embed_into_homogeneous, modified_max, Embedding, UncentredEvaluator};
use crate::certified::{Exponent, PowProduct, Real};
use crate::error::{Error, Result};
use crate::exact::{rat, rat_from_uint, upow};
use crate::function::FiniteFunction;
use crate::tree::{volume_profile, Family, Tree, VertexAddress};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DominationMode {
    A,
    B,
    C,
}

#[derive(Clone, Debug)]
pub struct DominationViolation {
    pub x: VertexAddress,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug)]
pub struct DominationReport {
    pub mode: DominationMode,
    pub tree: String,
    /// Constant in front of the dominating operator.
    pub constant: PowProduct,
    pub points: usize,
    pub violations: Vec<DominationViolation>,
    /// max_x lhs(x) / operator(x): the smallest constant that would do.
    pub empirical: PowProduct,
}

impl DominationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn ab(tree: &Tree) -> Result<(u64, u64)> {
    let b = tree.spec().b().ok_or_else(|| Error::Unsupported(format!("{} has no upper valence bound", tree.spec())))?;
    Ok((tree.spec().a() as u64, b as u64))
}

/// C_{a,b} = ((b-1)/(b+1))^(1/τ) (1 + 2/a).
pub fn paper_c_ab(a: u64, b: u64) -> PowProduct {
    let inv_tau = Exponent::tau(a, b).recip();
    PowProduct::pow(rat(b as i64 - 1, b as i64 + 1), inv_tau).mul_rational(&rat(a as i64 + 2, a as i64))
}

/// C_B = min(1, (1 + 2/a) ((b-1)/(b+1))^(1/(2τ))): |B| >= C_B |B_{2r}(x)|^(1/(2τ)) for balls B of radius r.
pub fn mode_b_constant(a: u64, b: u64) -> Result<PowProduct> {
    let e = Exponent::tau(a, b).recip().scale(&rat(1, 2));
    let c = PowProduct::pow(rat(b as i64 - 1, b as i64 + 1), e).mul_rational(&rat(a as i64 + 2, a as i64));
    Ok(match c.cmp_certified(&PowProduct::one())? {
        Ordering::Greater => PowProduct::one(),
        _ => c,
    })
}

/// Constants of mode C on a homogeneous tree.
#[derive(Clone, Debug)]
pub struct ModeCConstants {
    /// min |B_r(x)| / b^r over the checked radii.
    pub c_lb: BigRational,
    /// c² with b^R >= c V^b(2R)^(1/2) for every R.
    pub c_sq: BigRational,
    /// min over R <= 10 of b^(2R) / V^b(2R), for comparison.
    pub c_sq_window: BigRational,
    /// K = 1 / (c_lb c).
    pub k: PowProduct,
}

pub fn mode_c_constants(tree: &Tree, rmax: u32) -> Result<ModeCConstants> {
    let Family::Homogeneous { b } = *tree.spec().family() else {
        return Err(Error::Domain(format!(
            "{}: |B_r(x)| >= C b^r fails uniformly (balls below height 0 grow like a^r)",
            tree.spec()
        )));
    };
    let b = b as u64;
    let vols = tree.ball_volumes(&tree.origin(), rmax);
    let c_lb = vols
        .iter()
        .enumerate()
        .map(|(r, v)| rat_from_uint(v) / rat_from_uint(&upow(b, r as u32)))
        .min()
        .unwrap();
    let c_sq = rat(b as i64 - 1, b as i64 + 1);
    let c_sq_window = (0..=10u32)
        .map(|r| rat_from_uint(&upow(b, 2 * r)) / rat_from_uint(&volume_profile(b, 2 * r).0))
        .min()
        .unwrap();
    let inv = (c_lb.clone() * c_lb.clone() * c_sq.clone()).recip();
    let k = PowProduct::pow(inv, Exponent::rational(rat(1, 2)));
    Ok(ModeCConstants { c_lb, c_sq, c_sq_window, k })
}

/// Precomputed data for repeated checks over one window.
pub struct Dominator<'a> {
    tree: &'a Tree,
    mode: DominationMode,
    window: Vec<VertexAddress>,
    embedding: Option<Embedding>,
    constant: PowProduct,
    sigma: Exponent,
}

impl<'a> Dominator<'a> {
    pub fn new(tree: &'a Tree, mode: DominationMode, window: &[VertexAddress], embed_radius: u32) -> Result<Self> {
        let (a, b) = ab(tree)?;
        let tau = Exponent::tau(a, b);
        let (embedding, constant, sigma) = match mode {
            DominationMode::A => {
                let j = embed_into_homogeneous(tree, embed_radius)?;
                (Some(j), paper_c_ab(a, b).recip(), tau)
            }
            DominationMode::B => (None, mode_b_constant(a, b)?.recip(), tau.scale(&rat(2, 1))),
            DominationMode::C => (None, mode_c_constants(tree, 2 * embed_radius)?.k, Exponent::int(2)),
        };
        Ok(Dominator { tree, mode, window: window.to_vec(), embedding, constant, sigma })
    }

    pub fn constant(&self) -> &PowProduct {
        &self.constant
    }

    pub fn check(&self, f: &FiniteFunction) -> Result<DominationReport> {
        let (lhs, ops): (Vec<PowProduct>, Vec<PowProduct>) = match self.mode {
            DominationMode::A => {
                let j = self.embedding.as_ref().unwrap();
                let fs = j.sharp(f)?;
                let rows: Result<Vec<(PowProduct, PowProduct)>> = self
                    .window
                    .par_iter()
                    .map(|x| {
                        let jx = j.image(x).ok_or_else(|| Error::Domain(format!("{x} outside the embedding")))?;
                        let l = centred_max(self.tree, f, x)?.value;
                        let r = modified_max(j.target(), &fs, &jx, &self.sigma)?.value;
                        Ok((l, r))
                    })
                    .collect();
                rows?.into_iter().unzip()
            }
            DominationMode::B | DominationMode::C => {
                let ev = UncentredEvaluator::new(self.tree, f)?;
                let rows: Result<Vec<(PowProduct, PowProduct)>> = self
                    .window
                    .par_iter()
                    .map(|x| Ok((ev.eval(x)?.value, modified_max(self.tree, f, x, &self.sigma)?.value)))
                    .collect();
                rows?.into_iter().unzip()
            }
        };
        let mut violations = Vec::new();
        let mut worst: Option<(f64, usize)> = None;
        for (i, (l, op)) in lhs.iter().zip(&ops).enumerate() {
            let rhs = self.constant.mul(op);
            if l.cmp_certified(&rhs)? == Ordering::Greater {
                violations.push(DominationViolation {
                    x: self.window[i].clone(),
                    lhs: Real::from(l.clone()).format(1e-12),
                    rhs: Real::from(rhs).format(1e-12),
                });
            }
            if !op.is_zero() {
                let q = l.to_f64() / op.to_f64();
                if worst.map_or(true, |(w, _)| q > w) {
                    worst = Some((q, i));
                }
            }
        }
        let empirical = match worst {
            Some((_, i)) => lhs[i].mul(&ops[i].recip()),
            None => PowProduct::zero(),
        };
        Ok(DominationReport {
            mode: self.mode,
            tree: self.tree.spec().label(),
            constant: self.constant.clone(),
            points: self.window.len(),
            violations,
            empirical,
        })
    }
}

/// One-shot check of f over `window`; mode A embeds B_R(o) with R covering window and support.
pub fn domination_check(
    tree: &Tree,
    f: &FiniteFunction,
    mode: DominationMode,
    window: &[VertexAddress],
) -> Result<DominationReport> {
    let o = tree.origin();
    let reach = window.iter().chain(f.support()).map(|v| o.distance(v)).max().unwrap_or(0) as u32;
    Dominator::new(tree, mode, window, reach)?.check(f)
}

/// V^a(r) >= C V^b(r)^(1/τ), decided exactly.
pub fn c_ab_inequality_holds(a: u64, b: u64, r: u32) -> Result<bool> {
    let va = PowProduct::rational(rat_from_uint(&volume_profile(a, r).0));
    let vb: BigUint = volume_profile(b, r).0;
    let rhs = paper_c_ab(a, b).mul(&PowProduct::pow(rat_from_uint(&vb), Exponent::tau(a, b).recip()));
    Ok(va.cmp_certified(&rhs)? != Ordering::Less)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeSpec;

    #[test]
    fn c_ab_values() {
        // homogeneous: ((b-1)/(b+1)) (1 + 2/b)
        assert_eq!(paper_c_ab(3, 3).exact(), Some(rat(2 * 5, 4 * 3)));
        let c = paper_c_ab(2, 3).to_f64();
        assert!((c - 1.2916).abs() < 1e-3, "{c}");
        assert!((paper_c_ab(2, 4).to_f64() - 1.5492).abs() < 1e-3);
    }

    #[test]
    fn c_ab_inequality_for_positive_radii() {
        for (a, b) in [(2u64, 3u64), (2, 4), (3, 5), (2, 9)] {
            let above_one = paper_c_ab(a, b).cmp_certified(&PowProduct::one()).unwrap() == Ordering::Greater;
            assert_eq!(c_ab_inequality_holds(a, b, 0).unwrap(), !above_one, "r=0 for ({a},{b})");
            for r in 1..=40 {
                assert!(c_ab_inequality_holds(a, b, r).unwrap(), "({a},{b}) r={r}");
            }
        }
    }

    #[test]
    fn mode_c_constant_homogeneous() {
        let t = Tree::new(TreeSpec::homogeneous(2).unwrap());
        let c = mode_c_constants(&t, 8).unwrap();
        assert_eq!(c.c_lb, rat(1, 1));
        assert_eq!(c.c_sq, rat(1, 3));
        assert!(c.c_sq_window > c.c_sq);
        assert!(mode_c_constants(&Tree::new(TreeSpec::stromberg(2, 3).unwrap()), 4).is_err());
    }

    #[test]
    fn modes_on_homogeneous_delta() {
        let t = Tree::new(TreeSpec::homogeneous(2).unwrap());
        let w = t.enumerate_ball(&t.origin(), 3).unwrap();
        let f = FiniteFunction::delta(t.origin());
        for mode in [DominationMode::A, DominationMode::B, DominationMode::C] {
            let r = domination_check(&t, &f, mode, &w).unwrap();
            assert!(r.passed(), "{mode:?}: {:?}", r.violations.first());
        }
    }

    #[test]
    fn mode_a_stromberg_delta_fails_at_the_support() {
        let t = Tree::new(TreeSpec::stromberg(2, 3).unwrap());
        let w = t.enumerate_ball(&t.origin(), 2).unwrap();
        let f = FiniteFunction::delta(t.origin());
        let r = domination_check(&t, &f, DominationMode::A, &w).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].x, t.origin());
    }
}
