//! Centred, uncentred and modified maximal functions, evaluated exactly.
//!
//! Candidate radii are the distances at which the ball mass jumps; between
//! jumps the mass is constant and the volume strictly increases.

mod domination;
mod embed;
mod uncentred;

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

pub use domination::{
    c_ab_inequality_holds, domination_check, mode_b_constant, mode_c_constants, paper_c_ab, DominationMode,
    DominationReport, DominationViolation, Dominator, ModeCConstants,
};
pub use embed::{embed_into_homogeneous, Embedding};
pub use uncentred::UncentredEvaluator;

use crate::certified::{Exponent, PowProduct};
use crate::error::{Error, Result};
use crate::exact::{rat_from_uint, to_f64};
use crate::function::FiniteFunction;
use crate::tree::{Tree, VertexAddress};

/// Relative f64 margin below which candidates are re-decided exactly.
pub(crate) const MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaximalKind {
    Centred,
    Uncentred,
    /// Normalisation by |B|^(1/σ), σ > 0.
    Modified(Exponent),
}

/// A supremum together with a ball attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalValue {
    pub value: PowProduct,
    pub radius: u32,
    pub center: VertexAddress,
}

impl MaximalValue {
    fn zero(x: &VertexAddress) -> Self {
        MaximalValue { value: PowProduct::zero(), radius: 0, center: x.clone() }
    }

    /// The value when it is rational (always for centred and uncentred).
    pub fn exact(&self) -> Option<BigRational> {
        self.value.exact()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// Cumulative mass of f on B_r(z) at each radius where it changes.
#[derive(Clone, Debug)]
pub(crate) struct Jumps {
    pub radii: Vec<u32>,
    pub mass: Vec<BigRational>,
}

impl Jumps {
    pub fn new(mut d: Vec<(u32, BigRational)>) -> Self {
        d.sort_by_key(|(r, _)| *r);
        let mut radii: Vec<u32> = Vec::new();
        let mut mass: Vec<BigRational> = Vec::new();
        let mut acc = BigRational::zero();
        for (r, q) in d {
            acc += q;
            if radii.last() == Some(&r) {
                *mass.last_mut().unwrap() = acc.clone();
            } else {
                radii.push(r);
                mass.push(acc.clone());
            }
        }
        Jumps { radii, mass }
    }

    pub fn from_centre(f: &FiniteFunction, z: &VertexAddress) -> Self {
        Jumps::new(f.iter().map(|(y, q)| (z.distance(y) as u32, q.clone())).collect())
    }
}

/// Σ_{B_r(z)} f.
pub fn ball_mass(f: &FiniteFunction, z: &VertexAddress, r: u32) -> BigRational {
    f.iter().filter(|(y, _)| z.distance(y) <= r as u64).map(|(_, q)| q.clone()).sum()
}

/// Average of f over B_r(z).
pub fn ball_average(tree: &Tree, f: &FiniteFunction, z: &VertexAddress, r: u32) -> BigRational {
    ball_mass(f, z, r) / rat_from_uint(&tree.ball_volume(z, r))
}

pub fn centred_max(tree: &Tree, f: &FiniteFunction, x: &VertexAddress) -> Result<MaximalValue> {
    if f.is_empty() {
        return Ok(MaximalValue::zero(x));
    }
    let j = Jumps::from_centre(f, x);
    let vols = tree.ball_volumes(x, *j.radii.last().unwrap());
    let mut best: Option<(BigRational, u32)> = None;
    for (r, m) in j.radii.iter().zip(&j.mass) {
        let v = m / rat_from_uint(&vols[*r as usize]);
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, *r));
        }
    }
    let (v, r) = best.unwrap();
    Ok(MaximalValue { value: PowProduct::rational(v), radius: r, center: x.clone() })
}

/// mass · vol^(-1/σ) for each candidate; picks the largest, smallest radius on ties.
pub(crate) fn select_modified(
    cands: &[(u32, BigRational, BigUint)],
    inv_sigma: &Exponent,
) -> Result<(PowProduct, u32)> {
    let e = inv_sigma.to_f64();
    let logs: Vec<f64> = cands.iter().map(|(_, m, v)| to_f64(m).ln() - e * big_ln(v)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(PowProduct, u32)> = None;
    let neg = inv_sigma.neg();
    for (i, (r, m, v)) in cands.iter().enumerate() {
        if logs[i] < top - MARGIN {
            continue;
        }
        let val = PowProduct::rational(m.clone()).mul(&PowProduct::pow(rat_from_uint(v), neg.clone()));
        match &best {
            None => best = Some((val, *r)),
            Some((b, _)) => {
                if val.cmp_certified(b)? == Ordering::Greater {
                    best = Some((val, *r));
                }
            }
        }
    }
    Ok(best.expect("nonempty candidate list"))
}

pub(crate) fn big_ln(v: &BigUint) -> f64 {
    match v.to_f64() {
        Some(x) if x.is_finite() => x.ln(),
        _ => {
            let bits = v.bits();
            let shifted = v >> (bits - 60);
            shifted.to_f64().unwrap().ln() + (bits - 60) as f64 * std::f64::consts::LN_2
        }
    }
}

/// sup_r |B_r(x)|^(-1/σ) Σ_{B_r(x)} f.
pub fn modified_max(tree: &Tree, f: &FiniteFunction, x: &VertexAddress, sigma: &Exponent) -> Result<MaximalValue> {
    if !sigma.is_positive() {
        return Err(Error::Domain(format!("σ must be positive, got {sigma}")));
    }
    if f.is_empty() {
        return Ok(MaximalValue::zero(x));
    }
    let j = Jumps::from_centre(f, x);
    let vols = tree.ball_volumes(x, *j.radii.last().unwrap());
    let cands: Vec<(u32, BigRational, BigUint)> =
        j.radii.iter().zip(&j.mass).map(|(r, m)| (*r, m.clone(), vols[*r as usize].clone())).collect();
    let (value, radius) = select_modified(&cands, &sigma.recip())?;
    Ok(MaximalValue { value, radius, center: x.clone() })
}

/// sup over all balls containing x.
pub fn uncentred_max(tree: &Tree, f: &FiniteFunction, x: &VertexAddress) -> Result<MaximalValue> {
    UncentredEvaluator::new(tree, f)?.eval(x)
}

pub fn evaluate(tree: &Tree, f: &FiniteFunction, x: &VertexAddress, kind: &MaximalKind) -> Result<MaximalValue> {
    match kind {
        MaximalKind::Centred => centred_max(tree, f, x),
        MaximalKind::Uncentred => uncentred_max(tree, f, x),
        MaximalKind::Modified(s) => modified_max(tree, f, x, s),
    }
}

/// The operator at every point of `xs`, in parallel.
pub fn evaluate_many(
    tree: &Tree,
    f: &FiniteFunction,
    xs: &[VertexAddress],
    kind: &MaximalKind,
) -> Result<Vec<MaximalValue>> {
    match kind {
        MaximalKind::Uncentred => {
            let ev = UncentredEvaluator::new(tree, f)?;
            xs.par_iter().map(|x| ev.eval(x)).collect()
        }
        _ => xs.par_iter().map(|x| evaluate(tree, f, x, kind)).collect(),
    }
}
