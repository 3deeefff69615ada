//! Distribution functions and Lorentz quasi-norms of finitely supported functions.
//!
//! With distinct values v_1 > ... > v_k > 0 and n_i = #{f >= v_i}, E_f equals
//! n_i on [v_{i+1}, v_i), so
//! ‖f‖_{p,r}^r = (p/r) Σ n_i^{r/p} (v_i^r - v_{i+1}^r) and ‖f‖_{p,∞} = max_i v_i n_i^{1/p}.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::certified::{Exponent, PowProduct, Real, PRECISIONS};
use crate::error::{Error, Result};
use crate::exact::rat_from_uint;
use crate::function::FiniteFunction;
use crate::maximal::{big_ln, evaluate_many, MaximalKind, MARGIN};
use crate::tree::{Tree, VertexAddress};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LorentzIndex {
    p: Exponent,
    /// None is r = ∞.
    r: Option<BigRational>,
}

impl LorentzIndex {
    pub fn new(p: BigRational, r: Option<BigRational>) -> Result<Self> {
        Self::with_exponent(Exponent::rational(p), r)
    }

    /// p may be irrational (e.g. τ = log_a b) only for r = ∞.
    pub fn with_exponent(p: Exponent, r: Option<BigRational>) -> Result<Self> {
        if !at_least_one(&p)? {
            return Err(Error::Domain(format!("p must be >= 1, got {p}")));
        }
        if r.is_some() && p.as_rational().is_none() {
            return Err(Error::Domain(format!("finite r needs a rational p, got {p}")));
        }
        if let Some(r) = &r {
            if *r < BigRational::one() {
                return Err(Error::Domain(format!("r must be >= 1, got {r}")));
            }
        }
        Ok(LorentzIndex { p, r })
    }

    pub fn weak(p: Exponent) -> Result<Self> {
        Self::with_exponent(p, None)
    }

    pub fn p(&self) -> &Exponent {
        &self.p
    }

    pub fn r(&self) -> Option<&BigRational> {
        self.r.as_ref()
    }
}

/// E_f(α) = #{x : |f(x)| > α}.
pub fn distribution(f: &FiniteFunction, alpha: &BigRational) -> Result<BigUint> {
    if alpha.is_negative() {
        return Err(Error::Domain(format!("α must be >= 0, got {alpha}")));
    }
    Ok(BigUint::from(f.iter().filter(|(_, q)| *q > alpha).count()))
}

fn at_least_one(p: &Exponent) -> Result<bool> {
    if let Some(q) = p.as_rational() {
        return Ok(*q >= BigRational::one());
    }
    // an irrational exponent is never exactly 1
    for &prec in PRECISIONS.iter() {
        let iv = p.enclose(prec);
        if iv.lo.to_rational() > BigRational::one() {
            return Ok(true);
        }
        if iv.hi.to_rational() < BigRational::one() {
            return Ok(false);
        }
    }
    Err(Error::Undecided(*PRECISIONS.last().unwrap()))
}

/// Distinct nonzero |values| in decreasing order with n_i = #{|f| >= v_i}.
fn levels<'a, I: IntoIterator<Item = &'a BigRational>>(values: I) -> Vec<(BigRational, BigUint)> {
    let mut vals: Vec<BigRational> = values.into_iter().filter(|q| !q.is_zero()).map(|q| q.abs()).collect();
    vals.sort_by(|a, b| b.cmp(a));
    let mut out: Vec<(BigRational, BigUint)> = Vec::new();
    for (i, v) in vals.into_iter().enumerate() {
        match out.last_mut() {
            Some((w, n)) if *w == v => *n = BigUint::from(i + 1),
            _ => out.push((v, BigUint::from(i + 1))),
        }
    }
    out
}

pub fn lorentz_quasinorm(f: &FiniteFunction, idx: &LorentzIndex) -> Real {
    lorentz_quasinorm_values(f.iter().map(|(_, q)| q), idx)
}

/// The same quasi-norm for a function given by its values (zeros allowed).
pub fn lorentz_quasinorm_values<'a, I: IntoIterator<Item = &'a BigRational>>(values: I, idx: &LorentzIndex) -> Real {
    let lv = levels(values);
    if lv.is_empty() {
        return Real::rational(BigRational::zero());
    }
    match &idx.r {
        None => {
            let cands: Vec<(PowProduct, BigUint)> =
                lv.into_iter().map(|(v, n)| (PowProduct::rational(v), n)).collect();
            // values are distinct and sorted, so the cumulative counts are exact
            Real::Pow(max_weak_candidate(&cands, &idx.p).expect("rational levels are decidable"))
        }
        Some(r) => {
            let er = Exponent::rational(r.clone());
            let r_over_p = idx.p.recip().scale(r);
            let mut terms: Vec<(bool, Real)> = Vec::new();
            for (i, (v, n)) in lv.iter().enumerate() {
                let mut inc = vec![(false, Real::Pow(PowProduct::pow(v.clone(), er.clone())))];
                if let Some((w, _)) = lv.get(i + 1) {
                    inc.push((true, Real::Pow(PowProduct::pow(w.clone(), er.clone()))));
                }
                let count = Real::Pow(PowProduct::pow(rat_from_uint(n), r_over_p.clone()));
                terms.push((false, Real::Prod(vec![count, Real::Sum(inc)])));
            }
            let p = idx.p.as_rational().expect("finite r implies rational p");
            let inner = Real::Prod(vec![Real::rational(p / r), Real::Sum(terms)]);
            Real::Power(Box::new(inner), er.recip())
        }
    }
}

/// max_k t_k · N_k^(1/p) over levels t_1 >= t_2 >= ... with cumulative counts N_k.
fn max_weak_candidate(levels: &[(PowProduct, BigUint)], p: &Exponent) -> Result<PowProduct> {
    let inv = p.recip();
    let e = inv.to_f64();
    let logs: Vec<f64> = levels.iter().map(|(t, n)| t.to_f64().ln() + e * big_ln(n)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<PowProduct> = None;
    for (i, (t, n)) in levels.iter().enumerate() {
        if logs[i] < top - MARGIN {
            continue;
        }
        let v = t.mul(&PowProduct::pow(rat_from_uint(n), inv.clone()));
        best = match best {
            Some(b) if v.cmp_certified(&b)? != Ordering::Greater => Some(b),
            _ => Some(v),
        };
    }
    Ok(best.unwrap_or_else(PowProduct::zero))
}

/// ‖g‖_{p,∞} for g given as (value, multiplicity) pairs with possibly irrational values.
pub fn weak_norm_levels(mut levels: Vec<(PowProduct, BigUint)>, p: &Exponent) -> Result<PowProduct> {
    levels.retain(|(v, n)| !v.is_zero() && !n.is_zero());
    levels.sort_by(|a, b| b.0.to_f64().partial_cmp(&a.0.to_f64()).unwrap_or(Ordering::Equal));
    // settle the order of near-equal neighbours exactly
    for i in 1..levels.len() {
        let mut j = i;
        while j > 0 {
            let (x, y) = (levels[j - 1].0.to_f64(), levels[j].0.to_f64());
            if (x - y).abs() > MARGIN * x.abs().max(y.abs()) {
                break;
            }
            if levels[j - 1].0.cmp_certified(&levels[j].0)? == Ordering::Less {
                levels.swap(j - 1, j);
                j -= 1;
            } else {
                break;
            }
        }
    }
    let mut acc = BigUint::zero();
    let cum: Vec<(PowProduct, BigUint)> = levels
        .into_iter()
        .map(|(v, n)| {
            acc += n;
            (v, acc.clone())
        })
        .collect();
    max_weak_candidate(&cum, p)
}

/// The operator applied to an indicator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operator {
    Identity,
    Maximal(MaximalKind),
}

/// ‖T 1_E‖_{L^{p,∞}(window)} / ‖1_E‖_{L^{p,1}}; a lower bound for the operator's ratio.
pub fn restricted_weak_ratio(
    tree: &Tree,
    op: &Operator,
    set: &[VertexAddress],
    p: &BigRational,
    window: &[VertexAddress],
) -> Result<PowProduct> {
    if set.is_empty() {
        return Err(Error::Domain("empty set".into()));
    }
    let f = FiniteFunction::indicator(set.iter().cloned());
    let values: Vec<PowProduct> = match op {
        Operator::Identity => window.iter().map(|x| PowProduct::rational(f.get(x))).collect(),
        Operator::Maximal(kind) => evaluate_many(tree, &f, window, kind)?.into_iter().map(|m| m.value).collect(),
    };
    let e = Exponent::rational(p.clone());
    let num = weak_norm_levels(values.into_iter().map(|v| (v, BigUint::one())).collect(), &e)?;
    // ‖1_E‖_{p,1} = p |E|^(1/p)
    let den = PowProduct::pow(rat_from_uint(&BigUint::from(f.len())), e.recip()).mul_rational(p);
    Ok(num.mul(&den.recip()))
}

/// ‖f‖_{ℓ^p} for rational p, as a real.
pub fn lp_norm(f: &FiniteFunction, p: &BigRational) -> Real {
    let e = Exponent::rational(p.clone());
    let terms: Vec<(bool, Real)> =
        f.iter().map(|(_, q)| (false, Real::Pow(PowProduct::pow(q.clone(), e.clone())))).collect();
    if terms.is_empty() {
        return Real::rational(BigRational::zero());
    }
    Real::Power(Box::new(Real::Sum(terms)), e.recip())
}
