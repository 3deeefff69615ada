//! The rough-isometry transfer chain on a compact perturbation of a T_2 window.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_q, fmt_real, parse_ps, real_le, row_seed, ExperimentReport, Row, Verdict};
use crate::certified::{format_interval, Exponent, PowProduct, Real};
use crate::error::{Error, Result};
use crate::exact::{rat, rat_from_uint};
use crate::graph::{
    compball_ii_violations, compball_violations, estball_violations, level_set_bound, omega, transfer_constant,
    transfer_inequality_check, transfer_is_safe, triangle_splice, v_q, validate_rough_isometry, window_graph,
    Averages, RoughIsometry, SimpleGraph,
};
use crate::lorentz::{lorentz_quasinorm_values, LorentzIndex};
use crate::tree::{Tree, TreeSpec};

const ID: &str = "rough-transfer";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// The centre of the window replaced by a 3-cycle.
    Triangle,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferConfig {
    pub perturbation: Perturbation,
    pub radius: u32,
    pub trials: usize,
    pub seed: u64,
    pub rmax: u32,
    pub p: Vec<String>,
    /// Random supports lie within this distance of the splice.
    pub support_radius: u32,
    pub support_max: usize,
    pub value_max: u32,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            perturbation: Perturbation::Triangle,
            radius: 8,
            trials: 50,
            seed: 0,
            rmax: 5,
            p: vec!["1".into(), "2".into()],
            support_radius: 4,
            support_max: 8,
            value_max: 5,
        }
    }
}

fn build(cfg: &TransferConfig) -> Result<(SimpleGraph, SimpleGraph, Vec<usize>, u32)> {
    match cfg.perturbation {
        Perturbation::Triangle => {
            let (base, g, phi) = triangle_splice(cfg.radius)?;
            Ok((base, g, phi, 1))
        }
        Perturbation::Identity => {
            let t = Tree::new(TreeSpec::homogeneous(2)?);
            let base = window_graph(&t, &t.origin(), cfg.radius)?;
            let id = (0..base.len()).collect();
            Ok((base.clone(), base, id, 0))
        }
    }
}

fn pow_q(q: &BigUint, e: BigRational) -> PowProduct {
    PowProduct::pow(rat_from_uint(q), Exponent::rational(e))
}

fn prod(ts: Vec<Real>) -> Real {
    Real::Prod(ts)
}

/// Σ_{R <= K} V(R)^(1/p) and the bound 2^(1/p) Ω_{K+2,Q'}^(1/p).
fn step_one(k: u32, q: u32, p: &BigRational) -> (Real, Real) {
    let inv = BigRational::one() / p;
    let sum = Real::Sum((0..=k).map(|r| (false, Real::Pow(pow_q(&v_q(q, r), inv.clone())))).collect());
    let bound = Real::Pow(pow_q(&(omega(k + 2, q) * 2u32), inv));
    (sum, bound)
}

struct Ctx<'a> {
    cfg: &'a TransferConfig,
    ri: &'a RoughIsometry,
    ps: Vec<BigRational>,
    k: u32,
    beta: u32,
    q_t: u32,
    constant: BigUint,
}

/// One random f through every link of the chain; returns (cells, failures).
fn run_trial(ctx: &Ctx, f: &[BigRational]) -> Result<(Vec<String>, Vec<String>)> {
    let ri = ctx.ri;
    let (st, tt) = ri.tables().ok_or_else(|| Error::Unsupported("graphs too large for distance tables".into()))?;
    let (src, tgt) = (ri.source(), ri.target());
    let (k, beta, rmax) = (ctx.k, ctx.beta, ctx.cfg.rmax);
    let mut fails = Vec::new();
    let av = Averages::new(tt, f, rmax);

    // level sets of A_R and the uncentred 𝒜_R
    let mut level_checks = 0usize;
    for r in 0..=rmax {
        let a: Vec<BigRational> =
            (0..tgt.len()).filter(|&z| tgt.safe_radius(z) >= r).map(|z| av.a(r, z).clone()).collect();
        if let Some((v, l, rr)) = level_set_bound(&a, f, &v_q(ctx.q_t, r)) {
            fails.push(format!("A_{r}: #{{>= {}}} = {l} > V({r}) * {rr}", fmt_q(&v)));
        }
        let u: Vec<BigRational> =
            (0..tgt.len()).filter(|&z| tgt.safe_radius(z) >= 2 * r).map(|z| av.a_unc(r, z)).collect();
        if let Some((v, l, rr)) = level_set_bound(&u, f, &v_q(ctx.q_t, 2 * r)) {
            fails.push(format!("uncentred A_{r}: #{{>= {}}} = {l} > V({}) * {rr}", fmt_q(&v), 2 * r));
        }
        level_checks += 2;
        for p in &ctx.ps {
            let idx = LorentzIndex::new(p.clone(), Some(p.clone()))?;
            let lhs = lorentz_quasinorm_values(&a, &idx);
            let rhs = prod(vec![Real::Pow(pow_q(&v_q(ctx.q_t, r), BigRational::one() / p)), lorentz_quasinorm_values(f, &idx)]);
            if !real_le(&lhs, &rhs)? {
                fails.push(format!("p = {p}: ||A_{r} f|| = {} > V({r})^(1/p) ||f||", fmt_real(&lhs)));
            }
        }
    }

    // Step I on {safe >= K}
    let d_one: Vec<usize> = (0..tgt.len()).filter(|&z| tgt.safe_radius(z) >= k).collect();
    let mk_upper: Vec<BigRational> = d_one.iter().map(|&z| av.m_upper(k, z)).collect();
    for p in &ctx.ps {
        let idx = LorentzIndex::new(p.clone(), Some(p.clone()))?;
        let (sum, _) = step_one(k, ctx.q_t, p);
        let lhs = lorentz_quasinorm_values(&mk_upper, &idx);
        let rhs = prod(vec![sum, lorentz_quasinorm_values(f, &idx)]);
        if !real_le(&lhs, &rhs)? {
            fails.push(format!("p = {p}: ||M^K f|| = {} above the Step I sum", fmt_real(&lhs)));
        }
    }

    // transfer inequality at every safe (z', R)
    let mut transfer_checks = 0usize;
    let mut worst = BigRational::zero();
    let mut top_r = vec![None; tgt.len()];
    for zp in 0..tgt.len() {
        for r in (k + 1)..=rmax {
            if transfer_is_safe(ri, zp, r).is_none() {
                break;
            }
            top_r[zp] = Some(r);
            match transfer_inequality_check(ri, f, r, zp) {
                Ok(rep) => {
                    transfer_checks += 1;
                    if !rep.rhs.is_zero() && rep.lhs.clone() / &rep.rhs > worst {
                        worst = rep.lhs / rep.rhs;
                    }
                }
                Err(Error::Violation(m)) => fails.push(m),
                Err(e) => return Err(e),
            }
        }
    }

    // M_K f(z') <= C · Mg(z) with g = (πf)∘φ and Mg truncated to safe radii
    let g = ri.pi_pullback(f)?;
    let reach = rmax + 2 * k + beta;
    let avg = Averages::new(st, &g, reach);
    let mg: Vec<BigRational> = (0..src.len())
        .map(|z| (0..=reach.min(src.safe_radius(z))).map(|r| avg.a(r, z).clone()).max().unwrap_or_else(BigRational::zero))
        .collect();
    let c = rat_from_uint(&ctx.constant);
    let mut mk_lower = Vec::new();
    let mut mf = Vec::new();
    let mut domination = 0usize;
    for zp in 0..tgt.len() {
        let Some(rt) = top_r[zp] else { continue };
        let z = transfer_is_safe(ri, zp, rt).expect("checked above");
        let lhs = ((k + 1)..=rt).map(|r| av.a(r, zp).clone()).max().unwrap_or_else(BigRational::zero);
        if lhs > &c * &mg[z] {
            fails.push(format!("M_K f({zp}) = {} > C Mg({z})", fmt_q(&lhs)));
        }
        domination += 1;
        if rt == rmax {
            mk_lower.push(lhs.clone());
            mf.push(av.m(zp));
        }
    }
    let c_mg: Vec<BigRational> = mg.iter().map(|v| &c * v).collect();
    if let Some((v, l, rr)) = level_set_bound(&mk_lower, &c_mg, &v_q(ctx.q_t, k)) {
        fails.push(format!("#{{M_K f >= {}}} = {l} > V(K) #{{C Mg >= .}} = V(K) * {rr}", fmt_q(&v)));
    }
    let vk = rat_from_uint(&v_q(ctx.q_t, k));
    let f_scaled: Vec<BigRational> = f.iter().map(|v| v * &vk).collect();
    if let Some((v, l, rr)) = level_set_bound(&g, &f_scaled, &ri.overlap_bound) {
        fails.push(format!("#{{g >= {}}} = {l} > V(beta) V(K) * {rr}", fmt_q(&v)));
    }

    let mut ends = Vec::new();
    for p in &ctx.ps {
        let inv = BigRational::one() / p;
        let idx_in = LorentzIndex::new(p.clone(), Some(BigRational::one()))?;
        let idx_out = LorentzIndex::new(p.clone(), Some(p.clone()))?;
        let nf = lorentz_quasinorm_values(f, &idx_in);
        let ng = lorentz_quasinorm_values(&g, &idx_in);
        let vb = v_q(ctx.q_t.max(src.q()), beta);
        let vkq = v_q(ctx.q_t, k);
        // ‖g‖_{p,1} <= V(K)^(1+1/p) V(β)^(1/p) ‖f‖_{p,1}
        let g_const = pow_q(&vkq, BigRational::one() + &inv).mul(&pow_q(&vb, inv.clone()));
        if !real_le(&ng, &prod(vec![Real::Pow(g_const), nf.clone()]))? {
            fails.push(format!("p = {p}: ||g|| = {} above V(K)^(1+1/p) V(beta)^(1/p) ||f||", fmt_real(&ng)));
        }
        // ‖Mf‖ ||g|| <= StepI ||f|| ||g|| + C V(K)^(1+2/p) V(β)^(1/p) ‖Mg‖ ||f||
        let nmf = lorentz_quasinorm_values(&mf, &idx_out);
        let nmg = lorentz_quasinorm_values(&mg, &idx_out);
        let (sum, _) = step_one(k, ctx.q_t, p);
        let chain = pow_q(&vkq, BigRational::one() + rat(2, 1) * &inv).mul(&pow_q(&vb, inv)).mul_rational(&c);
        let lhs = prod(vec![nmf.clone(), ng.clone()]);
        let rhs = Real::Sum(vec![
            (false, prod(vec![sum.clone(), nf.clone(), ng.clone()])),
            (false, prod(vec![Real::Pow(chain), nmg.clone(), nf.clone()])),
        ]);
        if !real_le(&lhs, &rhs)? {
            fails.push(format!("p = {p}: end-to-end bound fails, ||Mf|| = {}", fmt_real(&nmf)));
        }
        let emp = match nf.exact() {
            Some(q) if q.is_zero() => "-".to_string(),
            _ => format_interval(&nmf.enclose(64).div(&nf.enclose(64), 64)),
        };
        ends.push(emp);
    }
    let mut cells = vec![
        level_checks.to_string(),
        transfer_checks.to_string(),
        fmt_q(&worst),
        domination.to_string(),
        mf.len().to_string(),
    ];
    cells.extend(ends);
    Ok((cells, fails))
}

pub fn rough_transfer(cfg: &TransferConfig) -> Result<ExperimentReport> {
    let ps = parse_ps(&cfg.p)?;
    if cfg.trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let (base, g, phi, beta) = build(cfg)?;
    let ri = validate_rough_isometry(&base, &g, &phi, beta)?;
    let k = ri.k();
    let (q, q_t) = (base.q(), g.q());
    let constant = transfer_constant(beta, k, q, q_t);
    let mut columns: Vec<String> = ["section", "trial", "support", "level_checks", "transfer_checks", "transfer_max_ratio", "domination_points", "end_points"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for p in &cfg.p {
        columns.push(format!("emp_norm[{p}]"));
    }
    let mut rep = ExperimentReport::new(ID, cfg, "exact distance tables", columns.clone());
    let width = columns.len();
    let dash = |v: &mut Vec<String>| v.resize(width, "-".into());

    // geometry: ball bounds on both graphs, preimage and overlap counts, Step I constants
    let (st, tt) = ri.tables().ok_or_else(|| Error::Unsupported("graphs too large for distance tables".into()))?;
    let mut geo_fails = Vec::new();
    let mut compball_r0 = 0usize;
    for (name, gr, dt) in [("G", &base, st), ("G'", &g, tt)] {
        for v in estball_violations(gr, dt, cfg.rmax).into_iter().chain(compball_ii_violations(gr, dt, k.max(1), cfg.rmax)) {
            geo_fails.push(format!("{name}: {} at {} r = {}: {} > {}", v.lemma, v.x, v.r, v.lhs, v.rhs));
        }
        for v in compball_violations(gr, dt, cfg.rmax) {
            if v.r == 0 {
                compball_r0 += 1;
            } else {
                geo_fails.push(format!("{name}: compball at {} r = {}: {} > {}", v.x, v.r, v.lhs, v.rhs));
            }
        }
    }
    if BigUint::from(ri.max_preimage) > ri.preimage_bound || BigUint::from(ri.max_overlap) > ri.overlap_bound {
        geo_fails.push(format!(
            "preimage {} (bound {}) or overlap {} (bound {}) too large",
            ri.max_preimage, ri.preimage_bound, ri.max_overlap, ri.overlap_bound
        ));
    }
    for p in &ps {
        let (sum, bound) = step_one(k, q_t, p);
        if !real_le(&sum, &bound)? {
            geo_fails.push(format!("p = {p}: Step I sum {} > {}", fmt_real(&sum), fmt_real(&bound)));
        }
    }
    let mut geo = vec!["geometry".to_string(), "-".into(), "-".into()];
    dash(&mut geo);
    rep.rows.push(Row { values: geo, verdict: Verdict::from_failures(geo_fails) });

    // trial 0: δ at distance 4 from the splice
    let splice = phi[0];
    let pool: Vec<usize> = (0..g.len()).filter(|&v| tt.dist(splice, v) <= cfg.support_radius).collect();
    let far = (0..g.len()).find(|&v| tt.dist(splice, v) == 4.min(cfg.radius)).unwrap_or(splice);
    let ctx = Ctx { cfg, ri: &ri, ps, k, beta, q_t, constant: constant.clone() };
    let rows: Vec<Result<(usize, Vec<String>, Vec<String>)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut f = vec![BigRational::zero(); g.len()];
            if t == 0 {
                f[far] = BigRational::one();
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(row_seed(ID, t as u64, cfg.seed));
                let n = rng.gen_range(1..=cfg.support_max.min(pool.len()).max(1));
                for &v in pool.choose_multiple(&mut rng, n) {
                    f[v] = rat(rng.gen_range(1..=cfg.value_max.max(1)) as i64, 1);
                }
            }
            let support = f.iter().filter(|v| !v.is_zero()).count();
            let (cells, fails) = run_trial(&ctx, &f)?;
            Ok((support, cells, fails))
        })
        .collect();
    for (t, r) in rows.into_iter().enumerate() {
        let (support, cells, fails) = r?;
        let mut vals = vec!["trial".to_string(), t.to_string(), support.to_string()];
        vals.extend(cells);
        rep.rows.push(Row { values: vals, verdict: Verdict::from_failures(fails) });
    }
    rep.notes.push(format!(
        "beta = {beta}, K = {k}, Q = {q}, Q' = {q_t}, C_beta,K = {constant}, max preimage {} <= {}, max overlap {} <= {}",
        ri.max_preimage, ri.preimage_bound, ri.max_overlap, ri.overlap_bound
    ));
    rep.notes.push(format!("compball at r = 0 fails at {compball_r0} (vertex, n) pairs; the bound is only checked for r >= 1"));
    rep.notes.push("norms: inputs in L^(p,1), outputs in L^(p,p); the end-to-end check is multiplied through by ||g||".into());
    Ok(rep)
}
