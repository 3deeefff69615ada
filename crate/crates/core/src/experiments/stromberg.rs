//! Strömberg-tree counterexamples and the striped-tree family of critical exponents.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_pow, fmt_q, parse_ps, ExperimentReport, PaperConstants, Row, Verdict};
use crate::certified::{format_interval, Exponent, PowProduct};
use crate::error::{Error, Result};
use crate::exact::{fmt_decimal, floor_n_log, parse_rational, rat, rat_from_uint, to_f64, upow};
use crate::function::FiniteFunction;
use crate::maximal::{ball_mass, centred_max};
use crate::tree::{Tree, TreeSpec, VertexAddress};

const INDICATOR_LIMIT: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrombergConfig {
    pub a: u32,
    pub b: u32,
    pub n: Vec<u32>,
    pub p: Vec<String>,
    /// Largest n whose balls are also counted by enumeration.
    pub enumerate_max: u32,
}

impl Default for StrombergConfig {
    fn default() -> Self {
        StrombergConfig { a: 2, b: 3, n: vec![4, 6, 8, 10, 12], p: vec!["1".into(), "17/10".into()], enumerate_max: 6 }
    }
}

/// Vertices exactly j successor steps below v.
pub(crate) fn descendants_list(tree: &Tree, v: &VertexAddress, j: u32) -> Vec<VertexAddress> {
    let mut cur = vec![v.clone()];
    for _ in 0..j {
        cur = cur.iter().flat_map(|u| tree.children(u)).collect();
    }
    cur
}

pub fn stromberg_centred(cfg: &StrombergConfig, guard: u64) -> Result<ExperimentReport> {
    let (a, b) = (cfg.a as u64, cfg.b as u64);
    if !(2 <= a && a < b) {
        return Err(Error::Domain(format!("need 2 <= a < b, got ({a},{b})")));
    }
    if let Some(n) = cfg.n.iter().find(|n| **n == 0 || **n % 2 == 1) {
        return Err(Error::Domain(format!("n must be even and positive, got {n}")));
    }
    let tree = Tree::new(TreeSpec::stromberg(cfg.a, cfg.b)?).with_guard(guard);
    if b > a * a {
        centred_case_ii(cfg, &tree)
    } else {
        centred_case_i(cfg, &tree)
    }
}

struct CaseI {
    n: u32,
    e: BigUint,
    ball: BigUint,
    ball_enum: Option<usize>,
    sphere: BigUint,
    quantities: Vec<PowProduct>,
}

fn centred_case_i(cfg: &StrombergConfig, tree: &Tree) -> Result<ExperimentReport> {
    let (a, b) = (cfg.a as u64, cfg.b as u64);
    let ps = parse_ps(&cfg.p)?;
    let consts = PaperConstants::new(a, b)?;
    let boundary = b == a * a;
    let mut columns: Vec<String> =
        ["n", "E_n", "ball_n", "ball_n_enum", "sphere_n", "sphere_bound"].iter().map(|s| s.to_string()).collect();
    for p in &cfg.p {
        columns.push(format!("E_lambda_p[{p}]"));
        columns.push(format!("growth[{p}]"));
    }
    let backend = format!("closed form; enumeration for n <= {}", cfg.enumerate_max);
    let mut rep = ExperimentReport::new("stromberg-centred", cfg, &backend, columns);
    let o = tree.origin();

    let data: Result<Vec<CaseI>> = cfg
        .n
        .par_iter()
        .map(|&n| {
            let w = VertexAddress::spine(n);
            let e = tree.descendants(&w, n);
            let ball = tree.ball_volume(&o, n);
            let ball_enum = if n <= cfg.enumerate_max { Some(tree.enumerate_ball(&o, n)?.len()) } else { None };
            let sphere = tree.sphere_size(&o, n);
            let inv = rat_from_uint(&ball).recip();
            let quantities = ps
                .iter()
                .map(|p| PowProduct::rational(rat_from_uint(&e)).mul(&PowProduct::pow(inv.clone(), Exponent::rational(p.clone()))))
                .collect();
            Ok(CaseI { n, e, ball, ball_enum, sphere, quantities })
        })
        .collect();
    let data = data?;

    // p strictly below τ: the quantity must increase with n
    let below_tau: Vec<bool> = ps
        .iter()
        .map(|p| {
            let ap = PowProduct::pow(rat(a as i64, 1), Exponent::rational(p.clone()));
            Ok(ap.cmp_certified(&PowProduct::int(b))? == Ordering::Less)
        })
        .collect::<Result<_>>()?;

    for (i, d) in data.iter().enumerate() {
        let mut fails = Vec::new();
        if d.e != upow(b, d.n) {
            fails.push(format!("|E_n| = {} != b^n", d.e));
        }
        if let Some(k) = d.ball_enum {
            if BigUint::from(k) != d.ball {
                fails.push(format!("closed form |B_n| = {} but enumeration gives {k}", d.ball));
            }
        }
        let bound = if boundary {
            rat(d.n as i64, 1) * rat_from_uint(&upow(a, d.n))
        } else {
            consts.beta_ab().unwrap() * rat_from_uint(&upow(a, d.n))
        };
        if rat_from_uint(&d.sphere) > bound {
            fails.push(format!("|S_n| = {} exceeds {}", d.sphere, fmt_q(&bound)));
        }
        let mut vals = vec![
            d.n.to_string(),
            d.e.to_string(),
            d.ball.to_string(),
            d.ball_enum.map_or("-".into(), |k| k.to_string()),
            d.sphere.to_string(),
            fmt_q(&bound),
        ];
        for (j, q) in d.quantities.iter().enumerate() {
            vals.push(fmt_pow(q));
            if i == 0 {
                vals.push("-".into());
            } else {
                let g = q.mul(&data[i - 1].quantities[j].recip());
                if below_tau[j] && g.cmp_certified(&PowProduct::one())? != Ordering::Greater {
                    fails.push(format!("p = {}: quantity did not increase (growth {})", cfg.p[j], fmt_pow(&g)));
                }
                vals.push(fmt_pow(&g));
            }
        }
        rep.rows.push(Row { values: vals, verdict: Verdict::from_failures(fails) });
    }
    rep.notes.push(format!("tau enclosure: {}", tau_text(a, b)));
    rep.notes.push("lambda~_n = 1/|B_n(x)| for x in E_n (all of E_n lies on one horocycle, so one centre suffices)".into());
    if boundary {
        rep.notes.push("b = a^2: sphere bound n a^n".into());
    } else {
        rep.notes.push(format!("beta_ab = {}", fmt_q(&consts.beta_ab().unwrap())));
    }
    Ok(rep)
}

fn tau_text(a: u64, b: u64) -> String {
    let t = Exponent::tau(a, b);
    match t.as_rational() {
        Some(q) => fmt_q(q),
        None => format_interval(&t.enclose(128)),
    }
}

struct CaseII {
    n: u32,
    m0: u64,
    h0: u32,
    e: BigUint,
    f: BigUint,
    ball: BigUint,
    mass: BigUint,
    mass_direct: Option<BigRational>,
    max_direct: Option<PowProduct>,
    sphere: BigUint,
    m0_certified: i64,
}

fn centred_case_ii(cfg: &StrombergConfig, tree: &Tree) -> Result<ExperimentReport> {
    let (a, b) = (cfg.a as u64, cfg.b as u64);
    let columns: Vec<String> = [
        "n", "m0", "h0", "E_n", "F_n_m0", "ball_h0", "mass_E", "lambda", "M1E_at_F", "sphere_h0", "sphere_bound",
        "F_over_E", "growth",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let backend = format!("closed form; direct maxima when |E_n| <= {INDICATOR_LIMIT}");
    let mut rep = ExperimentReport::new("stromberg-centred", cfg, &backend, columns);
    let tau = Exponent::tau(a, b);

    let data: Result<Vec<CaseII>> = cfg
        .n
        .par_iter()
        .map(|&n| {
            // a^{m+2n} <= b^n exactly, and ⌊n(τ - 2)⌋ from the certified enclosure
            let m0 = floor_n_log(a, b, n) - 2 * n as u64;
            let m0_certified =
                (tau.scale(&rat(n as i64, 1)).floor()? - BigInt::from(2 * n)).to_i64().unwrap_or(i64::MIN);
            let h0 = m0 as u32 + 2 * n;
            let w = VertexAddress::spine(n);
            let x = VertexAddress::new(0, vec![0; m0 as usize]);
            let e = tree.descendants(&w, n);
            let f = tree.descendants(&w, n + m0 as u32);
            let ball = tree.ball_volume(&x, h0);
            let sphere = tree.sphere_size(&x, h0);
            // E_n by the depth j of its meeting point with [w_n, x]
            let mut mass = BigUint::from(0u32);
            for j in 0..=n {
                let anc = tree.ancestor(&x, n + m0 as u32 - j).expect("ancestor exists");
                let count = if j < n {
                    let next = tree.ancestor(&x, n + m0 as u32 - j - 1).expect("ancestor exists");
                    tree.descendants(&anc, n - j) - tree.descendants(&next, n - j - 1)
                } else {
                    BigUint::one()
                };
                if (n + m0 as u32 - j) + (n - j) <= h0 {
                    mass += count;
                }
            }
            let (mass_direct, max_direct) = if e <= BigUint::from(INDICATOR_LIMIT) {
                let ind = FiniteFunction::indicator(descendants_list(tree, &w, n));
                (Some(ball_mass(&ind, &x, h0)), Some(centred_max(tree, &ind, &x)?.value))
            } else {
                (None, None)
            };
            Ok(CaseII { n, m0, h0, e, f, ball, mass, mass_direct, max_direct, sphere, m0_certified })
        })
        .collect();
    let data = data?;

    for (i, d) in data.iter().enumerate() {
        let mut fails = Vec::new();
        if d.m0 as i64 != d.m0_certified {
            fails.push(format!("integer m0 = {} but certified floor gives {}", d.m0, d.m0_certified));
        }
        if d.e != upow(b, d.n) || d.f != upow(b, d.n) * upow(a, d.m0 as u32) {
            fails.push(format!("|E_n| = {}, |F_n,m0| = {} do not match b^n, b^n a^m0", d.e, d.f));
        }
        let lambda = rat_from_uint(&d.e) / rat_from_uint(&d.ball);
        let avg = rat_from_uint(&d.mass) / rat_from_uint(&d.ball);
        if avg < lambda {
            fails.push(format!("A_h0 1_E(x) = {} < lambda = {}", fmt_q(&avg), fmt_q(&lambda)));
        }
        if let Some(m) = &d.mass_direct {
            if *m != rat_from_uint(&d.mass) {
                fails.push(format!("direct mass {} != layered mass {}", fmt_q(m), d.mass));
            }
        }
        if let Some(v) = &d.max_direct {
            if v.cmp_certified(&PowProduct::rational(lambda.clone()))? == Ordering::Less {
                fails.push(format!("M1_E(x) = {} < lambda", fmt_pow(v)));
            }
        }
        let bound = upow(a, d.h0) * 2u32 + upow(b, d.n + 1) * 2u32;
        if d.sphere > bound {
            fails.push(format!("|S_h0(x)| = {} > 2a^h0 + 2b^(n+1) = {bound}", d.sphere));
        }
        let ratio = rat_from_uint(&d.f) / rat_from_uint(&d.e);
        let growth = if i == 0 {
            "-".to_string()
        } else {
            let prev = rat_from_uint(&data[i - 1].f) / rat_from_uint(&data[i - 1].e);
            let g = &ratio / prev;
            if g <= BigRational::one() && d.m0 > data[i - 1].m0 {
                fails.push("F/E did not grow".into());
            }
            fmt_q(&g)
        };
        let vals = vec![
            d.n.to_string(),
            d.m0.to_string(),
            d.h0.to_string(),
            d.e.to_string(),
            d.f.to_string(),
            d.ball.to_string(),
            d.mass.to_string(),
            fmt_q(&lambda),
            d.max_direct.as_ref().map_or("-".into(), fmt_pow),
            d.sphere.to_string(),
            bound.to_string(),
            fmt_q(&ratio),
            growth,
        ];
        rep.rows.push(Row { values: vals, verdict: Verdict::from_failures(fails) });
    }
    rep.notes.push(format!("tau enclosure: {}", tau_text(a, b)));
    rep.notes.push(format!(
        "lambda = b^n/|B_h0(x)| replaces the symbolic {} ; x = s^(n+m0)(p^n(o)) is one representative, the stabiliser of p^n(o) acts transitively on F_n,m0",
        PaperConstants::new(a, b)?.lambda_ab_symbolic()
    ));
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensenessConfig {
    pub a: u32,
    pub b: u32,
    pub m: u32,
    pub n: u32,
    pub r: Vec<u32>,
    pub p: Vec<String>,
    pub window: u32,
    /// Grid bound for the exponent search.
    pub grid_max: u32,
    pub target: String,
}

impl Default for DensenessConfig {
    fn default() -> Self {
        DensenessConfig {
            a: 2,
            b: 3,
            m: 1,
            n: 1,
            r: (0..=8).collect(),
            p: vec!["1".into(), "6/5".into()],
            window: 10,
            grid_max: 8,
            target: "13/10".into(),
        }
    }
}

fn striped_exponent(a: u64, b: u64, m: u32, n: u32) -> Result<Exponent> {
    let base = a
        .checked_pow(m)
        .and_then(|x| b.checked_pow(n).and_then(|y| x.checked_mul(y)))
        .ok_or_else(|| Error::Domain(format!("a^m b^n overflows for m = {m}, n = {n}")))?;
    Ok(Exponent::log_ratio(rat((m + n) as i64, 1), b, base))
}

/// The (m, n) with m, n <= max whose s = log_α b is nearest to `target`, and |s - target| as an enclosure upper bound.
pub fn closest_striped_exponent(a: u64, b: u64, max: u32, target: &BigRational) -> Result<(u32, u32, Exponent, BigRational)> {
    let t = to_f64(target);
    let mut best: Option<(f64, u32, u32, Exponent)> = None;
    for m in 1..=max {
        for n in 1..=max {
            let s = striped_exponent(a, b, m, n)?;
            let d = (s.to_f64() - t).abs();
            if best.as_ref().map_or(true, |(bd, ..)| d < *bd) {
                best = Some((d, m, n, s));
            }
        }
    }
    let (_, m, n, s) = best.ok_or_else(|| Error::Domain("empty grid".into()))?;
    let iv = s.enclose(128);
    let lo = iv.lo.to_rational() - target;
    let hi = iv.hi.to_rational() - target;
    let dist = if lo.abs() > hi.abs() { lo.abs() } else { hi.abs() };
    Ok((m, n, s, dist))
}

pub fn denseness(cfg: &DensenessConfig, guard: u64) -> Result<ExperimentReport> {
    let (a, b) = (cfg.a as u64, cfg.b as u64);
    if !(2 <= a && a < b) {
        return Err(Error::Domain(format!("need 2 <= a < b, got ({a},{b})")));
    }
    if b > a * a {
        return Err(Error::Domain(format!("b = {b} > a^2 = {} lies outside the denseness range", a * a)));
    }
    let ps = parse_ps(&cfg.p)?;
    let tree = Tree::new(TreeSpec::striped(cfg.a, cfg.b, cfg.m, cfg.n)?).with_guard(guard);
    let period = cfg.m + cfg.n;
    let base = upow(a, cfg.m) * upow(b, cfg.n);
    let s = striped_exponent(a, b, cfg.m, cfg.n)?;
    // s = 2 would need b = α², impossible for m, n >= 1 and a < b <= a²
    let s_is_two = s.as_rational() == Some(&rat(2, 1));

    let mut columns: Vec<String> =
        ["r", "points", "min_ball", "lower_bound", "ball_o", "C_emp"].iter().map(|s| s.to_string()).collect();
    for p in &cfg.p {
        columns.push(format!("divergence[{p}]"));
    }
    let mut rep = ExperimentReport::new("denseness", cfg, "closed form over an enumerated window", columns);

    // window vertices grouped by (height, distance from o)
    let layers = tree.enumerate_layers(&tree.origin(), cfg.window)?;
    let mut groups: BTreeMap<(i64, u32), (usize, VertexAddress)> = BTreeMap::new();
    for (d, layer) in layers.iter().enumerate() {
        for v in layer {
            groups.entry((v.height(), d as u32)).or_insert((0, v.clone())).0 += 1;
        }
    }
    let alpha_r = |r: u32| PowProduct::pow(rat_from_uint(&base), Exponent::rational(rat(r as i64, period as i64)));

    for &r in &cfg.r {
        let mut fails = Vec::new();
        let mut points = 0usize;
        let mut min_ball: Option<BigUint> = None;
        for ((_, d), (count, rep_v)) in &groups {
            if d + r > cfg.window {
                continue;
            }
            points += count;
            let vol = tree.ball_volume(rep_v, r);
            // |B|^{m+n} >= (a^m b^n)^{r-m-n}, multiplied through when r < m+n
            let ok = if r >= period {
                vol.pow(period) >= base.pow(r - period)
            } else {
                vol.pow(period) * base.pow(period - r) >= base.pow(0)
            };
            if !ok {
                fails.push(format!("|B_{r}({rep_v})| = {vol} breaks the lower bound"));
            }
            if min_ball.as_ref().map_or(true, |m| vol < *m) {
                min_ball = Some(vol);
            }
        }
        let mut vals = vec![
            r.to_string(),
            points.to_string(),
            min_ball.map_or("-".into(), |m| m.to_string()),
            if fails.is_empty() { "holds".into() } else { "fails".into() },
        ];
        if r > 0 && r % (2 * period) == 0 {
            let ball_o = tree.ball_volume(&tree.origin(), r);
            let mut scale = alpha_r(r);
            if s_is_two {
                scale = scale.mul_rational(&rat(r as i64, 1));
            }
            let c = PowProduct::rational(rat_from_uint(&ball_o)).mul(&scale.recip());
            vals.push(ball_o.to_string());
            vals.push(fmt_pow(&c));
            for p in &ps {
                let apr = PowProduct::pow(rat_from_uint(&base), Exponent::rational(p * rat(r as i64, period as i64)));
                vals.push(fmt_pow(&PowProduct::rational(rat_from_uint(&upow(b, r))).mul(&apr.recip())));
            }
        } else {
            vals.extend(std::iter::repeat("-".to_string()).take(2 + ps.len()));
        }
        rep.rows.push(Row { values: vals, verdict: Verdict::from_failures(fails) });
    }
    let s_text = match s.as_rational() {
        Some(q) => fmt_q(q),
        None => format_interval(&s.enclose(128)),
    };
    rep.notes.push(format!("s = log_alpha b = {s_text}"));
    rep.notes.push(format!(
        "upper-bound branch: {}",
        if s_is_two { "C r alpha^r (s = 2, reconstructed)" } else { "C alpha^r (s < 2)" }
    ));
    let target = parse_rational(&cfg.target)?;
    let (m, n, e, dist) = closest_striped_exponent(a, b, cfg.grid_max, &target)?;
    rep.notes.push(format!(
        "closest exponent to {} with m,n <= {}: m = {m}, n = {n}, s in {}, |s - target| <= {}",
        cfg.target,
        cfg.grid_max,
        format_interval(&e.enclose(128)),
        fmt_decimal(&dist, 6, true)
    ));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_i_small() {
        let cfg = StrombergConfig { n: vec![2, 4], ..Default::default() };
        let rep = stromberg_centred(&cfg, u64::MAX).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
        assert_eq!(rep.cell(1, "E_n"), Some("81"));
        assert_eq!(rep.cell(1, "ball_n"), rep.cell(1, "ball_n_enum"));
    }

    #[test]
    fn case_ii_m0() {
        let cfg = StrombergConfig { a: 2, b: 9, n: vec![10], p: vec![], ..Default::default() };
        let rep = stromberg_centred(&cfg, u64::MAX).unwrap();
        assert_eq!(rep.cell(0, "m0"), Some("11"));
        assert!(rep.passed(), "{:?}", rep.failures());
    }

    #[test]
    fn odd_n_rejected() {
        let cfg = StrombergConfig { n: vec![3], ..Default::default() };
        assert!(stromberg_centred(&cfg, u64::MAX).is_err());
    }

    #[test]
    fn symmetric_striped_exponent() {
        // m = n: α = √(ab), s = 2 ln b / ln(ab)
        let s = striped_exponent(2, 3, 1, 1).unwrap();
        assert!((s.to_f64() - 2.0 * 3f64.ln() / 6f64.ln()).abs() < 1e-12);
        let (_, _, _, d) = closest_striped_exponent(2, 3, 8, &rat(13, 10)).unwrap();
        assert!(d < rat(1, 20));
    }

    #[test]
    fn denseness_rejects_b_above_a_squared() {
        let cfg = DensenessConfig { b: 5, ..Default::default() };
        assert!(denseness(&cfg, u64::MAX).is_err());
    }
}
