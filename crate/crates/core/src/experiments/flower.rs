//! Flower trees: the uncentred operator blows up while the centred one stays weak (1,1).

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stromberg::descendants_list;
use super::{fmt_pow, fmt_q, parse_ps, row_seed, weak11_ratio, ExperimentReport, Row, Verdict};
use crate::certified::{Exponent, PowProduct};
use crate::error::{Error, Result};
use crate::exact::{floor_n_log, rat, rat_from_uint, upow};
use crate::function::FiniteFunction;
use crate::graph::window_graph;
use crate::maximal::{ball_mass, centred_max};
use crate::tree::{volume_profile, Tree, TreeSpec, VertexAddress};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowerUncentredConfig {
    pub a: u32,
    pub b: u32,
    pub n: Vec<u32>,
    pub p: Vec<String>,
    /// Largest n whose witness balls are also enumerated.
    pub enumerate_max: u32,
}

impl Default for FlowerUncentredConfig {
    fn default() -> Self {
        FlowerUncentredConfig { a: 2, b: 3, n: vec![2, 3, 4, 5], p: vec!["1".into()], enumerate_max: 5 }
    }
}

fn check_ab(a: u32, b: u32) -> Result<()> {
    if !(2 <= a && a < b) {
        return Err(Error::Domain(format!("need 2 <= a < b, got ({a},{b})")));
    }
    Ok(())
}

struct Witness {
    n: u32,
    l: u32,
    l_certified: i64,
    tau_n: u32,
    radius: u32,
    depth_y: u32,
    e: BigUint,
    f: BigUint,
    ball: BigUint,
    ball_enum: Option<usize>,
    sphere: BigUint,
    sphere_formula: BigUint,
    inclusion: Option<bool>,
}

pub fn flower_uncentred(cfg: &FlowerUncentredConfig, guard: u64) -> Result<ExperimentReport> {
    check_ab(cfg.a, cfg.b)?;
    if cfg.n.iter().any(|n| *n == 0) {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let (a, b) = (cfg.a as u64, cfg.b as u64);
    let ps = parse_ps(&cfg.p)?;
    let tree = Tree::new(TreeSpec::flower(cfg.a, cfg.b)?).with_guard(guard);
    let tau = Exponent::tau(a, b);
    let mut columns: Vec<String> = [
        "n", "L", "R", "d_y", "E_n", "F_n", "ball_R", "ball_R_enum", "sphere_R", "sphere_formula", "witness",
        "F_over_E", "growth", "growth_identity",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for p in &cfg.p {
        columns.push(format!("lower[{p}]"));
    }
    let backend = format!("branch counts; enumeration for n <= {}", cfg.enumerate_max);
    let mut rep = ExperimentReport::new("flower-uncentred", cfg, &backend, columns);
    let g0 = VertexAddress::rooted(vec![0]);

    let data: Result<Vec<Witness>> = cfg
        .n
        .par_iter()
        .map(|&n| {
            // ⌊(2τ-1)n⌋ = ⌊2nτ⌋ - n and ⌊τn⌋, exact and certified
            let l = (floor_n_log(a, b, 2 * n) - n as u64) as u32;
            let l_certified = (tau.scale(&rat(2 * n as i64, 1)).floor()? - n).try_into().unwrap_or(i64::MIN);
            let tau_n = floor_n_log(a, b, n) as u32;
            let radius = tau_n + 2;
            let mut xd = vec![1u32];
            xd.resize(l as usize, 0);
            let x = VertexAddress::rooted(xd.clone());
            let y = VertexAddress::rooted(xd[..(l - tau_n) as usize].to_vec());
            let depth_y = l - tau_n;
            let e = tree.descendants(&g0, n - 1);
            let f: BigUint = (1..=cfg.a).map(|i| tree.descendants(&VertexAddress::rooted(vec![i]), l - 1)).sum();
            let ball = tree.ball_volume(&y, radius);
            let sphere = tree.sphere_size(&y, radius);
            let sphere_formula = upow(a, radius - 1) - upow(a, radius - 1 - depth_y) + upow(a, radius)
                + upow(b, radius - depth_y - 1);
            let (ball_enum, inclusion) = if n <= cfg.enumerate_max {
                let es = descendants_list(&tree, &g0, n - 1);
                let ind = FiniteFunction::indicator(es.clone());
                let inside = ball_mass(&ind, &y, radius) == rat_from_uint(&e) && y.distance(&x) <= radius as u64;
                (Some(tree.enumerate_ball(&y, radius)?.len()), Some(inside))
            } else {
                (None, None)
            };
            Ok(Witness {
                n,
                l,
                l_certified,
                tau_n,
                radius,
                depth_y,
                e,
                f,
                ball,
                ball_enum,
                sphere,
                sphere_formula,
                inclusion,
            })
        })
        .collect();
    let data = data?;

    for (i, d) in data.iter().enumerate() {
        let mut fails = Vec::new();
        if d.l as i64 != d.l_certified {
            fails.push(format!("integer L = {} but certified floor gives {}", d.l, d.l_certified));
        }
        if d.e != upow(b, d.n - 1) || d.f != upow(a, d.l) {
            fails.push(format!("|E_n| = {}, |F_n| = {} do not match b^(n-1), a^L", d.e, d.f));
        }
        // the furthest point of E_n from y is at distance d(y,o) + n
        if d.depth_y + d.n > d.radius || d.tau_n > d.radius {
            fails.push("E_n or x escapes B_R(y)".into());
        }
        if d.inclusion == Some(false) {
            fails.push("enumeration: E_n or x escapes B_R(y)".into());
        }
        if let Some(k) = d.ball_enum {
            if BigUint::from(k) != d.ball {
                fails.push(format!("|B_R(y)| = {} but enumeration gives {k}", d.ball));
            }
        }
        if d.sphere != d.sphere_formula {
            fails.push(format!("|S_R(y)| = {} differs from the branch formula {}", d.sphere, d.sphere_formula));
        }
        let sphere_cap = (upow(a, 2) * 2u32 + upow(b, 2)) * upow(b, d.n);
        if d.sphere > sphere_cap {
            fails.push(format!("|S_R(y)| = {} exceeds (2a^2 + b^2) b^n", d.sphere));
        }
        let witness = rat_from_uint(&d.e) / rat_from_uint(&d.ball);
        let ratio = rat_from_uint(&d.f) / rat_from_uint(&d.e);
        let (growth, identity) = if i == 0 {
            ("-".to_string(), "-".to_string())
        } else {
            let prev = &data[i - 1];
            let g = &ratio / (rat_from_uint(&prev.f) / rat_from_uint(&prev.e));
            // a^(L'-L) / b^(n'-n)
            let expect = rat_from_uint(&upow(a, d.l - prev.l)) / rat_from_uint(&upow(b, d.n - prev.n));
            if g != expect {
                fails.push(format!("growth {} != a^(L'-L)/b^(n'-n) = {}", fmt_q(&g), fmt_q(&expect)));
            }
            (fmt_q(&g), fmt_q(&expect))
        };
        let mut vals = vec![
            d.n.to_string(),
            d.l.to_string(),
            d.radius.to_string(),
            d.depth_y.to_string(),
            d.e.to_string(),
            d.f.to_string(),
            d.ball.to_string(),
            d.ball_enum.map_or("-".into(), |k| k.to_string()),
            d.sphere.to_string(),
            d.sphere_formula.to_string(),
            fmt_q(&witness),
            fmt_q(&ratio),
            growth,
            identity,
        ];
        for p in &ps {
            let lower = PowProduct::pow(witness.clone(), Exponent::rational(p.clone())).mul_rational(&ratio);
            vals.push(fmt_pow(&lower));
        }
        rep.rows.push(Row { values: vals, verdict: Verdict::from_failures(fails) });
    }
    rep.notes.push("x = [1,0,...,0] at depth L represents F_n; every x in F_n has a witness ball of the same shape".into());
    rep.notes.push("lower[p] = witness^p |F_n|/|E_n| bounds ||N 1_E||_p^p / ||1_E||_p^p from below".into());
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowerCentredConfig {
    pub a: u32,
    pub b: u32,
    pub trials: usize,
    pub seed: u64,
    /// Window radii around the root, the first is the reference scale.
    pub windows: Vec<u32>,
    /// Random supports are drawn from the ball of this radius around the root.
    pub support_radius: u32,
    pub support_max: usize,
    pub value_max: u32,
}

impl Default for FlowerCentredConfig {
    fn default() -> Self {
        FlowerCentredConfig {
            a: 2,
            b: 3,
            trials: 50,
            seed: 0,
            windows: vec![6, 8],
            support_radius: 3,
            support_max: 16,
            value_max: 5,
        }
    }
}

fn in_fb(v: &VertexAddress) -> bool {
    v.down.first() == Some(&0)
}

/// F_a into T_a: g_i = [i] goes to the (i-1)-th successor of o.
fn j_a(v: &VertexAddress) -> Option<VertexAddress> {
    if in_fb(v) {
        return None;
    }
    let mut d = v.down.clone();
    if let Some(first) = d.first_mut() {
        *first -= 1;
    }
    Some(VertexAddress::new(0, d))
}

/// F_b into T_b: g_0 goes to o.
fn j_b(v: &VertexAddress) -> Option<VertexAddress> {
    in_fb(v).then(|| VertexAddress::new(0, v.down[1..].to_vec()))
}

/// max lhs/rhs over the checked points; rhs = 0 forces lhs = 0.
#[derive(Default)]
struct Worst {
    ratio: BigRational,
    broken: Option<String>,
}

impl Worst {
    fn see(&mut self, lhs: &BigRational, rhs: &BigRational, what: impl FnOnce() -> String) {
        if lhs.is_zero() {
            return;
        }
        if rhs.is_zero() || lhs > rhs {
            if self.broken.is_none() {
                self.broken = Some(what());
            }
            if rhs.is_zero() {
                return;
            }
        }
        let r = lhs / rhs;
        if r > self.ratio {
            self.ratio = r;
        }
    }
}

struct PointChecks {
    /// Per window: weak ratio of M f over the window.
    weak: Vec<BigRational>,
    /// Per window: worst ratios for P1..P4 and subadditivity.
    worst: Vec<[Worst; 5]>,
}

pub fn flower_centred_weak11(cfg: &FlowerCentredConfig, guard: u64) -> Result<ExperimentReport> {
    check_ab(cfg.a, cfg.b)?;
    if cfg.windows.is_empty() || cfg.trials == 0 {
        return Err(Error::Domain("need at least one window and one trial".into()));
    }
    let (a, b) = (cfg.a as u64, cfg.b as u64);
    let tree = Tree::new(TreeSpec::flower(cfg.a, cfg.b)?).with_guard(guard);
    let ta = Tree::new(TreeSpec::homogeneous(cfg.a)?).with_guard(guard);
    let tb = Tree::new(TreeSpec::homogeneous(cfg.b)?).with_guard(guard);
    let root = tree.origin();
    let wmax = *cfg.windows.iter().max().unwrap();
    let columns: Vec<String> = [
        "window", "points", "rho_checked", "weak_ratio", "ratio_to_first", "P1_max", "P2_max", "P3_max", "P4_max",
        "subadd_max",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rep = ExperimentReport::new("flower-centred-weak11", cfg, "exact centred maxima on root windows", columns);

    // ϱ_a, ϱ_b in closed form against BFS on the window graph
    let g = window_graph(&tree, &root, wmax)?;
    let fa_idx: Vec<usize> = (0..g.len()).filter(|&i| !in_fb(g.label(i).unwrap())).collect();
    let fb_idx: Vec<usize> = (0..g.len()).filter(|&i| in_fb(g.label(i).unwrap())).collect();
    let bfs_a = g.multi_bfs(&fa_idx);
    let bfs_b = g.multi_bfs(&fb_idx);
    let rho = |v: &VertexAddress| -> (u32, u32) {
        let depth = v.down.len() as u32;
        if in_fb(v) {
            (depth, 0)
        } else {
            (0, depth + 1)
        }
    };
    let mut rho_fail = None;
    let mut points: Vec<(u32, VertexAddress, u32, u32)> = Vec::new();
    for i in 0..g.len() {
        let v = g.label(i).unwrap().clone();
        let (ra, rb) = rho(&v);
        if (ra, rb) != (bfs_a[i], bfs_b[i]) && rho_fail.is_none() {
            rho_fail = Some(format!("rho at {v}: closed form ({ra},{rb}), BFS ({},{})", bfs_a[i], bfs_b[i]));
        }
        points.push((v.down.len() as u32, v, ra, rb));
    }

    let pool = tree.enumerate_ball(&root, cfg.support_radius)?;
    let c_b = rat(b as i64 + 1, b as i64 - 1);
    let va = |r: u32| rat_from_uint(&volume_profile(a, r).0);
    let vb = |r: u32| rat_from_uint(&volume_profile(b, r).0);
    let val = |t: &Tree, f: &FiniteFunction, x: &VertexAddress| -> Result<BigRational> {
        if f.is_empty() {
            return Ok(BigRational::zero());
        }
        Ok(centred_max(t, f, x)?.exact().unwrap_or_else(BigRational::zero))
    };

    let results: Vec<PointChecks> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(row_seed("flower-centred-weak11", t as u64, cfg.seed));
            let f = FiniteFunction::random(&pool, cfg.support_max, cfg.value_max, &mut rng);
            let fa = f.restrict(|v| !in_fb(v));
            let fb = f.restrict(in_fb);
            let fa_sharp = fa.map_addresses(j_a)?;
            let fb_sharp = fb.map_addresses(j_b)?;
            let (la, lb) = (fa.l1(), fb.l1());
            let mut mf_all = Vec::with_capacity(points.len());
            let mut worst: Vec<[Worst; 5]> = cfg.windows.iter().map(|_| Default::default()).collect();
            for (depth, x, ra, rb) in &points {
                let mf = val(&tree, &f, x)?;
                let mfa = val(&tree, &fa, x)?;
                let mfb = val(&tree, &fb, x)?;
                let mut local: [Option<(BigRational, BigRational)>; 5] = Default::default();
                if in_fb(x) {
                    local[0] = Some((mfa.clone(), &c_b * &la / vb(*ra)));
                    local[3] = Some((mfb.clone(), &c_b * val(&tb, &fb_sharp, &j_b(x).unwrap())?));
                } else {
                    local[1] = Some((mfb.clone(), &lb / va(*rb)));
                    local[2] = Some((mfa.clone(), val(&ta, &fa_sharp, &j_a(x).unwrap())?));
                }
                local[4] = Some((mf.clone(), &mfa + &mfb));
                for (wi, &w) in cfg.windows.iter().enumerate() {
                    if *depth > w {
                        continue;
                    }
                    for (k, item) in local.iter().enumerate() {
                        if let Some((lhs, rhs)) = item {
                            worst[wi][k].see(lhs, rhs, || format!("trial {t}, x = {x}: {} > {}", fmt_q(lhs), fmt_q(rhs)));
                        }
                    }
                }
                mf_all.push(mf);
            }
            let weak = cfg
                .windows
                .iter()
                .map(|&w| {
                    let vals: Vec<BigRational> = points
                        .iter()
                        .zip(&mf_all)
                        .filter(|((d, ..), _)| *d <= w)
                        .map(|(_, m)| m.clone())
                        .collect();
                    weak11_ratio(&vals, &f.l1())
                })
                .collect();
            Ok(PointChecks { weak, worst })
        })
        .collect::<Result<_>>()?;

    let names = ["P1", "P2", "P3", "P4", "subadditivity"];
    let mut first: Option<BigRational> = None;
    for (wi, &w) in cfg.windows.iter().enumerate() {
        let mut fails = Vec::new();
        if let Some(m) = &rho_fail {
            fails.push(m.clone());
        }
        let weak = results.iter().map(|r| r.weak[wi].clone()).max().unwrap_or_else(BigRational::zero);
        let first_weak = first.get_or_insert_with(|| weak.clone()).clone();
        let mut maxima = Vec::new();
        for (k, name) in names.iter().enumerate() {
            let mut m = BigRational::zero();
            for r in &results {
                if let Some(msg) = &r.worst[wi][k].broken {
                    fails.push(format!("{name}: {msg}"));
                }
                if r.worst[wi][k].ratio > m {
                    m = r.worst[wi][k].ratio.clone();
                }
            }
            maxima.push(fmt_q(&m));
        }
        fails.truncate(10);
        let to_first = if first_weak.is_zero() { BigRational::one() } else { &weak / &first_weak };
        if to_first > rat(2, 1) {
            fails.push(format!("weak ratio {} is more than twice the first window's", fmt_q(&weak)));
        }
        let count = points.iter().filter(|(d, ..)| *d <= w).count();
        let mut vals = vec![w.to_string(), count.to_string(), g.len().to_string(), fmt_q(&weak), fmt_q(&to_first)];
        vals.extend(maxima);
        let verdict = if fails.is_empty() { Verdict::Trend } else { Verdict::Fail(fails.join("; ")) };
        rep.rows.push(Row { values: vals, verdict });
    }
    // the uncentred blow-up at the same (a, b), for contrast
    let contrast = flower_uncentred(&FlowerUncentredConfig { a: cfg.a, b: cfg.b, ..Default::default() }, guard)?;
    rep.notes.push(format!(
        "contrast, uncentred lower bound |F_n|/|E_n| witness for n = {}: {}",
        contrast.column("n").join(","),
        contrast.column("lower[1]").join(", ")
    ));
    rep.notes.push("P1..P4 and subadditivity columns hold max lhs/rhs, which must stay <= 1".into());
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncentred_examples() {
        let rep = flower_uncentred(&FlowerUncentredConfig::default(), u64::MAX).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
        // n = 3: L = 6, |F| = 64, R = 6; n = 4: |E| = 27
        assert_eq!(rep.cell(1, "L"), Some("6"));
        assert_eq!(rep.cell(1, "F_n"), Some("64"));
        assert_eq!(rep.cell(1, "R"), Some("6"));
        assert_eq!(rep.cell(2, "E_n"), Some("27"));
    }

    #[test]
    fn embeddings() {
        assert_eq!(j_a(&VertexAddress::rooted(vec![2, 1])), Some(VertexAddress::new(0, vec![1, 1])));
        assert_eq!(j_a(&VertexAddress::rooted(vec![])), Some(VertexAddress::origin()));
        assert_eq!(j_b(&VertexAddress::rooted(vec![0, 2])), Some(VertexAddress::new(0, vec![2])));
        assert_eq!(j_b(&VertexAddress::rooted(vec![1])), None);
    }

    #[test]
    fn centred_small_window() {
        let cfg = FlowerCentredConfig { trials: 4, windows: vec![3, 4], support_radius: 2, support_max: 5, ..Default::default() };
        let rep = flower_centred_weak11(&cfg, u64::MAX).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
    }

    #[test]
    fn delta_at_g0_has_no_a_part() {
        let f = FiniteFunction::delta(VertexAddress::rooted(vec![0]));
        assert!(f.restrict(|v| !in_fb(v)).is_empty());
    }
}
