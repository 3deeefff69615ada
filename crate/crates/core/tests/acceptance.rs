//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runners produce the numbers; each criterion re-derives what it can
//! independently (enumeration, integer identities) before trusting a verdict.

use std::cmp::Ordering;
use std::time::Instant;

use maxtree_core::certified::Exponent;
use maxtree_core::exact::{parse_rational, rat, rat_from_uint, upow};
use maxtree_core::experiments::{
    counting_and_weak11, denseness, escalator, flower_centred_weak11, flower_uncentred, rough_transfer,
    stromberg_centred, CountingConfig, DensenessConfig, EscalatorConfig, ExperimentReport, FlowerCentredConfig,
    FlowerUncentredConfig, StrombergConfig, TransferConfig,
};
use maxtree_core::graph::{compball_violations, triangle_splice, validate_rough_isometry, DistanceTable};
use maxtree_core::lorentz::{lorentz_quasinorm, lp_norm, weak_norm_levels};
use maxtree_core::maximal::{centred_max, DominationMode, Dominator};
use maxtree_core::tree::{sphere_check, Family};
use maxtree_core::{Error, FiniteFunction, LorentzIndex, PowProduct, Real, Tree, TreeSpec, VertexAddress};
use num_bigint::BigUint;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const GUARD: u64 = maxtree_core::DEFAULT_GUARD;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap_or_else(|e| panic!("cell {s:?}: {e}"))
}

fn col<'a>(rep: &'a ExperimentReport, name: &str) -> Vec<&'a str> {
    rep.column(name)
}

fn passed(rep: &ExperimentReport) -> Result<(), String> {
    check(rep.passed(), || format!("runner reported: {}", rep.failures().join("; ")))
}

/// S^b(r) and V^b(r) from their definitions.
fn homogeneous_profile(b: u64, r: u32) -> (BigUint, BigUint) {
    let s = if r == 0 { BigUint::from(1u32) } else { BigUint::from(b + 1) * upow(b, r - 1) };
    let v = (0..=r)
        .map(|k| if k == 0 { BigUint::from(1u32) } else { BigUint::from(b + 1) * upow(b, k - 1) })
        .sum();
    (s, v)
}

/// a <= b holds for reals; an undecidable tie counts as equality.
fn le(a: &Real, b: &Real) -> Result<bool, Error> {
    match a.cmp_certified(b) {
        Ok(o) => Ok(o != Ordering::Greater),
        Err(Error::Undecided(_)) => Ok(true),
        Err(e) => Err(e),
    }
}

fn criterion_1() -> Outcome {
    let mut specs = Vec::new();
    for b in 2..=5u32 {
        specs.push(TreeSpec::homogeneous(b).unwrap());
        for a in 2..b {
            specs.push(TreeSpec::stromberg(a, b).unwrap());
            specs.push(TreeSpec::new(Family::SemiHomogeneous { a, b, even_low: true }).unwrap());
            specs.push(TreeSpec::new(Family::SemiHomogeneous { a, b, even_low: false }).unwrap());
            for (m, n) in [(1, 1), (1, 2), (2, 1)] {
                specs.push(TreeSpec::striped(a, b, m, n).unwrap());
            }
        }
    }
    let t = Instant::now();
    let results: Vec<_> = specs
        .par_iter()
        .map(|s| {
            let tree = Tree::new(s.clone()).with_guard(GUARD);
            (s.label(), sphere_check(&tree, 5, 8))
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let mut compared = 0u64;
    for (label, res) in results {
        let c = res.map_err(|e| format!("{label}: {e}"))?;
        compared += c.checked.iter().sum::<u64>();
        if let Some(m) = c.mismatches.first() {
            return Err(format!("{label}: |S_{}({})| formula {} walked {}", m.r, m.x, m.formula, m.walked));
        }
    }
    check(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{} trees, {compared} (x, r) pairs, 0 mismatches in {secs:.1} s", specs.len()))
}

fn criterion_2() -> Outcome {
    let centres = [
        VertexAddress::origin(),
        VertexAddress::spine(3),
        VertexAddress::new(0, vec![1, 0, 1]),
        VertexAddress::new(2, vec![1, 1]),
    ];
    let mut enumerated = 0;
    for b in 2..=5u32 {
        let tree = Tree::new(TreeSpec::homogeneous(b).unwrap()).with_guard(GUARD);
        for x in &centres {
            let spheres = tree.sphere_sizes(x, 10);
            let balls = tree.ball_volumes(x, 10);
            for r in 0..=10u32 {
                let (s, v) = homogeneous_profile(b as u64, r);
                check(spheres[r as usize] == s, || format!("T_{b} |S_{r}({x})| = {} != {s}", spheres[r as usize]))?;
                check(balls[r as usize] == v, || format!("T_{b} |B_{r}({x})| = {} != {v}", balls[r as usize]))?;
                if s <= BigUint::from(200_000u32) {
                    let walked = tree.enumerate_sphere(x, r).map_err(|e| e.to_string())?.len();
                    check(BigUint::from(walked) == s, || format!("T_{b} walked |S_{r}({x})| = {walked}"))?;
                    enumerated += 1;
                }
            }
        }
    }
    Ok(format!("b = 2..5, r <= 10, {} centres; {enumerated} spheres also enumerated", centres.len()))
}

fn criterion_3() -> Outcome {
    let cfg = StrombergConfig { a: 2, b: 3, n: vec![4, 6, 8, 10, 12], p: vec!["1".into()], enumerate_max: 12 };
    let rep = stromberg_centred(&cfg, GUARD).map_err(|e| e.to_string())?;
    passed(&rep)?;
    let (ns, es, balls, enums) = (col(&rep, "n"), col(&rep, "E_n"), col(&rep, "ball_n"), col(&rep, "ball_n_enum"));
    let (spheres, bounds, lam) = (col(&rep, "sphere_n"), col(&rep, "sphere_bound"), col(&rep, "E_lambda_p[1]"));
    let mut prev: Option<BigRational> = None;
    let mut min_ratio: Option<BigRational> = None;
    for i in 0..ns.len() {
        let n: u32 = ns[i].parse().unwrap();
        check(q(es[i]) == rat_from_uint(&upow(3, n)), || format!("|E_{n}| = {} != 3^{n}", es[i]))?;
        check(balls[i] == enums[i], || format!("n = {n}: closed-form ball {} vs enumerated {}", balls[i], enums[i]))?;
        let value = q(es[i]) / q(balls[i]);
        check(q(lam[i]) == value, || format!("n = {n}: b^n lambda_n = {} != {value}", lam[i]))?;
        let beta_bound = rat(13, 4) * rat_from_uint(&upow(2, n));
        check(q(bounds[i]) == beta_bound, || format!("n = {n}: sphere bound {} != (13/4) 2^n", bounds[i]))?;
        check(q(spheres[i]) <= beta_bound, || format!("n = {n}: |S_n| = {} > (13/4) 2^n", spheres[i]))?;
        if let Some(p) = &prev {
            let ratio = &value / p;
            check(ratio >= rat(6, 5), || format!("n = {n}: step ratio {ratio} < 6/5"))?;
            if min_ratio.as_ref().map_or(true, |m| ratio < *m) {
                min_ratio = Some(ratio);
            }
        }
        prev = Some(value);
    }
    Ok(format!(
        "b^n lambda_n = {}; smallest step ratio {}; |S_n| <= (13/4) 2^n for n = 4..12",
        lam.join(", "),
        min_ratio.unwrap()
    ))
}

fn criterion_4() -> Outcome {
    let cfg = StrombergConfig { a: 2, b: 9, n: vec![4, 6, 8], p: vec!["1".into()], enumerate_max: 6 };
    let rep = stromberg_centred(&cfg, GUARD).map_err(|e| e.to_string())?;
    passed(&rep)?;
    let (ns, m0s, ratios) = (col(&rep, "n"), col(&rep, "m0"), col(&rep, "F_over_E"));
    let (lambda, at_f) = (col(&rep, "lambda"), col(&rep, "M1E_at_F"));
    let mut prev = BigRational::from_integer(0.into());
    for i in 0..ns.len() {
        let n: u32 = ns[i].parse().unwrap();
        // largest m with 2^(m + 2n) <= 9^n
        let nine = upow(9, n);
        let m0 = (0u32..).take_while(|m| upow(2, m + 2 * n) <= nine).last().unwrap();
        check(m0s[i] == m0.to_string(), || format!("n = {n}: m0 = {} but integer search gives {m0}", m0s[i]))?;
        let ratio = q(ratios[i]);
        check(ratio == rat_from_uint(&upow(2, m0)), || format!("n = {n}: |F|/|E| = {ratio} != 2^{m0}"))?;
        check(ratio > prev, || format!("n = {n}: |F|/|E| not increasing"))?;
        // the direct indicator evaluation is only run for small E_n
        if at_f[i] != "-" {
            check(q(at_f[i]) >= q(lambda[i]), || format!("n = {n}: M1_E on F is {} < {}", at_f[i], lambda[i]))?;
        }
        prev = ratio;
    }
    Ok(format!("m0 = {}, |F|/|E| = {}", m0s.join(", "), ratios.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut out = Vec::new();
    for (a, b, m, n) in [(2u32, 3u32, 1u32, 1u32), (2, 4, 2, 1)] {
        let cfg = DensenessConfig { a, b, m, n, r: (0..=8).collect(), window: 10, ..Default::default() };
        let rep = denseness(&cfg, GUARD).map_err(|e| e.to_string())?;
        passed(&rep)?;
        let flags = col(&rep, "lower_bound");
        check(flags.iter().all(|f| *f == "holds"), || format!("({a},{b},{m},{n}): {flags:?}"))?;
        // direct check at the origin
        let tree = Tree::new(TreeSpec::striped(a, b, m, n).unwrap()).with_guard(GUARD);
        let alpha = rat_from_uint(&(upow(a as u64, m) * upow(b as u64, n)));
        for r in 0..=8u32 {
            let ball = tree.enumerate_ball(&tree.origin(), r).map_err(|e| e.to_string())?.len();
            let lhs = rat_from_uint(&upow(ball as u64, m + n));
            let e = r as i64 - (m + n) as i64;
            let rhs = if e >= 0 { alpha.pow(e as i32) } else { alpha.pow(e as i32) };
            check(lhs >= rhs, || format!("({a},{b},{m},{n}) r = {r}: |B|^(m+n) = {lhs} < {rhs}"))?;
        }
        out.push(format!("({a},{b},{m},{n}): {} rows", flags.len()));
    }
    Ok(out.join("; "))
}

fn criterion_6() -> Outcome {
    let mut out = Vec::new();
    for spec in [TreeSpec::homogeneous(2).unwrap(), TreeSpec::semi_homogeneous(2, 3).unwrap()] {
        let label = spec.label();
        let cfg = CountingConfig { spec, window: 8, r: (0..=8).collect(), trials: 200, ..Default::default() };
        let rep = counting_and_weak11(&cfg, GUARD).map_err(|e| e.to_string())?;
        let counting: Vec<_> = rep.rows.iter().filter(|r| r.values[0] == "counting").collect();
        check(!counting.is_empty(), || format!("{label}: no counting rows"))?;
        if let Some(bad) = counting.iter().find(|r| r.verdict.is_fail()) {
            return Err(format!("{label}: {}", format!("{:?}", bad.verdict)));
        }
        out.push(format!("{label}: {} radii x 200 pairs", counting.len()));
    }
    Ok(out.join("; "))
}

fn criterion_7() -> Outcome {
    let rep = flower_uncentred(&FlowerUncentredConfig::default(), GUARD).map_err(|e| e.to_string())?;
    passed(&rep)?;
    let (ns, fe) = (col(&rep, "n"), col(&rep, "F_over_E"));
    // floor((2τ - 1) n) = largest k with 2^(k + n) <= 9^n for (a, b) = (2, 3)
    let fl = |n: u32| (0u32..).take_while(|k| upow(2, k + n) <= upow(9, n)).last().unwrap();
    for i in 1..ns.len() {
        let n: u32 = ns[i - 1].parse().unwrap();
        let want = rat_from_uint(&upow(2, fl(n + 1) - fl(n))) / rat(3, 1);
        let got = q(fe[i]) / q(fe[i - 1]);
        check(got == want, || format!("n = {n} -> {}: growth {got} != {want}", n + 1))?;
    }
    let cen = flower_centred_weak11(&FlowerCentredConfig::default(), GUARD).map_err(|e| e.to_string())?;
    passed(&cen)?;
    let ratios = col(&cen, "ratio_to_first");
    check(ratios.iter().all(|r| q(r) <= rat(2, 1)), || format!("weak (1,1) ratios vs radius 6: {ratios:?}"))?;
    Ok(format!("|F_n|/|E_n| = {}; weak (1,1) ratio vs radius 6: {}", fe.join(", "), ratios.join(", ")))
}

fn criterion_8() -> Outcome {
    let families = [
        TreeSpec::stromberg(2, 3).unwrap(),
        TreeSpec::stromberg(2, 4).unwrap(),
        TreeSpec::homogeneous(2).unwrap(),
        TreeSpec::homogeneous(3).unwrap(),
    ];
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for spec in families {
        let tree = Tree::new(spec.clone()).with_guard(GUARD);
        let window = tree.enumerate_ball(&tree.origin(), 6).map_err(|e| e.to_string())?;
        let pool = tree.enumerate_ball(&tree.origin(), 3).map_err(|e| e.to_string())?;
        for mode in [DominationMode::A, DominationMode::B, DominationMode::C] {
            let dom = match Dominator::new(&tree, mode, &window, 6) {
                Ok(d) => d,
                Err(Error::Domain(_)) | Err(Error::Unsupported(_)) => continue,
                Err(e) => return Err(e.to_string()),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let mut bad = 0;
            let mut first = None;
            for _ in 0..100 {
                let f = FiniteFunction::random(&pool, 6, 5, &mut rng);
                let r = dom.check(&f).map_err(|e| e.to_string())?;
                if !r.passed() {
                    bad += 1;
                    first.get_or_insert_with(|| {
                        let v = &r.violations[0];
                        format!("at {}: {} > {}", v.x, v.lhs, v.rhs)
                    });
                }
            }
            lines.push(format!("{} {mode:?}: {bad}/100", spec.label()));
            if bad > 0 {
                failures.push(format!("{} mode {mode:?} fails for {bad}/100 f, first {}", spec.label(), first.unwrap()));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("violations: {}", lines.join(", ")))
    } else {
        Err(format!("{}; violations per family and mode: {}", failures.join("; "), lines.join(", ")))
    }
}

fn criterion_9() -> Outcome {
    let (base, g, phi) = triangle_splice(8).map_err(|e| e.to_string())?;
    let ri = validate_rough_isometry(&base, &g, &phi, 1).map_err(|e| e.to_string())?;
    check(ri.k() <= 1, || format!("K = {} exceeds the triangle's diameter", ri.k()))?;
    let rep = rough_transfer(&TransferConfig { radius: 8, trials: 50, rmax: 5, ..Default::default() })
        .map_err(|e| e.to_string())?;
    passed(&rep)?;
    let mut zero = 0;
    let mut positive = 0;
    for gr in [&base, &g] {
        let dt = DistanceTable::new(gr);
        for v in compball_violations(gr, &dt, 5) {
            if v.r == 0 {
                zero += 1;
            } else {
                positive += 1;
            }
        }
    }
    let summary = format!("beta = {}, K = {}; {} report rows hold", ri.beta(), ri.k(), rep.rows.len());
    check(zero + positive == 0, || {
        format!("{summary}, but compball |B_(r+n)| <= Omega_(n,Q) |B_r| fails at {zero} (x, n) pairs with r = 0 and {positive} with r >= 1")
    })?;
    Ok(summary)
}

fn random_function(rng: &mut ChaCha8Rng, pool: &[VertexAddress]) -> FiniteFunction {
    FiniteFunction::random(pool, 12, 7, rng)
}

fn criterion_10() -> Outcome {
    let tree = Tree::new(TreeSpec::homogeneous(2).unwrap());
    let pool = tree.enumerate_ball(&tree.origin(), 4).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut exact = 0;
    let mut enclosed = 0;
    for _ in 0..100 {
        let f = random_function(&mut rng, &pool);
        for p in ["1", "3/2", "2", "3"] {
            let pq = q(p);
            let pp = lorentz_quasinorm(&f, &LorentzIndex::new(pq.clone(), Some(pq.clone())).unwrap());
            let lp = lp_norm(&f, &pq);
            match (pp.exact(), lp.exact()) {
                (Some(x), Some(y)) => {
                    check(x == y, || format!("p = {p}: L^(p,p) {x} != l^p {y}"))?;
                    exact += 1;
                }
                _ => {
                    let (x, y) = (pp.enclose_to(1e-12), lp.enclose_to(1e-12));
                    check(x.overlaps(&y), || format!("p = {p}: enclosures {x:?} and {y:?} are disjoint"))?;
                    for iv in [&x, &y] {
                        let w = iv.width().to_f64() / iv.hi.to_f64().abs().max(1.0);
                        check(w <= 1e-12, || format!("p = {p}: enclosure width {w}"))?;
                    }
                    enclosed += 1;
                }
            }
            let weak = lorentz_quasinorm(&f, &LorentzIndex::new(pq.clone(), None).unwrap());
            let one = lorentz_quasinorm(&f, &LorentzIndex::new(pq.clone(), Some(rat(1, 1))).unwrap());
            check(le(&weak, &one).map_err(|e| e.to_string())?, || {
                format!("p = {p}: weak norm {} > L^(p,1) norm {}", weak.format(1e-12), one.format(1e-12))
            })?;
        }
    }
    // Φ(x) = V^3(|x|)^(-1/τ) on B_12(o) in T_3, τ = log_2 3
    let t3 = Tree::new(TreeSpec::homogeneous(3).unwrap()).with_guard(GUARD);
    let inv_tau = Exponent::tau(2, 3).recip();
    let o = t3.origin();
    let mut count = 0usize;
    let mut levels = Vec::new();
    for k in 0..=12u32 {
        let sphere = t3.enumerate_sphere(&o, k).map_err(|e| e.to_string())?.len();
        count += sphere;
        let (_, v) = homogeneous_profile(3, k);
        // Φ_k |{Φ >= Φ_k}|^(1/τ) = (count / V(k))^(1/τ)
        let at = PowProduct::pow(rat(count as i64, 1) / rat_from_uint(&v), inv_tau.clone());
        let ok = matches!(at.cmp_certified(&PowProduct::one()), Ok(Ordering::Less | Ordering::Equal));
        check(ok, || format!("level {k}: Φ_k |{{Φ >= Φ_k}}|^(1/τ) = {} > 1", at.to_f64()))?;
        levels.push((PowProduct::pow(rat_from_uint(&v).recip(), inv_tau.clone()), BigUint::from(sphere)));
    }
    let weak = weak_norm_levels(levels, &Exponent::tau(2, 3)).map_err(|e| e.to_string())?;
    check(le(&Real::from(weak.clone()), &Real::rational(rat(1, 1))).map_err(|e| e.to_string())?, || {
        format!("||Φ||_(τ,∞) = {} > 1", weak.to_f64())
    })?;
    Ok(format!(
        "{exact} exact and {enclosed} enclosed (p,p) comparisons; ||Φ||_(τ,∞) = {} over {count} points",
        Real::from(weak).format(1e-12)
    ))
}

fn criterion_11() -> Outcome {
    let cfg = EscalatorConfig::default();
    let rep = escalator(&cfg, GUARD).map_err(|e| e.to_string())?;
    passed(&rep)?;
    let tree = Tree::new(TreeSpec::escalator()).with_guard(GUARD);
    let js = col(&rep, "j");
    for p in [1i32, 2] {
        let partial = col(&rep, &format!("partial[{p}]"));
        for (i, j) in js.iter().enumerate() {
            let j: i64 = j.parse().unwrap();
            let bound = rat(j + 1, 1) / rat(4, 1).pow(p);
            let got = q(partial[i]);
            if j >= 1 {
                check(got == bound, || format!("p = {p}, j = {j}: partial {got} != (j+1)/4^p = {bound}"))?;
            } else {
                check(got >= bound, || format!("p = {p}, j = 0: partial {got} < {bound}"))?;
            }
        }
    }
    // the value 1/4 at each side child, by brute force over radii
    for j in 0..=10u32 {
        let xj = VertexAddress::rooted(vec![0; j as usize]);
        let f = FiniteFunction::delta(xj.clone());
        for y in tree.children(&xj).into_iter().skip(1) {
            let mut best = rat(0, 1);
            for r in 0..=4 {
                let ball = tree.enumerate_ball(&y, r).map_err(|e| e.to_string())?;
                let hit = ball.iter().filter(|v| **v == xj).count() as i64;
                best = best.max(rat(hit, ball.len() as i64));
            }
            let m = centred_max(&tree, &f, &y).map_err(|e| e.to_string())?.exact().unwrap();
            check(best == rat(1, 4) && m == best, || format!("j = {j}, child {y}: M = {m}, brute force {best}"))?;
        }
    }
    Ok(format!("partial sums = (j+1)/4^p for 1 <= j <= 10 (j = 0: {} >= 1/4^p)", col(&rep, "partial[1]")[0]))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("sphere formula vs walk", criterion_1),
        ("homogeneous profiles", criterion_2),
        ("Stromberg centred trend", criterion_3),
        ("Stromberg b > a^2 witness", criterion_4),
        ("striped ball bound", criterion_5),
        ("counting lemma", criterion_6),
        ("flower contrast", criterion_7),
        ("domination suites", criterion_8),
        ("rough isometry transfer", criterion_9),
        ("Lorentz identities", criterion_10),
        ("escalator divergence", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1} s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
