//! Subcommand bodies.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use maxtree_core::exact::{fmt_rational, parse_rational};
use maxtree_core::experiments::{Row, Verdict};
use maxtree_core::graph::{transfer_constant, validate_rough_isometry, window_graph};
use maxtree_core::lorentz::lorentz_quasinorm;
use maxtree_core::maximal::evaluate_many;
use maxtree_core::tree::sphere_check as core_sphere_check;
use maxtree_core::{
    Experiment, ExperimentReport, Exponent, FiniteFunction, LorentzIndex, MaximalKind, PowProduct, Real, SimpleGraph,
    Tree, TreeSpec,
};
use serde_json::{json, Value};

use crate::overrides;
use crate::{FamilyArgs, FamilyName, Global, KindName, Output};

pub fn spec_of(f: &FamilyArgs) -> Result<TreeSpec> {
    Ok(match f.family {
        FamilyName::Homogeneous => TreeSpec::homogeneous(f.b)?,
        FamilyName::Stromberg => TreeSpec::stromberg(f.a, f.b)?,
        FamilyName::Striped => TreeSpec::striped(f.a, f.b, f.m, f.n)?,
        FamilyName::SemiHomogeneous => TreeSpec::semi_homogeneous(f.a, f.b)?,
        FamilyName::Flower => TreeSpec::flower(f.a, f.b)?,
        FamilyName::Escalator => TreeSpec::escalator(),
    })
}

fn tree_of(g: &Global, f: &FamilyArgs) -> Result<Tree> {
    Ok(Tree::new(spec_of(f)?).with_guard(g.guard))
}

fn family_json(f: &FamilyArgs) -> Result<Value> {
    Ok(serde_json::to_value(spec_of(f)?)?)
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn fmt_pow(v: &PowProduct, tol: f64) -> String {
    Real::Pow(v.clone()).format(tol)
}

pub fn gen(g: &Global, f: &FamilyArgs, radius: u32) -> Result<Output> {
    let tree = tree_of(g, f)?;
    let graph = window_graph(&tree, &tree.origin(), radius)?;
    let mut v = graph.to_json();
    if let Value::Object(m) = &mut v {
        m.insert("config".into(), json!({"command": "gen", "tree": family_json(f)?, "radius": radius}));
    }
    Ok(Output::Raw(serde_json::to_string_pretty(&v)? + "\n"))
}

pub fn sphere_check(g: &Global, f: &FamilyArgs, x_max: u32, r_max: u32) -> Result<Output> {
    let tree = tree_of(g, f)?;
    let check = core_sphere_check(&tree, x_max, r_max)?;
    let cfg = json!({"tree": family_json(f)?, "x_max": x_max, "r_max": r_max});
    let mut rep =
        ExperimentReport::new("sphere-check", &cfg, "closed form vs walk", strings(&["r", "centres", "mismatches"]));
    for (r, n) in check.checked.iter().enumerate() {
        let bad: Vec<String> = check
            .mismatches
            .iter()
            .filter(|m| m.r as usize == r)
            .map(|m| format!("|S_{}({})| formula {} walked {}", m.r, m.x, m.formula, m.walked))
            .collect();
        let values = vec![r.to_string(), n.to_string(), bad.len().to_string()];
        rep.rows.push(Row { values, verdict: Verdict::from_failures(bad) });
    }
    Ok(Output::Report(rep))
}

fn parse_sigma(s: &str, tree: &Tree) -> Result<Exponent> {
    let tau = |k: i64| -> Result<Exponent> {
        let b = tree.spec().b().context("tau needs a family with two valences")?;
        Ok(Exponent::tau(tree.spec().a() as u64, b as u64).scale(&maxtree_core::exact::rat(k, 1)))
    };
    match s.trim() {
        "tau" => tau(1),
        "2tau" => tau(2),
        q => Ok(Exponent::rational(parse_rational(q)?)),
    }
}

pub fn maximal(
    g: &Global,
    f: &FamilyArgs,
    kind: KindName,
    sigma: Option<&str>,
    input: &Path,
    radius: u32,
) -> Result<Output> {
    let tree = tree_of(g, f)?;
    let func = FiniteFunction::from_json(&read_json(input)?)?;
    for v in func.support() {
        tree.check(v).with_context(|| format!("input vertex {v}"))?;
    }
    let kind = match (kind, sigma) {
        (KindName::Centred, None) => MaximalKind::Centred,
        (KindName::Uncentred, None) => MaximalKind::Uncentred,
        (KindName::Modified, Some(s)) => MaximalKind::Modified(parse_sigma(s, &tree)?),
        (KindName::Modified, None) => bail!("--kind modified needs --sigma"),
        (_, Some(_)) => bail!("--sigma only applies to --kind modified"),
    };
    let xs = tree.enumerate_ball(&tree.origin(), radius)?;
    let vals = evaluate_many(&tree, &func, &xs, &kind)?;
    let kind_name = match &kind {
        MaximalKind::Centred => "centred".to_string(),
        MaximalKind::Uncentred => "uncentred".to_string(),
        MaximalKind::Modified(s) => format!("modified sigma={s}"),
    };
    let cfg = json!({
        "tree": family_json(f)?,
        "kind": kind_name,
        "input": input.display().to_string(),
        "radius": radius,
    });
    let mut rep =
        ExperimentReport::new("maximal", &cfg, "exact maxima", strings(&["x", "value", "radius", "centre"]));
    for (x, v) in xs.iter().zip(&vals) {
        let values = vec![x.to_string(), fmt_pow(&v.value, g.tol), v.radius.to_string(), v.center.to_string()];
        rep.rows.push(Row { values, verdict: Verdict::Pass });
    }
    Ok(Output::Report(rep))
}

pub fn norm(g: &Global, p: &str, r: &str, input: &Path) -> Result<Output> {
    let func = FiniteFunction::from_json(&read_json(input)?)?;
    let pq = parse_rational(p)?;
    let rq = match r.trim() {
        "inf" | "infinity" => None,
        s => Some(parse_rational(s)?),
    };
    let idx = LorentzIndex::new(pq.clone(), rq.clone())?;
    let value = lorentz_quasinorm(&func, &idx);
    let r_text = rq.as_ref().map(fmt_rational).unwrap_or_else(|| "inf".into());
    let cfg = json!({"p": fmt_rational(&pq), "r": r_text, "input": input.display().to_string()});
    let mut rep = ExperimentReport::new("norm", &cfg, "exact", strings(&["p", "r", "support", "norm"]));
    let values = vec![fmt_rational(&pq), r_text, func.len().to_string(), value.format(g.tol)];
    rep.rows.push(Row { values, verdict: Verdict::Pass });
    Ok(Output::Report(rep))
}

#[derive(Args, Debug, Clone)]
pub struct ExperimentArgs {
    /// One of the runner identifiers (see README).
    pub id: String,
    /// Start from this JSON configuration instead of the defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Tree family for runners with a `spec` setting; uses --a --b --m --n.
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    /// An integer, a range "2..5" (inclusive) or a list "4,6,8".
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated rationals.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub j: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub window: Option<String>,
    /// Any other setting, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

fn family_from_overrides(family: FamilyName, a: &ExperimentArgs) -> Result<FamilyArgs> {
    let num = |s: &Option<String>, d: u32| -> Result<u32> {
        s.as_deref().map(|t| t.trim().parse::<u32>().with_context(|| format!("{t:?} is not an integer"))).unwrap_or(Ok(d))
    };
    Ok(FamilyArgs { family, a: num(&a.a, 2)?, b: num(&a.b, 3)?, m: num(&a.m, 1)?, n: num(&a.n, 1)? })
}

/// The default configuration of `args.id` with all overrides applied.
pub fn resolve(g: &Global, args: &ExperimentArgs) -> Result<Experiment> {
    let base = match &args.config {
        Some(path) => {
            let v = read_json(path)?;
            let exp: Experiment = serde_json::from_value(v).with_context(|| format!("config {}", path.display()))?;
            if exp.id() != args.id {
                bail!("config file is for {:?}, not {:?}", exp.id(), args.id);
            }
            exp
        }
        None => Experiment::default_for(&args.id)?,
    };
    let Value::Object(mut cfg) = serde_json::to_value(&base)? else { unreachable!("tagged enum") };
    let mut family_params = false;
    if let Some(fam) = args.family {
        if !cfg.contains_key("spec") {
            bail!("{} has no tree family setting", args.id);
        }
        cfg.insert("spec".into(), family_json(&family_from_overrides(fam, args)?)?);
        family_params = true;
    }
    let named = [
        ("a", &args.a),
        ("b", &args.b),
        ("m", &args.m),
        ("n", &args.n),
        ("p", &args.p),
        ("j", &args.j),
        ("r", &args.r),
        ("trials", &args.trials),
        ("window", &args.window),
    ];
    for (key, val) in named {
        if family_params && matches!(key, "a" | "b" | "m" | "n") {
            continue;
        }
        if let Some(v) = val {
            overrides::apply(&mut cfg, key, v)?;
        }
    }
    if let Some(seed) = g.seed {
        if cfg.contains_key("seed") {
            cfg.insert("seed".into(), Value::from(seed));
        }
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set expects key=value, got {kv:?}"))?;
        if k == "experiment" {
            bail!("the experiment id cannot be overridden");
        }
        overrides::apply(&mut cfg, k.trim(), v)?;
    }
    serde_json::from_value(Value::Object(cfg)).context("invalid configuration after overrides")
}

pub fn experiment(g: &Global, args: &ExperimentArgs) -> Result<Output> {
    let exp = resolve(g, args)?;
    Ok(Output::Report(exp.run(g.guard)?))
}

pub fn validate_ri(_g: &Global, source: &Path, target: &Path, map: &Path, beta: u32) -> Result<Output> {
    let src = SimpleGraph::from_json(&read_json(source)?)?;
    let tgt = SimpleGraph::from_json(&read_json(target)?)?;
    let phi: Vec<usize> =
        serde_json::from_value(read_json(map)?).with_context(|| format!("{} must be an array of indices", map.display()))?;
    let ri = validate_rough_isometry(&src, &tgt, &phi, beta)?;
    let cfg = json!({
        "source": source.display().to_string(),
        "target": target.display().to_string(),
        "map": map.display().to_string(),
        "beta": beta,
    });
    let mut rep = ExperimentReport::new(
        "validate-ri",
        &cfg,
        "all pairs",
        strings(&["source_vertices", "target_vertices", "beta", "k", "q", "q_prime", "c_beta_k"]),
    );
    let values = vec![
        src.len().to_string(),
        tgt.len().to_string(),
        ri.beta().to_string(),
        ri.k().to_string(),
        src.q().to_string(),
        tgt.q().to_string(),
        transfer_constant(ri.beta(), ri.k(), src.q(), tgt.q()).to_string(),
    ];
    rep.rows.push(Row { values, verdict: Verdict::Pass });
    Ok(Output::Report(rep))
}
