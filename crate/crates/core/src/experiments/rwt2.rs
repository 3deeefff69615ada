//! Restricted weak type (2,2) of the uncentred operator on homogeneous trees.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{fmt_pow, fmt_q, ExperimentReport, Row, Verdict};
use crate::error::{Error, Result};
use crate::exact::{rat, upow};
use crate::function::FiniteFunction;
use crate::lorentz::{restricted_weak_ratio, Operator};
use crate::maximal::{embed_into_homogeneous, mode_c_constants, DominationMode, Dominator, MaximalKind};
use crate::tree::{volume_profile, Tree, TreeSpec, VertexAddress};

/// A test set around the origin: "origin", "ball:r" or "sphere:r".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SetSpec {
    Origin,
    Ball(u32),
    Sphere(u32),
}

impl FromStr for SetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("set {s:?}: expected origin, ball:R or sphere:R"));
        if s == "origin" {
            return Ok(SetSpec::Origin);
        }
        let (kind, r) = s.split_once(':').ok_or_else(bad)?;
        let r: u32 = r.parse().map_err(|_| bad())?;
        match kind {
            "ball" => Ok(SetSpec::Ball(r)),
            "sphere" => Ok(SetSpec::Sphere(r)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for SetSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SetSpec> for String {
    fn from(s: SetSpec) -> String {
        s.to_string()
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSpec::Origin => write!(f, "origin"),
            SetSpec::Ball(r) => write!(f, "ball:{r}"),
            SetSpec::Sphere(r) => write!(f, "sphere:{r}"),
        }
    }
}

impl SetSpec {
    fn radius(&self) -> u32 {
        match self {
            SetSpec::Origin => 0,
            SetSpec::Ball(r) | SetSpec::Sphere(r) => *r,
        }
    }

    fn build(&self, tree: &Tree) -> Result<Vec<VertexAddress>> {
        let o = tree.origin();
        match self {
            SetSpec::Origin => Ok(vec![o]),
            SetSpec::Ball(r) => tree.enumerate_ball(&o, *r),
            SetSpec::Sphere(r) => tree.enumerate_sphere(&o, *r),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Rwt2Config {
    pub b: u32,
    pub window: u32,
    pub sets: Vec<SetSpec>,
}

impl Default for Rwt2Config {
    fn default() -> Self {
        Rwt2Config { b: 2, window: 6, sets: vec![SetSpec::Origin, SetSpec::Ball(1), SetSpec::Sphere(2), SetSpec::Ball(2)] }
    }
}

pub fn uncentred_rwt2(cfg: &Rwt2Config, guard: u64) -> Result<ExperimentReport> {
    let tree = Tree::new(TreeSpec::homogeneous(cfg.b)?).with_guard(guard);
    let b = cfg.b as u64;
    let consts = mode_c_constants(&tree, 2 * cfg.window)?;
    let window = tree.enumerate_ball(&tree.origin(), cfg.window)?;
    let dom = Dominator::new(&tree, DominationMode::C, &window, cfg.window)?;
    let embed = embed_into_homogeneous(&tree, cfg.window)?;
    let columns: Vec<String> = [
        "set", "size", "constant", "empirical", "violations", "rwt_uncentred", "rwt_centred", "l1", "l1_sharp",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rep = ExperimentReport::new("uncentred-rwt2", cfg, "exact maxima on a window", columns);
    let two = rat(2, 1);
    for s in &cfg.sets {
        if s.radius() > cfg.window {
            return Err(Error::Domain(format!("set {s} leaves the radius-{} window", cfg.window)));
        }
        let set = s.build(&tree)?;
        let f = FiniteFunction::indicator(set.clone());
        let mut fails = Vec::new();
        let d = dom.check(&f)?;
        for v in d.violations.iter().take(5) {
            fails.push(format!("N 1_E({}) = {} > K M_2 1_E = {}", v.x, v.lhs, v.rhs));
        }
        let unc = restricted_weak_ratio(&tree, &Operator::Maximal(MaximalKind::Uncentred), &set, &two, &window)?;
        let cen = restricted_weak_ratio(&tree, &Operator::Maximal(MaximalKind::Centred), &set, &two, &window)?;
        let sharp = embed.sharp(&f)?;
        if sharp.l1() != f.l1() {
            fails.push(format!("f# has mass {} but f has {}", fmt_q(&sharp.l1()), fmt_q(&f.l1())));
        }
        let vals = vec![
            s.to_string(),
            set.len().to_string(),
            fmt_pow(&d.constant),
            fmt_pow(&d.empirical),
            d.violations.len().to_string(),
            fmt_pow(&unc),
            fmt_pow(&cen),
            fmt_q(&f.l1()),
            fmt_q(&sharp.l1()),
        ];
        rep.rows.push(Row { values: vals, verdict: Verdict::from_failures(fails) });
    }
    // b^R >= c V^b(2R)^(1/2) with c^2 = (b-1)/(b+1) for every R; the R <= 10 minimum is tighter
    let r3 = (upow(b, 3).pow(2), volume_profile(b, 6).0);
    rep.notes.push(format!(
        "c_lb = {}, c^2 = {} (all R), c^2 over R <= 10 = {}; e.g. b^(2*3) = {} vs V(6) = {}",
        fmt_q(&consts.c_lb),
        fmt_q(&consts.c_sq),
        fmt_q(&consts.c_sq_window),
        r3.0,
        r3.1
    ));
    rep.notes.push("rwt columns are ||T 1_E||_{2,inf} / ||1_E||_{2,1} over the window, lower bounds for the operator ratio".into());
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_specs_round_trip() {
        for s in ["origin", "ball:1", "sphere:3"] {
            assert_eq!(s.parse::<SetSpec>().unwrap().to_string(), s);
        }
        assert!("disc:2".parse::<SetSpec>().is_err());
    }

    #[test]
    fn default_run() {
        let cfg = Rwt2Config { window: 4, ..Default::default() };
        let rep = uncentred_rwt2(&cfg, u64::MAX).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
        assert_eq!(rep.cell(0, "l1"), rep.cell(0, "l1_sharp"));
        assert!(rep.notes[0].contains("c^2 = 1/3"));
    }
}
