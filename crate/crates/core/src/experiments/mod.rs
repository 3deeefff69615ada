//! Runners producing exact trend tables, one per boundedness or unboundedness claim.
//!
//! Every runner returns an [`ExperimentReport`]: one row per scale parameter,
//! exact values as "num/den", irrational ones as "[lo,hi]" enclosures, and a
//! verdict per row. Inequalities the theory guarantees are verdicts
//! (`fail` is a bug or a defect in the claim); divergence is only reported.

mod counting;
mod escalator;
mod flower;
mod rwt2;
mod stromberg;
mod transfer;

use std::fmt::Write as _;
use std::hash::Hasher;

use fnv::FnvHasher;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use counting::{counting_and_weak11, CountingConfig};
pub use escalator::{escalator, EscalatorConfig};
pub use flower::{flower_centred_weak11, flower_uncentred, FlowerCentredConfig, FlowerUncentredConfig};
pub use rwt2::{uncentred_rwt2, Rwt2Config, SetSpec};
pub use stromberg::{
    closest_striped_exponent, denseness, stromberg_centred, DensenessConfig, StrombergConfig,
};
pub use transfer::{rough_transfer, Perturbation, TransferConfig};

use crate::certified::{Exponent, PowProduct, Real};
use crate::error::{Error, Result};
use crate::exact::{fmt_rational, parse_rational, rat, upow};
use crate::graph::omega;
use crate::maximal::paper_c_ab;

/// Relative enclosure width used when printing irrational values.
pub const REPORT_TOL: f64 = 1e-12;

/// Outcome of one row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// A guaranteed inequality failed; the text is the witness.
    Fail(String),
    /// Nothing to assert; the row only reports a trend.
    Trend,
}

impl Verdict {
    pub fn from_failures(f: Vec<String>) -> Self {
        if f.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail(f.join("; "))
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    fn cell(&self) -> String {
        match self {
            Verdict::Pass => "pass".into(),
            Verdict::Trend => "trend".into(),
            Verdict::Fail(w) => format!("fail: {w}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub values: Vec<String>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    /// Resolved configuration, sorted by key.
    pub config: Vec<(String, String)>,
    /// Which counting backend produced the numbers.
    pub backend: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new<C: Serialize>(id: &str, config: &C, backend: &str, columns: Vec<String>) -> Self {
        ExperimentReport {
            id: id.to_string(),
            config: flatten_config(config),
            backend: backend.to_string(),
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.rows.iter().any(|r| r.verdict.is_fail())
    }

    pub fn failures(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter_map(|r| match &r.verdict {
                Verdict::Fail(w) => Some(w.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Cell of `column` in row `i`.
    pub fn cell(&self, i: usize, column: &str) -> Option<&str> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.rows.get(i)?.values.get(j).map(String::as_str)
    }

    pub fn column(&self, column: &str) -> Vec<&str> {
        (0..self.rows.len()).filter_map(|i| self.cell(i, column)).collect()
    }

    /// Config and provenance as `#` lines, then a CSV table with a verdict column.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# experiment: {}", self.id).unwrap();
        writeln!(out, "# backend: {}", self.backend).unwrap();
        writeln!(out, "# version: {}", env!("CARGO_PKG_VERSION")).unwrap();
        for (k, v) in &self.config {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        for n in &self.notes {
            writeln!(out, "# note: {n}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.columns.clone();
        header.push("verdict".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = r.values.clone();
            rec.push(r.verdict.cell());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let config: serde_json::Map<String, serde_json::Value> =
            self.config.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| serde_json::json!({ "values": r.values, "verdict": r.verdict.cell() }))
            .collect();
        serde_json::json!({
            "experiment": self.id,
            "provenance": { "backend": self.backend, "version": env!("CARGO_PKG_VERSION") },
            "config": config,
            "columns": self.columns,
            "rows": rows,
            "notes": self.notes,
            "passed": self.passed(),
        })
    }
}

fn flatten_config<C: Serialize>(c: &C) -> Vec<(String, String)> {
    let v = serde_json::to_value(c).expect("configs serialize");
    match v {
        serde_json::Value::Object(m) => m
            .into_iter()
            .map(|(k, v)| {
                let s = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, s)
            })
            .collect(),
        other => vec![("config".into(), other.to_string())],
    }
}

/// Seed of one row: FNV-1a over (experiment id, row key, master seed).
pub fn row_seed(id: &str, key: u64, master: u64) -> u64 {
    let mut h = FnvHasher::default();
    h.write(id.as_bytes());
    h.write_u64(key);
    h.write_u64(master);
    h.finish()
}

pub(crate) fn parse_ps(ps: &[String]) -> Result<Vec<BigRational>> {
    ps.iter()
        .map(|s| {
            let p = parse_rational(s)?;
            if p < rat(1, 1) {
                return Err(Error::Domain(format!("p must be >= 1, got {s}")));
            }
            Ok(p)
        })
        .collect()
}

pub(crate) fn fmt_pow(p: &PowProduct) -> String {
    Real::Pow(p.clone()).format(REPORT_TOL)
}

pub(crate) fn fmt_real(r: &Real) -> String {
    r.format(REPORT_TOL)
}

pub(crate) fn fmt_q(q: &BigRational) -> String {
    fmt_rational(q)
}

/// a <= b, settled exactly or by refinement; enclosures that never separate
/// count as equal.
pub(crate) fn real_le(a: &Real, b: &Real) -> Result<bool> {
    match a.cmp_certified(b) {
        Ok(o) => Ok(o != std::cmp::Ordering::Greater),
        Err(Error::Undecided(_)) => Ok(true),
        Err(e) => Err(e),
    }
}

/// Σ v^p over the values, equal values grouped into one power term.
pub(crate) fn power_sum<'a, I: IntoIterator<Item = &'a BigRational>>(values: I, p: &BigRational) -> Real {
    let mut counts: std::collections::BTreeMap<&BigRational, u64> = std::collections::BTreeMap::new();
    for v in values {
        if !v.is_zero() {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    let terms: Vec<(bool, Real)> = counts
        .into_iter()
        .map(|(v, c)| {
            let t = PowProduct::pow(num_traits::Signed::abs(v), Exponent::rational(p.clone()))
                .mul_rational(&rat(c as i64, 1));
            (false, Real::Pow(t))
        })
        .collect();
    match terms.len() {
        0 => Real::Pow(PowProduct::zero()),
        1 => terms.into_iter().next().unwrap().1,
        _ => Real::Sum(terms),
    }
}

/// sup_λ λ #{g > λ} / ‖f‖_1 with g given by its values: the sup is approached
/// as λ increases to a value v of g, where the count is #{g >= v}.
pub fn weak11_ratio(values: &[BigRational], l1: &BigRational) -> BigRational {
    if l1.is_zero() {
        return BigRational::zero();
    }
    let mut v: Vec<&BigRational> = values.iter().filter(|q| !q.is_zero()).collect();
    v.sort_by(|a, b| b.cmp(a));
    let mut best = BigRational::zero();
    for (i, q) in v.iter().enumerate() {
        if v.get(i + 1) == Some(q) {
            continue;
        }
        let cand = *q * BigRational::from_integer((i + 1).into());
        if cand > best {
            best = cand;
        }
    }
    best / l1
}

/// Constants attached to a pair (a, b).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaperConstants {
    pub a: u64,
    pub b: u64,
}

impl PaperConstants {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if !(2 <= a && a <= b) {
            return Err(Error::Domain(format!("need 2 <= a <= b, got a = {a}, b = {b}")));
        }
        Ok(PaperConstants { a, b })
    }

    /// τ = log_a b.
    pub fn tau(&self) -> Exponent {
        Exponent::tau(self.a, self.b)
    }

    pub fn c_ab(&self) -> PowProduct {
        paper_c_ab(self.a, self.b)
    }

    /// β_{a,b} = (a⁴ - b) / (a² (a² - b)), defined for b < a².
    pub fn beta_ab(&self) -> Option<BigRational> {
        let (a, b) = (self.a as i64, self.b as i64);
        (b < a * a).then(|| rat(a.pow(4) - b, a * a * (a * a - b)))
    }

    /// α = (a^m b^n)^(1/(m+n)).
    pub fn alpha_striped(&self, m: u32, n: u32) -> PowProduct {
        let base = upow(self.a, m) * upow(self.b, n);
        PowProduct::pow(BigRational::from_integer(base.into()), Exponent::rational(rat(1, (m + n) as i64)))
    }

    pub fn omega(m: u32, q: u32) -> BigUint {
        omega(m, q)
    }

    /// λ_{a,b} = c_S / (2(1+b)); the Cheeger constant c_S stays symbolic.
    pub fn lambda_ab_symbolic(&self) -> String {
        format!("c_S/{}", 2 * (1 + self.b))
    }
}

/// A runner together with its configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    StrombergCentred(StrombergConfig),
    Denseness(DensenessConfig),
    CountingWeak11(CountingConfig),
    FlowerUncentred(FlowerUncentredConfig),
    FlowerCentredWeak11(FlowerCentredConfig),
    Escalator(EscalatorConfig),
    RoughTransfer(TransferConfig),
    UncentredRwt2(Rwt2Config),
}

/// Identifiers accepted by [`Experiment::default_for`].
pub const EXPERIMENT_IDS: [&str; 8] = [
    "stromberg-centred",
    "denseness",
    "counting-weak11",
    "flower-uncentred",
    "flower-centred-weak11",
    "escalator",
    "rough-transfer",
    "uncentred-rwt2",
];

impl Experiment {
    pub fn default_for(id: &str) -> Result<Self> {
        Ok(match id {
            "stromberg-centred" => Experiment::StrombergCentred(Default::default()),
            "denseness" => Experiment::Denseness(Default::default()),
            "counting-weak11" => Experiment::CountingWeak11(Default::default()),
            "flower-uncentred" => Experiment::FlowerUncentred(Default::default()),
            "flower-centred-weak11" => Experiment::FlowerCentredWeak11(Default::default()),
            "escalator" => Experiment::Escalator(Default::default()),
            "rough-transfer" => Experiment::RoughTransfer(Default::default()),
            "uncentred-rwt2" => Experiment::UncentredRwt2(Default::default()),
            other => {
                return Err(Error::Domain(format!(
                    "unknown experiment {other:?}; expected one of {}",
                    EXPERIMENT_IDS.join(", ")
                )))
            }
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Experiment::StrombergCentred(_) => "stromberg-centred",
            Experiment::Denseness(_) => "denseness",
            Experiment::CountingWeak11(_) => "counting-weak11",
            Experiment::FlowerUncentred(_) => "flower-uncentred",
            Experiment::FlowerCentredWeak11(_) => "flower-centred-weak11",
            Experiment::Escalator(_) => "escalator",
            Experiment::RoughTransfer(_) => "rough-transfer",
            Experiment::UncentredRwt2(_) => "uncentred-rwt2",
        }
    }

    pub fn run(&self, guard: u64) -> Result<ExperimentReport> {
        match self {
            Experiment::StrombergCentred(c) => stromberg_centred(c, guard),
            Experiment::Denseness(c) => denseness(c, guard),
            Experiment::CountingWeak11(c) => counting_and_weak11(c, guard),
            Experiment::FlowerUncentred(c) => flower_uncentred(c, guard),
            Experiment::FlowerCentredWeak11(c) => flower_centred_weak11(c, guard),
            Experiment::Escalator(c) => escalator(c, guard),
            Experiment::RoughTransfer(c) => rough_transfer(c),
            Experiment::UncentredRwt2(c) => uncentred_rwt2(c, guard),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        let c = PaperConstants::new(2, 3).unwrap();
        assert_eq!(c.beta_ab(), Some(rat(13, 4)));
        assert_eq!(PaperConstants::new(2, 4).unwrap().beta_ab(), None);
        assert_eq!(c.alpha_striped(1, 1).powr(&Exponent::int(2)).unwrap().exact(), Some(rat(6, 1)));
        assert_eq!(PaperConstants::omega(2, 3), BigUint::from(13u32));
        for (a, b) in [(2u64, 3u64), (2, 4), (2, 5), (3, 9), (3, 10)] {
            let t = PaperConstants::new(a, b).unwrap().tau();
            let le_two = match t.as_rational() {
                Some(q) => *q <= rat(2, 1),
                None => t.enclose(128).hi.to_rational() < rat(2, 1),
            };
            assert_eq!(le_two, b <= a * a, "({a},{b})");
            assert!(t.to_f64() >= 1.0);
        }
        assert_eq!(c.lambda_ab_symbolic(), "c_S/8");
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(row_seed("x", 1, 7), row_seed("x", 1, 7));
        assert_ne!(row_seed("x", 1, 7), row_seed("x", 2, 7));
        assert_ne!(row_seed("x", 1, 7), row_seed("y", 1, 7));
        assert_ne!(row_seed("x", 1, 7), row_seed("x", 1, 8));
    }

    #[test]
    fn weak_ratio_of_levels() {
        // values 1, 1/2, 1/2: sup is max(1*1, (1/2)*3) = 3/2
        let v = vec![rat(1, 1), rat(1, 2), rat(1, 2), rat(0, 1)];
        assert_eq!(weak11_ratio(&v, &rat(1, 1)), rat(3, 2));
        assert_eq!(weak11_ratio(&v, &rat(0, 1)), rat(0, 1));
    }

    #[test]
    fn unknown_id_is_a_domain_error() {
        assert!(Experiment::default_for("nope").is_err());
        for id in EXPERIMENT_IDS {
            assert_eq!(Experiment::default_for(id).unwrap().id(), id);
        }
    }
}
