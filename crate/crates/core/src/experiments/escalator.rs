//! The escalator tree: point masses on the ray have centred maxima whose ℓ^p sums grow with the valence.

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_real, parse_ps, power_sum, real_le, ExperimentReport, Row, Verdict};
use crate::certified::{Exponent, PowProduct, Real};
use crate::error::Result;
use crate::exact::rat;
use crate::function::FiniteFunction;
use crate::maximal::centred_max;
use crate::tree::{Tree, TreeSpec, VertexAddress};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EscalatorConfig {
    pub j: Vec<u32>,
    pub p: Vec<String>,
    /// Radius of the ball around x_j summed in the last column.
    pub radius: u32,
}

impl Default for EscalatorConfig {
    fn default() -> Self {
        EscalatorConfig { j: (0..=10).collect(), p: vec!["1".into(), "2".into()], radius: 2 }
    }
}

struct Scan {
    j: u32,
    valence: u32,
    children: Vec<BigRational>,
    ball: Vec<BigRational>,
}

pub fn escalator(cfg: &EscalatorConfig, guard: u64) -> Result<ExperimentReport> {
    let ps = parse_ps(&cfg.p)?;
    let tree = Tree::new(TreeSpec::escalator()).with_guard(guard);
    let mut columns: Vec<String> = ["j", "valence", "side_children", "M_at_children"].iter().map(|s| s.to_string()).collect();
    for p in &cfg.p {
        columns.push(format!("partial[{p}]"));
        columns.push(format!("closed[{p}]"));
        columns.push(format!("ball_sum[{p}]"));
    }
    let mut rep = ExperimentReport::new("escalator", cfg, "exact centred maxima", columns);

    let scans: Result<Vec<Scan>> = cfg
        .j
        .par_iter()
        .map(|&j| {
            let x = VertexAddress::rooted(vec![0; j as usize]);
            let f = FiniteFunction::delta(x.clone());
            let eval = |y: &VertexAddress| -> Result<BigRational> {
                Ok(centred_max(&tree, &f, y)?.exact().unwrap_or_else(BigRational::zero))
            };
            // child 0 continues the ray
            let children = tree.children(&x).iter().skip(1).map(&eval).collect::<Result<Vec<_>>>()?;
            let ball = tree.enumerate_ball(&x, cfg.radius)?.iter().map(&eval).collect::<Result<Vec<_>>>()?;
            Ok(Scan { j, valence: tree.valence(&x), children, ball })
        })
        .collect();

    let quarter = rat(1, 4);
    for s in scans? {
        let mut fails = Vec::new();
        if let Some(v) = s.children.iter().find(|v| **v != quarter) {
            fails.push(format!("M delta at a side child is {v}, expected 1/4"));
        }
        let distinct: std::collections::BTreeSet<String> = s.children.iter().map(|v| v.to_string()).collect();
        let mut vals = vec![
            s.j.to_string(),
            s.valence.to_string(),
            s.children.len().to_string(),
            distinct.into_iter().collect::<Vec<_>>().join(";"),
        ];
        for p in &ps {
            let partial = power_sum(&s.children, p);
            let count = if s.j == 0 { 1 } else { s.j + 1 };
            let closed = Real::Pow(
                PowProduct::pow(quarter.clone(), Exponent::rational(p.clone())).mul_rational(&rat(count as i64, 1)),
            );
            let ball = power_sum(&s.ball, p);
            if s.j >= 1 {
                if !(real_le(&partial, &closed)? && real_le(&closed, &partial)?) {
                    fails.push(format!("p = {p}: partial sum {} != (j+1)/4^p", fmt_real(&partial)));
                }
            } else if !real_le(&closed, &partial)? {
                fails.push(format!("p = {p}: partial sum {} below 1/4^p", fmt_real(&partial)));
            }
            if !real_le(&partial, &ball)? {
                fails.push(format!("p = {p}: ball sum below the partial sum"));
            }
            vals.push(fmt_real(&partial));
            vals.push(fmt_real(&closed));
            vals.push(fmt_real(&ball));
        }
        rep.rows.push(Row { values: vals, verdict: Verdict::from_failures(fails) });
    }
    rep.notes.push("||delta_x||_p = 1, so each partial sum is a lower bound for ||M||_p^p on point masses".into());
    rep.notes.push("side children of x_j have valence 3; the ball B_1 of such a child has 4 points and contains x_j".into());
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_children_see_a_quarter() {
        let cfg = EscalatorConfig { j: vec![0, 1, 4], ..Default::default() };
        let rep = escalator(&cfg, u64::MAX).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
        assert_eq!(rep.column("side_children"), vec!["2", "2", "5"]);
        assert_eq!(rep.cell(2, "partial[1]"), Some("5/4"));
        assert_eq!(rep.cell(2, "partial[2]"), Some("5/16"));
    }
}
