use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Valence as a function of height.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightRule {
    /// Heights h >= threshold get the given valence.
    pub top: Option<(i64, u32)>,
    /// Explicit valences for a finite band of heights.
    pub mid: BTreeMap<i64, u32>,
    pub period: u32,
    /// Valence for remaining heights, indexed by h mod period.
    pub periodic: Vec<u32>,
}

impl HeightRule {
    pub fn new(top: Option<(i64, u32)>, mid: BTreeMap<i64, u32>, periodic: Vec<u32>) -> Result<Self> {
        if periodic.is_empty() {
            return Err(Error::Construction("height rule needs a nonempty periodic table".into()));
        }
        Ok(HeightRule { top, mid, period: periodic.len() as u32, periodic })
    }

    pub fn valence(&self, h: i64) -> u32 {
        if let Some((t, v)) = self.top {
            if h >= t {
                return v;
            }
        }
        if let Some(v) = self.mid.get(&h) {
            return *v;
        }
        self.periodic[h.rem_euclid(self.period as i64) as usize]
    }

    /// Every valence this rule can produce.
    pub fn values(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.periodic.clone();
        v.extend(self.mid.values().copied());
        if let Some((_, t)) = self.top {
            v.push(t);
        }
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Homogeneous { b: u32 },
    Stromberg { a: u32, b: u32 },
    Striped { a: u32, b: u32, m: u32, n: u32 },
    /// a+1 on even heights when `even_low`, else on odd heights.
    SemiHomogeneous { a: u32, b: u32, even_low: bool },
    Flower { a: u32, b: u32 },
    Escalator,
    Custom { a: u32, b: u32, rule: HeightRule },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Addressing {
    Horocyclic,
    Rooted,
}

/// A validated tree family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    family: Family,
}

impl TreeSpec {
    pub fn new(family: Family) -> Result<Self> {
        let bad = |m: &str| Err(Error::Construction(m.to_string()));
        match &family {
            Family::Homogeneous { b } if *b < 2 => return bad("homogeneous tree needs b >= 2"),
            Family::Stromberg { a, b } | Family::Flower { a, b } if !(2 <= *a && a < b) => {
                return bad("family needs 2 <= a < b")
            }
            Family::SemiHomogeneous { a, b, .. } if !(2 <= *a && a < b) => {
                return bad("semi-homogeneous tree needs 2 <= a < b")
            }
            Family::Striped { a, b, m, n } => {
                if !(2 <= *a && a < b) {
                    return bad("striped tree needs 2 <= a < b");
                }
                if *m < 1 || *n < 1 {
                    return bad("striped tree needs m, n >= 1");
                }
            }
            Family::Custom { a, b, rule } => {
                if !(2 <= *a && a <= b) {
                    return bad("custom rule needs 2 <= a <= b");
                }
                if rule.values().iter().any(|v| *v < a + 1 || *v > b + 1) {
                    return bad("custom rule produces a valence outside [a+1, b+1]");
                }
            }
            _ => {}
        }
        Ok(TreeSpec { family })
    }

    pub fn homogeneous(b: u32) -> Result<Self> {
        TreeSpec::new(Family::Homogeneous { b })
    }

    pub fn stromberg(a: u32, b: u32) -> Result<Self> {
        TreeSpec::new(Family::Stromberg { a, b })
    }

    pub fn striped(a: u32, b: u32, m: u32, n: u32) -> Result<Self> {
        TreeSpec::new(Family::Striped { a, b, m, n })
    }

    pub fn semi_homogeneous(a: u32, b: u32) -> Result<Self> {
        TreeSpec::new(Family::SemiHomogeneous { a, b, even_low: true })
    }

    pub fn flower(a: u32, b: u32) -> Result<Self> {
        TreeSpec::new(Family::Flower { a, b })
    }

    pub fn escalator() -> Self {
        TreeSpec { family: Family::Escalator }
    }

    pub fn custom(a: u32, b: u32, rule: HeightRule) -> Result<Self> {
        TreeSpec::new(Family::Custom { a, b, rule })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn addressing(&self) -> Addressing {
        match self.family {
            Family::Flower { .. } | Family::Escalator => Addressing::Rooted,
            _ => Addressing::Horocyclic,
        }
    }

    pub fn is_rooted(&self) -> bool {
        self.addressing() == Addressing::Rooted
    }

    /// Declared lower parameter: every valence is at least a+1.
    pub fn a(&self) -> u32 {
        match &self.family {
            Family::Homogeneous { b } => *b,
            Family::Stromberg { a, .. }
            | Family::Striped { a, .. }
            | Family::SemiHomogeneous { a, .. }
            | Family::Flower { a, .. }
            | Family::Custom { a, .. } => *a,
            Family::Escalator => 2,
        }
    }

    /// Declared upper parameter; `None` for unbounded valence.
    pub fn b(&self) -> Option<u32> {
        match &self.family {
            Family::Homogeneous { b }
            | Family::Stromberg { b, .. }
            | Family::Striped { b, .. }
            | Family::SemiHomogeneous { b, .. }
            | Family::Flower { b, .. }
            | Family::Custom { b, .. } => Some(*b),
            Family::Escalator => None,
        }
    }

    /// The height rule of a horocyclic family.
    pub fn height_rule(&self) -> Option<HeightRule> {
        let mk = |top, mid, periodic| HeightRule::new(top, mid, periodic).ok();
        match &self.family {
            Family::Homogeneous { b } => mk(None, BTreeMap::new(), vec![b + 1]),
            Family::Stromberg { a, b } => mk(Some((1, b + 1)), BTreeMap::new(), vec![a + 1]),
            Family::SemiHomogeneous { a, b, even_low } => {
                let t = if *even_low { vec![a + 1, b + 1] } else { vec![b + 1, a + 1] };
                mk(None, BTreeMap::new(), t)
            }
            Family::Striped { a, b, m, n } => {
                // b+1 on h >= 1 and on bands -k(m+n)-n <= h < -k(m+n), k >= 1
                let p = (m + n) as i64;
                let mid: BTreeMap<i64, u32> = (-p..=0).map(|h| (h, a + 1)).collect();
                let periodic = (0..p)
                    .map(|i| if i >= *m as i64 { b + 1 } else { a + 1 })
                    .collect();
                mk(Some((1, b + 1)), mid, periodic)
            }
            Family::Custom { rule, .. } => Some(rule.clone()),
            Family::Flower { .. } | Family::Escalator => None,
        }
    }

    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Homogeneous { b } => format!("homogeneous({b})"),
            Family::Stromberg { a, b } => format!("stromberg({a},{b})"),
            Family::Striped { a, b, m, n } => format!("striped({a},{b},{m},{n})"),
            Family::SemiHomogeneous { a, b, even_low } => {
                if *even_low {
                    format!("semi_homogeneous({a},{b})")
                } else {
                    format!("semi_homogeneous({a},{b},odd)")
                }
            }
            Family::Flower { a, b } => format!("flower({a},{b})"),
            Family::Escalator => "escalator".to_string(),
            Family::Custom { a, b, .. } => format!("custom({a},{b})"),
        }
    }
}

impl fmt::Display for TreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
