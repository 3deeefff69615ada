//! Patching an experiment's JSON configuration from command-line strings.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{Map, Value};

/// Parse "lo..hi" (inclusive), "lo..=hi" or a comma list into integers.
pub fn parse_int_list(s: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u64 = lo.trim().parse().with_context(|| format!("range start in {s:?}"))?;
        let hi: u64 = hi.trim().parse().with_context(|| format!("range end in {s:?}"))?;
        if lo > hi {
            bail!("empty range {s:?}");
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("integer {t:?} in {s:?}")))
        .collect()
}

/// Convert `raw` to the JSON shape of `current`.
fn coerce(key: &str, current: &Value, raw: &str) -> Result<Value> {
    Ok(match current {
        Value::Number(_) => {
            Value::from(raw.trim().parse::<u64>().with_context(|| format!("{key} expects an integer, got {raw:?}"))?)
        }
        Value::Bool(_) => Value::Bool(raw.parse().with_context(|| format!("{key} expects true/false"))?),
        Value::String(_) => Value::String(raw.to_string()),
        Value::Array(items) => match items.first() {
            Some(Value::String(_)) => Value::Array(raw.split(',').map(|t| Value::String(t.trim().into())).collect()),
            _ => Value::Array(parse_int_list(raw)?.into_iter().map(Value::from).collect()),
        },
        Value::Object(_) | Value::Null => {
            serde_json::from_str(raw).with_context(|| format!("{key} expects JSON, got {raw:?}"))?
        }
    })
}

/// Set `key` in the config object; the key must already exist.
pub fn apply(cfg: &mut Map<String, Value>, key: &str, raw: &str) -> Result<()> {
    let current = cfg.get(key).ok_or_else(|| {
        let known: Vec<&str> = cfg.keys().filter(|k| *k != "experiment").map(String::as_str).collect();
        anyhow!("this experiment has no {key:?} setting (known: {})", known.join(", "))
    })?;
    let v = coerce(key, current, raw)?;
    cfg.insert(key.to_string(), v);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_int_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_int_list("0..=2").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_int_list("4,6, 8").unwrap(), vec![4, 6, 8]);
        assert!(parse_int_list("5..2").is_err());
    }

    #[test]
    fn shapes_follow_the_default() {
        let mut m = json!({"a": 2, "p": ["1"], "n": [1], "tag": "x"}).as_object().unwrap().clone();
        apply(&mut m, "a", "3").unwrap();
        apply(&mut m, "p", "1,3/2").unwrap();
        apply(&mut m, "n", "2..3").unwrap();
        assert_eq!(Value::Object(m.clone()), json!({"a": 3, "p": ["1", "3/2"], "n": [2, 3], "tag": "x"}));
        assert!(apply(&mut m, "zzz", "1").is_err());
        assert!(apply(&mut m, "a", "x").is_err());
    }
}
