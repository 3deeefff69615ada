//! Boundaries and isoperimetric ratios of finite vertex sets.

use std::collections::HashSet;

use num_rational::BigRational;

use super::{Tree, VertexAddress};
use crate::error::{Error, Result};

/// ∂E (vertices of E with a neighbour outside E) and |∂E|/|E|.
pub fn boundary_and_cheeger_ratio(tree: &Tree, e: &[VertexAddress]) -> Result<(Vec<VertexAddress>, BigRational)> {
    if e.is_empty() {
        return Err(Error::Domain("boundary of the empty set".into()));
    }
    let set: HashSet<&VertexAddress> = e.iter().collect();
    let mut boundary: Vec<VertexAddress> = set
        .iter()
        .filter(|v| tree.neighbors(v).iter().any(|n| !set.contains(n)))
        .map(|v| (*v).clone())
        .collect();
    boundary.sort();
    let ratio = BigRational::new(boundary.len().into(), set.len().into());
    Ok((boundary, ratio))
}

/// Every connected vertex set contained in B_r(center).
///
/// Fails with a guard error once more than `limit` sets have been produced.
pub fn connected_subsets(tree: &Tree, center: &VertexAddress, r: u32, limit: usize) -> Result<Vec<Vec<VertexAddress>>> {
    let ball = tree.enumerate_ball(center, r)?;
    if ball.len() > 128 {
        return Err(Error::Guard { requested: ball.len().to_string(), limit: 128 });
    }
    // the ball is a subtree rooted at center; parent index of each vertex
    let index: std::collections::HashMap<&VertexAddress, usize> = ball.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); ball.len()];
    for (i, v) in ball.iter().enumerate().skip(1) {
        let p = tree
            .neighbors(v)
            .into_iter()
            .filter_map(|n| index.get(&n).copied())
            .find(|&j| center.distance(&ball[j]) + 1 == center.distance(v))
            .expect("ball vertex without a parent in the ball");
        kids[p].push(i);
    }
    // rooted[v] = connected sets whose vertex closest to center is v
    let mut rooted: Vec<Vec<u128>> = vec![Vec::new(); ball.len()];
    let mut total = 0usize;
    for v in (0..ball.len()).rev() {
        let mut acc: Vec<u128> = vec![1u128 << v];
        for &c in &kids[v] {
            let mut next = Vec::with_capacity(acc.len() * (rooted[c].len() + 1));
            for &s in &acc {
                next.push(s);
                for &t in &rooted[c] {
                    next.push(s | t);
                }
            }
            acc = next;
            if acc.len() > limit {
                return Err(Error::Guard { requested: format!(">{limit} connected sets"), limit: limit as u64 });
            }
        }
        total += acc.len();
        if total > limit {
            return Err(Error::Guard { requested: format!(">{limit} connected sets"), limit: limit as u64 });
        }
        rooted[v] = acc;
    }
    let mut out = Vec::with_capacity(total);
    for sets in rooted {
        for s in sets {
            out.push((0..ball.len()).filter(|i| s >> i & 1 == 1).map(|i| ball[i].clone()).collect());
        }
    }
    Ok(out)
}
