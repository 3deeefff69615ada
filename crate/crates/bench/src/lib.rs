//! Shared inputs for the criterion benches.

use maxtree_core::exact::rat;
use maxtree_core::{FiniteFunction, Result, Tree, VertexAddress};

/// Every `step`-th vertex of B_radius(o), with values cycling through 1..=5.
pub fn spread_function(tree: &Tree, radius: u32, step: usize) -> Result<FiniteFunction> {
    let ball = tree.enumerate_ball(&tree.origin(), radius)?;
    Ok(FiniteFunction::from_entries(
        ball.into_iter().step_by(step.max(1)).enumerate().map(|(i, v)| (v, rat(1 + (i % 5) as i64, 1))),
    ))
}

/// Points of B_radius(o) at which the operator is evaluated.
pub fn probe_points(tree: &Tree, radius: u32) -> Result<Vec<VertexAddress>> {
    tree.enumerate_ball(&tree.origin(), radius)
}
