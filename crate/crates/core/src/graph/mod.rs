//! Finite simple graphs: tree windows, compact perturbations and rough isometries.

mod averaging;
mod rough;

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use averaging::{
    compball_violations, compball_ii_violations, estball_violations, level_set_bound, omega, Averages, BallViolation,
};
pub use rough::{
    transfer_constant, transfer_inequality_check, transfer_is_safe, validate_rough_isometry, RoughIsometry, TransferReport,
};

use crate::error::{Error, Result};
use crate::tree::{volume_profile, Tree, VertexAddress};

/// Pair count above which distortion checks sample instead of scanning every pair.
pub const EXHAUSTIVE_PAIR_LIMIT: u64 = 20_000_000;

pub(crate) const UNREACHED: u32 = u32::MAX;

/// A connected simple graph with per-vertex safe radii.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<usize>>,
    labels: Vec<Option<VertexAddress>>,
    q: u32,
    /// Largest r with B_r(v) equal to the ball in the generating infinite graph.
    safe_radius: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Option<VertexAddress>>>,
    #[serde(rename = "Q")]
    q: u32,
    safe_radius: Vec<u32>,
}

impl SimpleGraph {
    /// Builds and validates a graph from an edge list.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize)],
        labels: Vec<Option<VertexAddress>>,
        q: u32,
        safe_radius: Vec<u32>,
    ) -> Result<Self> {
        if labels.len() != n || safe_radius.len() != n {
            return Err(Error::Construction(format!("{n} vertices but {} labels, {} radii", labels.len(), safe_radius.len())));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Construction(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::Construction(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, a) in adj.iter_mut().enumerate() {
            a.sort_unstable();
            if a.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Construction(format!("multi-edge at {u}")));
            }
        }
        let g = SimpleGraph { adj, labels, q, safe_radius };
        g.validate()?;
        Ok(g)
    }

    /// Simple, connected, and 2 <= ν <= Q+1 at interior vertices.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Construction("empty graph".into()));
        }
        for (u, a) in self.adj.iter().enumerate() {
            for &v in a {
                if self.adj[v].binary_search(&u).is_err() {
                    return Err(Error::Construction(format!("edge ({u},{v}) is not symmetric")));
                }
            }
            if self.safe_radius[u] > 0 && (a.len() < 2 || a.len() > self.q as usize + 1) {
                return Err(Error::Construction(format!(
                    "interior vertex {u} has valence {}, outside [2, {}]",
                    a.len(),
                    self.q + 1
                )));
            }
        }
        if self.bfs(0).contains(&UNREACHED) {
            return Err(Error::Construction("graph is not connected".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn label(&self, v: usize) -> Option<&VertexAddress> {
        self.labels[v].as_ref()
    }

    pub fn safe_radius(&self, v: usize) -> u32 {
        self.safe_radius[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.safe_radius[v] == 0
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, a) in self.adj.iter().enumerate() {
            out.extend(a.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        out
    }

    /// Index of the vertex carrying a label.
    pub fn find(&self, addr: &VertexAddress) -> Option<usize> {
        self.labels.iter().position(|l| l.as_ref() == Some(addr))
    }

    pub fn bfs(&self, s: usize) -> Vec<u32> {
        self.multi_bfs(&[s])
    }

    pub fn multi_bfs(&self, sources: &[usize]) -> Vec<u32> {
        let mut d = vec![UNREACHED; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if d[s] != 0 {
                d[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if d[v] == UNREACHED {
                    d[v] = d[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        d
    }

    /// Largest distance between two vertices of `set`.
    pub fn diameter_of(&self, set: &[usize]) -> u32 {
        set.iter().map(|&s| {
            let d = self.bfs(s);
            set.iter().map(|&t| d[t]).max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
    }

    /// Induced subgraph on `keep` (in that order); vertices that lose an edge become boundary.
    pub fn induced(&self, keep: &[usize]) -> Result<SimpleGraph> {
        let index: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (i, &u) in keep.iter().enumerate() {
            for v in &self.adj[u] {
                if let Some(&j) = index.get(v) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        let boundary: Vec<usize> = keep
            .iter()
            .enumerate()
            .filter(|(_, &v)| self.safe_radius[v] == 0 || self.adj[v].iter().any(|w| !index.contains_key(w)))
            .map(|(i, _)| i)
            .collect();
        let mut g = SimpleGraph { adj: vec![Vec::new(); keep.len()], labels, q: self.q, safe_radius: vec![0; keep.len()] };
        for (u, v) in &edges {
            g.adj[*u].push(*v);
            g.adj[*v].push(*u);
        }
        for a in g.adj.iter_mut() {
            a.sort_unstable();
        }
        g.safe_radius = g.multi_bfs(&boundary);
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = GraphFile {
            vertices: self.len(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            labels: if self.labels.iter().any(Option::is_some) { Some(self.labels.clone()) } else { None },
            q: self.q,
            safe_radius: self.safe_radius.clone(),
        };
        serde_json::to_value(file).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let file: GraphFile = serde_json::from_value(v.clone())?;
        let labels = file.labels.unwrap_or_else(|| vec![None; file.vertices]);
        let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        SimpleGraph::from_edges(file.vertices, &edges, labels, file.q, file.safe_radius)
    }
}

/// All-pairs distances with each row's vertices grouped by distance.
pub struct DistanceTable {
    n: usize,
    d: Vec<u32>,
    /// order[z]: vertices sorted by distance from z; ends[z][r]: count within distance r.
    order: Vec<Vec<usize>>,
    ends: Vec<Vec<usize>>,
}

impl DistanceTable {
    pub fn new(g: &SimpleGraph) -> Self {
        let n = g.len();
        let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| g.bfs(s)).collect();
        let mut order = Vec::with_capacity(n);
        let mut ends = Vec::with_capacity(n);
        for row in &rows {
            let mut o: Vec<usize> = (0..n).collect();
            o.sort_by_key(|&v| row[v]);
            let ecc = row.iter().copied().max().unwrap_or(0) as usize;
            let mut e = vec![0usize; ecc + 1];
            for &v in &o {
                e[row[v] as usize] += 1;
            }
            for r in 1..e.len() {
                e[r] += e[r - 1];
            }
            order.push(o);
            ends.push(e);
        }
        DistanceTable { n, d: rows.concat(), order, ends }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dist(&self, u: usize, v: usize) -> u32 {
        self.d[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.d[u * self.n..(u + 1) * self.n]
    }

    pub fn eccentricity(&self, z: usize) -> u32 {
        (self.ends[z].len() - 1) as u32
    }

    /// B_r(z), nearest first.
    pub fn ball(&self, z: usize, r: u32) -> &[usize] {
        let e = &self.ends[z];
        &self.order[z][..e[(r as usize).min(e.len() - 1)]]
    }

    pub fn ball_size(&self, z: usize, r: u32) -> usize {
        let e = &self.ends[z];
        e[(r as usize).min(e.len() - 1)]
    }
}

/// The induced graph on B_radius(center), labelled by addresses.
pub fn window_graph(tree: &Tree, center: &VertexAddress, radius: u32) -> Result<SimpleGraph> {
    let layers = tree.enumerate_layers(center, radius)?;
    let mut labels = Vec::new();
    let mut safe = Vec::new();
    for (d, layer) in layers.iter().enumerate() {
        for v in layer {
            labels.push(v.clone());
            safe.push(radius - d as u32);
        }
    }
    let index: HashMap<&VertexAddress, usize> = labels.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges = Vec::new();
    let mut max_valence = 1u32;
    for (i, v) in labels.iter().enumerate() {
        max_valence = max_valence.max(tree.valence(v));
        for u in tree.neighbors(v) {
            if let Some(&j) = index.get(&u) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    let q = tree.spec().b().map_or(max_valence - 1, |b| b);
    let n = labels.len();
    SimpleGraph::from_edges(n, &edges, labels.into_iter().map(Some).collect(), q, safe)
}

/// Excises `kb` from `base` and splices in `replacement`.
///
/// `gluing` lists (replacement vertex, base vertex outside kb) edges; their
/// base endpoints must match the cut edges of kb exactly. Returns the new
/// graph and the map φ on base vertices: identity off kb, the first
/// replacement vertex on kb.
pub fn compact_perturbation(
    base: &SimpleGraph,
    kb: &[usize],
    replacement: &SimpleGraph,
    gluing: &[(usize, usize)],
) -> Result<(SimpleGraph, Vec<usize>)> {
    if kb.is_empty() {
        return Err(Error::Construction("empty excised set".into()));
    }
    let mut in_kb = vec![false; base.len()];
    for &k in kb {
        if k >= base.len() {
            return Err(Error::Construction(format!("vertex {k} not in base")));
        }
        if base.safe_radius(k) < 1 {
            return Err(Error::Construction(format!("vertex {k} is on the window boundary")));
        }
        in_kb[k] = true;
    }
    let mut cut: BTreeMap<usize, usize> = BTreeMap::new();
    for &k in kb {
        for &u in base.neighbors(k) {
            if !in_kb[u] {
                *cut.entry(u).or_default() += 1;
            }
        }
    }
    let mut glued: BTreeMap<usize, usize> = BTreeMap::new();
    for &(r, u) in gluing {
        if r >= replacement.len() || u >= base.len() || in_kb[u] {
            return Err(Error::Construction(format!("gluing edge ({r},{u}) is not from the replacement to the outside")));
        }
        *glued.entry(u).or_default() += 1;
    }
    if cut != glued {
        return Err(Error::Construction(format!("gluing {glued:?} does not match the cut edges {cut:?}")));
    }

    let kept: Vec<usize> = (0..base.len()).filter(|&v| !in_kb[v]).collect();
    let mut new_index = vec![usize::MAX; base.len()];
    for (i, &v) in kept.iter().enumerate() {
        new_index[v] = i;
    }
    let off = kept.len();
    let n = off + replacement.len();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (u, v) in base.edges() {
        if !in_kb[u] && !in_kb[v] {
            edges.push((new_index[u], new_index[v]));
        }
    }
    edges.extend(replacement.edges().into_iter().map(|(u, v)| (off + u, off + v)));
    edges.extend(gluing.iter().map(|&(r, u)| (off + r, new_index[u])));

    let mut labels: Vec<Option<VertexAddress>> = kept.iter().map(|&v| base.labels[v].clone()).collect();
    labels.extend(replacement.labels.iter().cloned());
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let max_deg = adj.iter().map(Vec::len).max().unwrap_or(0) as u32;
    let boundary: Vec<usize> = kept.iter().enumerate().filter(|(_, &v)| base.is_boundary(v)).map(|(i, _)| i).collect();
    let probe = SimpleGraph {
        adj: adj.into_iter().map(|mut a| {
            a.sort_unstable();
            a
        }).collect(),
        labels: vec![None; n],
        q: 0,
        safe_radius: vec![0; n],
    };
    let safe = if boundary.is_empty() { vec![u32::MAX; n] } else { probe.multi_bfs(&boundary) };
    let g = SimpleGraph::from_edges(n, &edges, labels, base.q.max(max_deg.saturating_sub(1)), safe)?;
    let phi = (0..base.len()).map(|v| if in_kb[v] { off } else { new_index[v] }).collect();
    Ok((g, phi))
}

/// A k-cycle (k >= 3), used as a replacement block.
pub fn cycle_graph(k: usize) -> Result<SimpleGraph> {
    let edges: Vec<(usize, usize)> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    SimpleGraph::from_edges(k, &edges, vec![None; k], 2, vec![1; k])
}

/// The 3-cycle splice at the centre of a radius-`radius` window of T_b, b = 2:
/// each cycle vertex takes one of the centre's three cut edges.
pub fn triangle_splice(radius: u32) -> Result<(SimpleGraph, SimpleGraph, Vec<usize>)> {
    if radius < 1 {
        return Err(Error::Construction("the splice needs radius >= 1".into()));
    }
    let t = Tree::new(crate::tree::TreeSpec::homogeneous(2)?);
    let base = window_graph(&t, &t.origin(), radius)?;
    let tri = cycle_graph(3)?;
    let o = 0;
    let gluing: Vec<(usize, usize)> = base.neighbors(o).iter().enumerate().map(|(i, &u)| (i, u)).collect();
    let (g, phi) = compact_perturbation(&base, &[o], &tri, &gluing)?;
    Ok((base, g, phi))
}

/// V^Q(r) as used for graph volume bounds.
pub fn v_q(q: u32, r: u32) -> BigUint {
    if q == 0 {
        return BigUint::one();
    }
    volume_profile(q as u64, r).0
}
