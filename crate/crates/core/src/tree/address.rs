use std::fmt;

use serde::{Deserialize, Serialize};

/// A vertex as (ancestor steps along the reference ray, child-index path).
///
/// In rooted addressing `up` is always 0 and `down` is the path from the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexAddress {
    pub up: u32,
    pub down: Vec<u32>,
}

impl VertexAddress {
    pub fn new(up: u32, down: Vec<u32>) -> Self {
        VertexAddress { up, down }
    }

    pub fn origin() -> Self {
        VertexAddress { up: 0, down: vec![] }
    }

    /// Rooted path from the root.
    pub fn rooted(down: Vec<u32>) -> Self {
        VertexAddress { up: 0, down }
    }

    /// The spine vertex w_k.
    pub fn spine(k: u32) -> Self {
        VertexAddress { up: k, down: vec![] }
    }

    pub fn height(&self) -> i64 {
        self.up as i64 - self.down.len() as i64
    }

    pub fn is_canonical(&self) -> bool {
        !(self.up > 0 && self.down.first() == Some(&0))
    }

    /// Strip leading spine descents.
    pub fn canonicalize(mut self) -> Self {
        let zeros = self.down.iter().take(self.up as usize).take_while(|&&i| i == 0).count();
        if zeros > 0 {
            self.down.drain(..zeros);
            self.up -= zeros as u32;
        }
        self
    }

    /// The same vertex written relative to the spine vertex w_k, k >= up.
    pub fn anchored_path(&self, k: u32) -> Vec<u32> {
        debug_assert!(k >= self.up);
        let mut p = vec![0; (k - self.up) as usize];
        p.extend_from_slice(&self.down);
        p
    }

    /// Graph distance; both addresses canonical and from the same tree.
    pub fn distance(&self, o: &VertexAddress) -> u64 {
        let k = self.up.max(o.up);
        let pad_a = (k - self.up) as usize;
        let pad_b = (k - o.up) as usize;
        let la = pad_a + self.down.len();
        let lb = pad_b + o.down.len();
        let at = |pad: usize, d: &[u32], i: usize| if i < pad { 0 } else { d[i - pad] };
        let mut c = 0;
        while c < la && c < lb && at(pad_a, &self.down, c) == at(pad_b, &o.down, c) {
            c += 1;
        }
        (la + lb - 2 * c) as u64
    }
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},[", self.up)?;
        for (i, c) in self.down.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("])")
    }
}
