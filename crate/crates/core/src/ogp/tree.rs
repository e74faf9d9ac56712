//! `D`-regular replica trees and the leaf-indexed families of coupled
//! Gaussian tensors they drive.
//!
//! The root has depth 1 and leaves have depth `N`. A vertex is stored as
//! `(depth, ordinal)` where the ordinal reads the root-to-vertex path as a
//! base-`D` number, so the ancestor of `v` at depth `i` has ordinal
//! `v.ordinal / D^(depth - i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::tensor::{GaussianSource, Tensor};
use crate::theory::PartitionScheme;

/// Upper limit on the number of tree vertices.
pub const MAX_TREE_VERTICES: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub depth: usize,
    pub ordinal: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaTree {
    scheme: PartitionScheme,
    master: StreamKey,
    /// `level_sizes[j - 1] = D^(j-1)`.
    level_sizes: Vec<usize>,
}

impl ReplicaTree {
    pub fn new(scheme: PartitionScheme, master: StreamKey) -> Result<Self> {
        if scheme.depth == 0 || scheme.branching == 0 {
            return Err(Error::InvalidArgument("tree needs N >= 1 and D >= 1".into()));
        }
        let mut level_sizes = Vec::with_capacity(scheme.depth);
        let mut total = 0usize;
        let mut size = 1usize;
        for j in 1..=scheme.depth {
            if j > 1 {
                size = size
                    .checked_mul(scheme.branching)
                    .filter(|&s| s <= MAX_TREE_VERTICES)
                    .ok_or_else(|| too_large(&scheme))?;
            }
            total += size;
            if total > MAX_TREE_VERTICES {
                return Err(too_large(&scheme));
            }
            level_sizes.push(size);
        }
        Ok(ReplicaTree {
            scheme,
            master,
            level_sizes,
        })
    }

    pub fn scheme(&self) -> &PartitionScheme {
        &self.scheme
    }

    pub fn master(&self) -> StreamKey {
        self.master
    }

    pub fn depth(&self) -> usize {
        self.scheme.depth
    }

    pub fn branching(&self) -> usize {
        self.scheme.branching
    }

    pub fn level_size(&self, depth: usize) -> usize {
        self.level_sizes[depth - 1]
    }

    pub fn leaf_count(&self) -> usize {
        self.level_sizes[self.depth() - 1]
    }

    pub fn vertex_count(&self) -> usize {
        self.level_sizes.iter().sum()
    }

    pub fn root(&self) -> Vertex {
        Vertex { depth: 1, ordinal: 0 }
    }

    pub fn leaf(&self, ordinal: usize) -> Vertex {
        Vertex {
            depth: self.depth(),
            ordinal,
        }
    }

    /// All vertices, level by level.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (1..=self.depth()).flat_map(move |depth| {
            (0..self.level_size(depth)).map(move |ordinal| Vertex { depth, ordinal })
        })
    }

    /// Dense id in level order (root = 0).
    pub fn vertex_id(&self, v: Vertex) -> usize {
        self.level_sizes[..v.depth - 1].iter().sum::<usize>() + v.ordinal
    }

    pub fn ancestor(&self, v: Vertex, depth: usize) -> Vertex {
        assert!(1 <= depth && depth <= v.depth);
        let shift = self.branching().pow((v.depth - depth) as u32);
        Vertex {
            depth,
            ordinal: v.ordinal / shift,
        }
    }

    /// Ordinals of the leaves below `v`.
    pub fn leaves_below(&self, v: Vertex) -> std::ops::Range<usize> {
        let width = self.branching().pow((self.depth() - v.depth) as u32);
        v.ordinal * width..(v.ordinal + 1) * width
    }

    /// Depth of the deepest common ancestor.
    pub fn meet_depth(&self, u: Vertex, v: Vertex) -> usize {
        let top = u.depth.min(v.depth);
        (1..=top)
            .rev()
            .find(|&d| self.ancestor(u, d) == self.ancestor(v, d))
            .unwrap_or(1)
    }

    /// Child indices from the root to `v`.
    pub fn path(&self, v: Vertex) -> Vec<usize> {
        (2..=v.depth)
            .map(|d| self.ancestor(v, d).ordinal % self.branching())
            .collect()
    }

    /// Stream key of `v`: the master key derived along the vertex path.
    pub fn vertex_key(&self, v: Vertex) -> StreamKey {
        let path: Vec<u64> = self.path(v).into_iter().map(|t| t as u64).collect();
        self.master.derive(&path)
    }
}

fn too_large(scheme: &PartitionScheme) -> Error {
    Error::Capacity(format!(
        "replica tree with D = {}, N = {} exceeds {MAX_TREE_VERTICES} vertices",
        scheme.branching, scheme.depth
    ))
}

/// `⌊α n⌋`, snapping products that are integers up to rounding.
pub(crate) fn floor_scaled(alpha: f64, n: usize) -> usize {
    let x = alpha * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * (n as f64).max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// Leaf tensors `G^v` with `G^v(idx) = E^{v(j)}(idx)` for the smallest `j`
/// whose corner `[⌊α_j n⌋]^p` contains `idx`.
#[derive(Clone, Debug)]
pub struct CorrelatedFamily {
    tree: ReplicaTree,
    n: usize,
    p: usize,
    k: usize,
    /// `corners[j] = ⌊α_j n⌋`, `j = 0..=N`.
    corners: Vec<usize>,
}

pub fn correlated_instances(tree: ReplicaTree, n: usize, p: usize, k: usize) -> Result<CorrelatedFamily> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidDimension(format!("n = {n}, p = {p}")));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let corners: Vec<usize> = tree
        .scheme()
        .alphas
        .iter()
        .map(|&a| floor_scaled(a, n))
        .collect();
    if let Some(w) = corners.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "degenerate grid for n = {n}: corner {} repeats or decreases to {}",
            w[0], w[1]
        )));
    }
    Ok(CorrelatedFamily {
        tree,
        n,
        p,
        k,
        corners,
    })
}

impl CorrelatedFamily {
    pub fn tree(&self) -> &ReplicaTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn corners(&self) -> &[usize] {
        &self.corners
    }

    /// Vertex stream `E^v`.
    pub fn vertex_source(&self, v: Vertex) -> GaussianSource {
        GaussianSource::new(self.n, self.p, self.tree.vertex_key(v)).expect("dimensions checked")
    }

    /// Depth `j` whose stream drives `idx`.
    pub fn driving_depth(&self, idx: &[usize]) -> usize {
        let m = idx.iter().copied().max().unwrap_or(1);
        self.corners[1..]
            .iter()
            .position(|&c| m <= c)
            .map(|j| j + 1)
            .unwrap_or(self.tree.depth())
    }

    pub fn leaf(&self, ordinal: usize) -> LeafTensor<'_> {
        let leaf = self.tree.leaf(ordinal);
        let sources = (1..=self.tree.depth())
            .map(|d| self.vertex_source(self.tree.ancestor(leaf, d)))
            .collect();
        LeafTensor {
            family: self,
            ordinal,
            sources,
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.tree.leaf_count()
    }

    /// Entry of leaf tensor `ordinal` (unchecked indices).
    pub fn leaf_entry(&self, ordinal: usize, idx: &[usize]) -> f64 {
        let leaf = self.tree.leaf(ordinal);
        let j = self.driving_depth(idx);
        self.vertex_source(self.tree.ancestor(leaf, j)).value(idx)
    }

    /// Output step boundaries `α_j k`, `j = 0..=N`; each must be an integer.
    pub fn step_boundaries(&self) -> Result<Vec<usize>> {
        step_boundaries(self.tree.scheme(), self.k)
    }
}

pub(crate) fn step_boundaries(scheme: &PartitionScheme, k: usize) -> Result<Vec<usize>> {
    scheme
        .alphas
        .iter()
        .map(|&a| {
            let x = a * k as f64;
            let r = x.round();
            if (x - r).abs() > 1e-9 * (k as f64).max(1.0) {
                Err(Error::InvalidArgument(format!(
                    "alpha = {a} times k = {k} is not an integer (use k divisible by N)"
                )))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}

/// One leaf of a correlated family, usable wherever a tensor is expected.
#[derive(Clone, Debug)]
pub struct LeafTensor<'a> {
    family: &'a CorrelatedFamily,
    ordinal: usize,
    /// Streams of the ancestors at depths `1..=N`.
    sources: Vec<GaussianSource>,
}

impl LeafTensor<'_> {
    pub fn ordinal(&self) -> usize {
        self.ordinal
    }
}

impl Tensor for LeafTensor<'_> {
    fn side(&self) -> usize {
        self.family.n
    }
    fn order(&self) -> usize {
        self.family.p
    }
    #[inline]
    fn value(&self, idx: &[usize]) -> f64 {
        let j = self.family.driving_depth(idx);
        self.sources[j - 1].value(idx)
    }
}
