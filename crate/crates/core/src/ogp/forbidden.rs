//! Forbidden-structure candidates: disjoint per-vertex coordinate sets
//! `A_v^{(s)}`, the index shells `E_v` they induce, and the leaf
//! subtensors `M_v` assembled along root-to-leaf rays.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ExactSum;
use crate::tensor::{for_each_product, Selection, Tensor};
use crate::theory::{kappa, scale_dn, AsymptoticParams};

use super::tree::{step_boundaries, CorrelatedFamily, ReplicaTree, Vertex};

/// Per-vertex coordinate sets over a replica tree.
#[derive(Clone, Debug)]
pub struct ForbiddenCandidate {
    tree: ReplicaTree,
    p: usize,
    k: usize,
    /// `sizes[j] = (α_j - α_{j-1}) k` for `j = 1..=N` (`sizes[0]` unused).
    sizes: Vec<usize>,
    /// Indexed by vertex id, then coordinate.
    sets: Vec<Option<Vec<Vec<usize>>>>,
}

/// Two distinct vertices sharing an index in the same coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub u: Vertex,
    pub v: Vertex,
    /// 1-based coordinate.
    pub coordinate: usize,
    pub index: usize,
}

impl ForbiddenCandidate {
    /// Empty candidate; shell sizes come from `α_j k`, which must be integral.
    pub fn new(tree: ReplicaTree, p: usize, k: usize) -> Result<Self> {
        if p == 0 || k == 0 {
            return Err(Error::InvalidArgument(format!("p = {p}, k = {k}")));
        }
        let bounds = step_boundaries(tree.scheme(), k)?;
        let mut sizes = vec![0];
        sizes.extend(bounds.windows(2).map(|w| w[1] - w[0]));
        let count = tree.vertex_count();
        Ok(ForbiddenCandidate {
            tree,
            p,
            k,
            sizes,
            sets: vec![None; count],
        })
    }

    pub fn tree(&self) -> &ReplicaTree {
        &self.tree
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Required `|A_v^{(s)}|` for a vertex at `depth`.
    pub fn shell_width(&self, depth: usize) -> usize {
        self.sizes[depth]
    }

    /// Assigns `A_v^{(1)}, …, A_v^{(p)}`.
    pub fn assign(&mut self, v: Vertex, sets: Vec<Vec<usize>>) -> Result<()> {
        if sets.len() != self.p {
            return Err(Error::InvalidArgument(format!(
                "{} coordinate sets given, expected {}",
                sets.len(),
                self.p
            )));
        }
        let want = self.sizes[v.depth];
        if let Some((s, set)) = sets.iter().enumerate().find(|(_, s)| s.len() != want) {
            return Err(Error::InvalidArgument(format!(
                "A_v^({}) at depth {} has {} indices, expected {want}",
                s + 1,
                v.depth,
                set.len()
            )));
        }
        let id = self.tree.vertex_id(v);
        self.sets[id] = Some(sets);
        Ok(())
    }

    pub fn sets(&self, v: Vertex) -> Option<&[Vec<usize>]> {
        self.sets[self.tree.vertex_id(v)].as_deref()
    }

    fn require(&self, v: Vertex) -> Result<&[Vec<usize>]> {
        self.sets(v).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "vertex (depth {}, ordinal {}) has no assignment",
                v.depth, v.ordinal
            ))
        })
    }

    /// First pair of distinct assigned vertices sharing an index in one
    /// coordinate, scanning vertices level by level.
    pub fn find_collision(&self) -> Option<Collision> {
        for s in 0..self.p {
            let mut owner: HashMap<usize, Vertex> = HashMap::new();
            for v in self.tree.vertices() {
                let Some(sets) = self.sets(v) else { continue };
                for &i in &sets[s] {
                    if let Some(&u) = owner.get(&i) {
                        if u != v {
                            return Some(Collision {
                                u,
                                v,
                                coordinate: s + 1,
                                index: i,
                            });
                        }
                    } else {
                        owner.insert(i, v);
                    }
                }
            }
        }
        None
    }

    /// `∪_{i≤depth} A^{(s)}_{v(i)}` per coordinate, concatenated root first.
    fn ray_union(&self, v: Vertex, depth: usize) -> Result<Vec<Vec<usize>>> {
        let mut out = vec![Vec::new(); self.p];
        for d in 1..=depth {
            let sets = self.require(self.tree.ancestor(v, d))?;
            for (acc, set) in out.iter_mut().zip(sets) {
                acc.extend_from_slice(set);
            }
        }
        Ok(out)
    }
}

/// Index shell `E_v`: tuples of `∏_s ∪_{i≤j} A^{(s)}_{v(i)}` with at least
/// one coordinate `s` in `A_v^{(s)}`. Returned sorted and deduplicated.
pub fn build_ev(cand: &ForbiddenCandidate, v: Vertex) -> Result<Vec<Vec<usize>>> {
    let own: Vec<BTreeSet<usize>> = cand
        .require(v)?
        .iter()
        .map(|s| s.iter().copied().collect())
        .collect();
    let union = cand.ray_union(v, v.depth)?;
    let factors: Vec<&[usize]> = union.iter().map(Vec::as_slice).collect();
    let mut shell = Vec::new();
    for_each_product(&factors, |idx| {
        if idx.iter().zip(&own).any(|(i, a)| a.contains(i)) {
            shell.push(idx.to_vec());
        }
    });
    shell.sort_unstable();
    shell.dedup();
    Ok(shell)
}

/// Leaf subtensor `M_v` as the selection of ray unions (root shell first).
///
/// Checks that the shells along the ray tile the product exactly.
pub fn assemble_mv(cand: &ForbiddenCandidate, leaf: Vertex) -> Result<Selection> {
    if leaf.depth != cand.tree.depth() {
        return Err(Error::InvalidArgument(format!(
            "vertex at depth {} is not a leaf",
            leaf.depth
        )));
    }
    let union = cand.ray_union(leaf, leaf.depth)?;
    let mut tiled = Vec::new();
    for d in 1..=leaf.depth {
        tiled.extend(build_ev(cand, cand.tree.ancestor(leaf, d))?);
    }
    tiled.sort_unstable();
    let before = tiled.len();
    tiled.dedup();
    let factors: Vec<&[usize]> = union.iter().map(Vec::as_slice).collect();
    let mut product = Vec::new();
    for_each_product(&factors, |idx| product.push(idx.to_vec()));
    product.sort_unstable();
    if before != tiled.len() || tiled != product {
        return Err(Error::InvalidSelection(format!(
            "shells along the ray to leaf {} do not tile the product ({} shell entries, {} product entries)",
            leaf.ordinal,
            before,
            product.len()
        )));
    }
    Selection::new(union)
}

/// `γ*_v = Σ_{idx ∈ E_v} G_idx / 𝔇_n`.
pub fn gamma_star<T: Tensor + ?Sized>(
    src: &T,
    shell: &[Vec<usize>],
    params: &AsymptoticParams,
) -> Result<f64> {
    if shell.is_empty() {
        return Err(Error::InvalidArgument("empty index shell".into()));
    }
    let mut acc = ExactSum::new();
    for idx in shell {
        acc.add(src.entry(idx)?);
    }
    Ok(acc.value() / scale_dn(params)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Every leaf reaches the threshold.
    Forbidden { min_leaf_sum: f64, threshold: f64 },
    /// The first leaf (in order) that misses the threshold.
    BelowThreshold { leaf: usize, sum: f64, threshold: f64 },
    /// Same-coordinate sets of two distinct vertices intersect.
    StructurallyInvalid { collision: Collision },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Forbidden { .. } => "forbidden",
            Verdict::BelowThreshold { .. } => "below_threshold",
            Verdict::StructurallyInvalid { .. } => "structurally_invalid",
        }
    }
}

/// Checks whether every leaf subtensor sum reaches `(κ_p + ε) 𝔇_n`.
/// `leaf_tensor(ordinal)` supplies the tensor `M_v` is read from.
pub fn is_forbidden<F, T>(cand: &ForbiddenCandidate, leaf_tensor: F, params: &AsymptoticParams) -> Result<Verdict>
where
    F: Fn(usize) -> T,
    T: Tensor,
{
    if let Some(collision) = cand.find_collision() {
        return Ok(Verdict::StructurallyInvalid { collision });
    }
    let threshold = (kappa(params.p)? + params.epsilon) * scale_dn(params)?;
    let mut min_sum = f64::INFINITY;
    for ordinal in 0..cand.tree.leaf_count() {
        let sel = assemble_mv(cand, cand.tree.leaf(ordinal))?;
        let sum = crate::tensor::sum_subtensor(&leaf_tensor(ordinal), &sel)?;
        if sum < threshold {
            return Ok(Verdict::BelowThreshold {
                leaf: ordinal,
                sum,
                threshold,
            });
        }
        min_sum = min_sum.min(sum);
    }
    Ok(Verdict::Forbidden {
        min_leaf_sum: min_sum,
        threshold,
    })
}

/// Why leaf outputs do not form a candidate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    /// Two leaves below `vertex` emitted different increments at `step`.
    IncrementMismatch {
        vertex: Vertex,
        leaf_a: usize,
        leaf_b: usize,
        step: usize,
    },
    /// Diverged branches reused an index.
    Collision { collision: Collision },
}

#[derive(Clone, Debug)]
pub enum Extraction {
    Candidate(ForbiddenCandidate),
    Violation(Violation),
}

impl Extraction {
    pub fn label(&self) -> &'static str {
        match self {
            Extraction::Candidate(_) => "candidate",
            Extraction::Violation(Violation::IncrementMismatch { .. }) => "increment_mismatch",
            Extraction::Violation(Violation::Collision { .. }) => "collision",
        }
    }
}

/// Reads per-vertex coordinate sets off the leaf outputs.
///
/// A vertex at depth `j` receives the indices appended at output steps
/// `(α_{j-1} k, α_j k]` by the leaves below it; those leaves must agree
/// on them, and distinct vertices must not share an index per coordinate.
pub fn outputs_to_candidate(family: &CorrelatedFamily, outputs: &[Selection]) -> Result<Extraction> {
    let tree = family.tree();
    if outputs.len() != tree.leaf_count() {
        return Err(Error::InvalidArgument(format!(
            "{} leaf outputs for {} leaves",
            outputs.len(),
            tree.leaf_count()
        )));
    }
    for (leaf, sel) in outputs.iter().enumerate() {
        if sel.k() != family.k() || sel.order() != family.p() {
            return Err(Error::InvalidSelection(format!(
                "leaf {leaf} output is {}^{}, expected {}^{}",
                sel.k(),
                sel.order(),
                family.k(),
                family.p()
            )));
        }
    }
    let bounds = family.step_boundaries()?;
    let mut cand = ForbiddenCandidate::new(tree.clone(), family.p(), family.k())?;
    for v in tree.vertices() {
        let (lo, hi) = (bounds[v.depth - 1], bounds[v.depth]);
        let mut leaves = tree.leaves_below(v);
        let first = leaves.next().expect("every vertex has a leaf below");
        let reference = &outputs[first];
        for other in leaves {
            for step in lo..hi {
                let differs = (0..family.p())
                    .any(|s| outputs[other].set(s)[step] != reference.set(s)[step]);
                if differs {
                    return Ok(Extraction::Violation(Violation::IncrementMismatch {
                        vertex: v,
                        leaf_a: first,
                        leaf_b: other,
                        step: step + 1,
                    }));
                }
            }
        }
        let sets = (0..family.p())
            .map(|s| reference.set(s)[lo..hi].to_vec())
            .collect();
        cand.assign(v, sets)?;
    }
    if let Some(collision) = cand.find_collision() {
        return Ok(Extraction::Violation(Violation::Collision { collision }));
    }
    Ok(Extraction::Candidate(cand))
}
