//! Vector-valued binary trees grown greedily by edge improvement.
//!
//! Each node holds a stump cut and a vote vector. Inner nodes only use the
//! cut for routing; leaves emit `+v` (right) or `-v` (left). One global
//! coefficient scales the whole tree. Growth maintains a max-priority queue
//! keyed by the edge improvement a cut would bring over its parent's edge
//! restricted to the same rows.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::classifier::{FactorizedClassifier, Stump};
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::stump_learner::{compute_alpha, Subset};
use crate::weights::WeightMatrix;

/// Node list plus child-index lists plus one global coefficient. Node 0 is
/// the root; per-node coefficients from the base learner are discarded.
#[derive(Debug, Clone)]
pub struct HammingTree {
    pub nodes: Vec<TreeNode>,
    pub left: Vec<Option<u32>>,
    pub right: Vec<Option<u32>>,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub votes: Vec<i8>,
    pub stump: Stump,
}

impl HammingTree {
    pub fn k(&self) -> usize {
        self.nodes[0].votes.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `h(x)` as a length-K vector; every entry has magnitude `alpha`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        for node in &self.nodes {
            if node.stump.feature >= x.len() {
                return Err(Error::Dimension(format!(
                    "tree reads feature {} but input has {} components",
                    node.stump.feature,
                    x.len()
                )));
            }
        }
        let mut signs = vec![0i8; self.k()];
        self.signs_into(x, &mut signs);
        Ok(signs.iter().map(|&s| self.alpha * s as f64).collect())
    }

    /// Routes `x` down the cuts and writes the leaf's `{+1,-1}` vector.
    pub(crate) fn signs_into(&self, x: &[f64], out: &mut [i8]) {
        let mut j = 0usize;
        loop {
            let node = &self.nodes[j];
            if node.stump.eval(x) == -1 {
                match self.left[j] {
                    None => {
                        for (o, &v) in out.iter_mut().zip(&node.votes) {
                            *o = -v;
                        }
                        return;
                    }
                    Some(c) => j = c as usize,
                }
            } else {
                match self.right[j] {
                    None => {
                        for (o, &v) in out.iter_mut().zip(&node.votes) {
                            *o = v;
                        }
                        return;
                    }
                    Some(c) => j = c as usize,
                }
            }
        }
    }

    /// Structural check used at load time: well-formed child lists (every
    /// non-root node referenced exactly once, no cycles), consistent vote
    /// lengths, stump features inside `d`, nonnegative finite alpha.
    pub fn validate(&self, k: usize, d: usize) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::ModelFormat("tree with no nodes".into()));
        }
        if self.left.len() != n || self.right.len() != n {
            return Err(Error::ModelFormat("child index lists do not match node count".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::ModelFormat(format!("tree alpha {} invalid", self.alpha)));
        }
        let mut referenced = vec![0usize; n];
        for (j, node) in self.nodes.iter().enumerate() {
            if node.votes.len() != k {
                return Err(Error::ModelFormat(format!(
                    "node {} has {} votes, expected {}",
                    j,
                    node.votes.len(),
                    k
                )));
            }
            if node.votes.iter().any(|&v| v != 1 && v != -1) {
                return Err(Error::ModelFormat(format!("node {} has a vote outside {{+1,-1}}", j)));
            }
            if node.stump.feature >= d {
                return Err(Error::ModelFormat(format!(
                    "node {} reads feature {}, dataset has {}",
                    j, node.stump.feature, d
                )));
            }
            for child in [self.left[j], self.right[j]].into_iter().flatten() {
                let c = child as usize;
                if c >= n || c == 0 {
                    return Err(Error::ModelFormat(format!(
                        "node {} has invalid child index {}",
                        j, c
                    )));
                }
                referenced[c] += 1;
            }
        }
        if let Some(j) = (1..n).find(|&j| referenced[j] != 1) {
            return Err(Error::ModelFormat(format!(
                "node {} referenced {} times, expected exactly once",
                j, referenced[j]
            )));
        }
        if referenced[0] != 0 {
            return Err(Error::ModelFormat("root referenced as a child".into()));
        }
        // each node referenced once and the root never: reachability from the
        // root follows, but verify to rule out disjoint cycles
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        while let Some(j) = stack.pop() {
            if seen[j] {
                return Err(Error::ModelFormat("cycle in tree".into()));
            }
            seen[j] = true;
            for child in [self.left[j], self.right[j]].into_iter().flatten() {
                stack.push(child as usize);
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::ModelFormat("unreachable tree node".into()));
        }
        Ok(())
    }
}

/// Edge of `(votes, phi)` restricted to `rows`; weights are not renormalized
/// on the subset.
pub fn subset_edge(
    votes: &[i8],
    stump: &Stump,
    rows: &[u32],
    data: &DataSet,
    w: &WeightMatrix,
) -> f64 {
    let k = data.k();
    let mut edge = 0.0;
    for &i in rows {
        let i = i as usize;
        let phi = stump.eval(data.row(i)) as f64;
        let wr = w.row(i);
        let yr = data.label_row(i);
        for l in 0..k {
            edge += wr[l] * votes[l] as f64 * phi * yr[l] as f64;
        }
    }
    edge
}

/// Base learner trained at each candidate leaf.
pub trait BaseLearner {
    fn train(&self, data: &DataSet, w: &WeightMatrix, subset: &Subset) -> Result<FactorizedClassifier>;
}

/// The stump base learner of this crate.
#[derive(Debug, Clone, Copy, Default)]
pub struct StumpLearner;

impl BaseLearner for StumpLearner {
    fn train(&self, data: &DataSet, w: &WeightMatrix, subset: &Subset) -> Result<FactorizedClassifier> {
        crate::stump_learner::stump_base(data, w, subset)
    }
}

/// Finished build: the tree, its training edge, and the improvement key of
/// every expansion in pop order (the root's key is its full edge).
#[derive(Debug)]
pub struct TreeBuild {
    pub tree: HammingTree,
    pub edge: f64,
    pub expansion_keys: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

struct Candidate {
    votes: Vec<i8>,
    stump: Stump,
    subset: Subset,
    parent: Option<u32>,
    side: Side,
}

struct HeapEntry {
    key: f64,
    seq: u64,
    cand: Candidate,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max key first; FIFO among equal keys
        self.key
            .total_cmp(&other.key)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Grows a Hamming tree with at most `n_nodes` nodes on the full dataset.
pub fn tree_base<B: BaseLearner>(
    data: &DataSet,
    w: &WeightMatrix,
    base: &B,
    n_nodes: usize,
    root_subset: Subset,
) -> Result<TreeBuild> {
    if n_nodes < 1 {
        return Err(Error::InvalidInput(format!("tree needs N >= 1 inner nodes, got {n_nodes}")));
    }
    let all_rows = root_subset.rows.clone();

    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut seq = 0u64;
    let root_cls = base.train(data, w, &root_subset)?;
    let root_edge = subset_edge(&root_cls.votes, &root_cls.stump, &root_subset.rows, data, w);
    heap.push(HeapEntry {
        key: root_edge,
        seq,
        cand: Candidate {
            votes: root_cls.votes,
            stump: root_cls.stump,
            subset: root_subset,
            parent: None,
            side: Side::Right,
        },
    });

    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut left: Vec<Option<u32>> = Vec::new();
    let mut right: Vec<Option<u32>> = Vec::new();
    let mut expansion_keys = Vec::new();

    for _ in 0..n_nodes {
        let Some(entry) = heap.pop() else { break };
        let cand = entry.cand;
        expansion_keys.push(entry.key);
        let idx = nodes.len() as u32;
        if let Some(p) = cand.parent {
            match cand.side {
                Side::Left => left[p as usize] = Some(idx),
                Side::Right => right[p as usize] = Some(idx),
            }
        }
        nodes.push(TreeNode { votes: cand.votes, stump: cand.stump });
        left.push(None);
        right.push(None);

        let node = &nodes[idx as usize];
        let (neg, pos) = cand.subset.cut(&node.stump, data);
        for (side, sub) in [(Side::Left, neg), (Side::Right, pos)] {
            if sub.is_empty() {
                continue;
            }
            let cls = base.train(data, w, &sub)?;
            let child_edge = subset_edge(&cls.votes, &cls.stump, &sub.rows, data, w);
            let parent_edge = subset_edge(&node.votes, &node.stump, &sub.rows, data, w);
            seq += 1;
            heap.push(HeapEntry {
                key: child_edge - parent_edge,
                seq,
                cand: Candidate {
                    votes: cls.votes,
                    stump: cls.stump,
                    subset: sub,
                    parent: Some(idx),
                    side,
                },
            });
        }
    }

    let mut tree = HammingTree { nodes, left, right, alpha: 0.0 };
    let edge = tree_edge(&tree, &all_rows, data, w);
    tree.alpha = compute_alpha(edge)?;
    Ok(TreeBuild { tree, edge, expansion_keys })
}

/// Edge of the tree's sign-valued output over `rows`.
pub fn tree_edge(tree: &HammingTree, rows: &[u32], data: &DataSet, w: &WeightMatrix) -> f64 {
    let k = data.k();
    let mut signs = vec![0i8; k];
    let mut edge = 0.0;
    for &i in rows {
        let i = i as usize;
        tree.signs_into(data.row(i), &mut signs);
        let wr = w.row(i);
        let yr = data.label_row(i);
        for l in 0..k {
            edge += wr[l] * signs[l] as f64 * yr[l] as f64;
        }
    }
    edge
}
