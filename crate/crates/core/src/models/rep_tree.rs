//! Classification tree grown by information gain and pruned by reduced-error
//! pruning against a held-out share of the training rows.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax, ModelError, Samples};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepTreeConfig {
    /// `None` grows until the leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf_count: usize,
    /// Share of the training rows held out for pruning.
    pub pruning_fraction: f64,
    pub seed: u64,
}

impl Default for RepTreeConfig {
    fn default() -> Self {
        Self { max_depth: None, min_leaf_count: 2, pruning_fraction: 1.0 / 3.0, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Class counts of the growing rows that reached this node.
    pub counts: Vec<u32>,
    pub class: usize,
    pub split: Option<Split>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    /// Rows with `x[feature] <= threshold` go left.
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneSummary {
    pub grow_rows: usize,
    pub prune_rows: usize,
    pub nodes_before: usize,
    pub nodes_after: usize,
    pub prune_errors_before: usize,
    pub prune_errors_after: usize,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepTree {
    /// Arena; node 0 is the root.
    pub nodes: Vec<TreeNode>,
    pub summary: PruneSummary,
}

impl RepTree {
    pub(crate) fn fit(c: &RepTreeConfig, s: &Samples<'_>) -> Result<Self, ModelError> {
        if !(c.pruning_fraction > 0.0 && c.pruning_fraction < 1.0) {
            return Err(ModelError::InvalidConfig("pruning_fraction must be in (0, 1)".into()));
        }
        if c.min_leaf_count == 0 {
            return Err(ModelError::InvalidConfig("min_leaf_count must be at least 1".into()));
        }
        let (grow, prune) = split_rows(s, c.pruning_fraction, c.seed);
        let grown = grow_tree(s, &grow, c);
        let nodes_before = grown.len();
        let prune_errors_before = errors_on(&grown, s, &prune);
        let pruned = reduced_error_prune(grown, s, &prune);
        let nodes = compact(&pruned);
        let summary = PruneSummary {
            grow_rows: grow.len(),
            prune_rows: prune.len(),
            nodes_before,
            nodes_after: nodes.len(),
            prune_errors_before,
            prune_errors_after: errors_on(&nodes, s, &prune),
            depth: depth(&nodes),
        };
        Ok(Self { nodes, summary })
    }

    pub fn leaf_for(&self, row: &[f64]) -> usize {
        descend(&self.nodes, row)
    }

    pub(crate) fn proba(&self, row: &[f64]) -> Vec<f64> {
        let node = &self.nodes[self.leaf_for(row)];
        let total: u32 = node.counts.iter().sum();
        node.counts.iter().map(|&c| f64::from(c) / f64::from(total)).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Stratified random split into (grow, prune) row indices.
fn split_rows(s: &Samples<'_>, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grow = Vec::new();
    let mut prune = Vec::new();
    for cls in 0..s.n_classes {
        let mut idx: Vec<usize> = (0..s.n()).filter(|&i| s.y[i] == cls).collect();
        idx.shuffle(&mut rng);
        let held = (idx.len() as f64 * fraction).round() as usize;
        let held = held.min(idx.len().saturating_sub(1));
        prune.extend_from_slice(&idx[..held]);
        grow.extend_from_slice(&idx[held..]);
    }
    grow.sort_unstable();
    prune.sort_unstable();
    (grow, prune)
}

fn entropy(counts: &[u32], total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = f64::from(total);
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = f64::from(c) / t;
            -p * p.log2()
        })
        .sum()
}

fn class_counts(s: &Samples<'_>, idx: &[usize]) -> Vec<u32> {
    let mut counts = vec![0u32; s.n_classes];
    for &i in idx {
        counts[s.y[i]] += 1;
    }
    counts
}

fn majority(counts: &[u32]) -> usize {
    let as_f: Vec<f64> = counts.iter().map(|&c| f64::from(c)).collect();
    argmax(&as_f)
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn best_split(
    s: &Samples<'_>,
    idx: &[usize],
    counts: &[u32],
    min_leaf: usize,
) -> Option<Candidate> {
    let total = idx.len() as u32;
    let parent = entropy(counts, total);
    let found: Vec<Option<Candidate>> = (0..s.d)
        .into_par_iter()
        .map(|f| {
            let mut order: Vec<(f64, usize)> = idx.iter().map(|&i| (s.row(i)[f], s.y[i])).collect();
            order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0u32; s.n_classes];
            let mut best: Option<Candidate> = None;
            for k in 0..order.len() - 1 {
                left[order[k].1] += 1;
                let n_left = k + 1;
                let (a, b) = (order[k].0, order[k + 1].0);
                if a == b || n_left < min_leaf || order.len() - n_left < min_leaf {
                    continue;
                }
                let right: Vec<u32> = counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                let nl = n_left as u32;
                let nr = total - nl;
                let child = (f64::from(nl) * entropy(&left, nl)
                    + f64::from(nr) * entropy(&right, nr))
                    / f64::from(total);
                let gain = parent - child;
                if best.as_ref().is_none_or(|c| gain > c.gain) {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(Candidate { gain, feature: f, threshold });
                }
            }
            best
        })
        .collect();
    // first feature wins ties
    let mut best: Option<Candidate> = None;
    for c in found.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| c.gain > b.gain) {
            best = Some(c);
        }
    }
    best.filter(|c| c.gain > 1e-12)
}

fn grow_tree(s: &Samples<'_>, grow: &[usize], c: &RepTreeConfig) -> Vec<TreeNode> {
    let mut nodes = Vec::new();
    let root_counts = class_counts(s, grow);
    nodes.push(TreeNode { class: majority(&root_counts), counts: root_counts, split: None });
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, grow.to_vec(), 0)];
    while let Some((id, idx, depth)) = stack.pop() {
        let counts = nodes[id].counts.clone();
        let pure = counts.iter().filter(|&&k| k > 0).count() <= 1;
        let depth_ok = c.max_depth.is_none_or(|m| depth < m);
        if pure || !depth_ok || idx.len() < 2 * c.min_leaf_count {
            continue;
        }
        let Some(cand) = best_split(s, &idx, &counts, c.min_leaf_count) else { continue };
        let (li, ri): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| s.row(i)[cand.feature] <= cand.threshold);
        let mut child = |rows: &[usize]| {
            let counts = class_counts(s, rows);
            nodes.push(TreeNode { class: majority(&counts), counts, split: None });
            nodes.len() - 1
        };
        let left = child(&li);
        let right = child(&ri);
        nodes[id].split =
            Some(Split { feature: cand.feature, threshold: cand.threshold, left, right });
        stack.push((right, ri, depth + 1));
        stack.push((left, li, depth + 1));
    }
    nodes
}

fn descend(nodes: &[TreeNode], row: &[f64]) -> usize {
    let mut id = 0;
    while let Some(sp) = nodes[id].split {
        id = if row[sp.feature] <= sp.threshold { sp.left } else { sp.right };
    }
    id
}

fn errors_on(nodes: &[TreeNode], s: &Samples<'_>, rows: &[usize]) -> usize {
    rows.iter().filter(|&&i| nodes[descend(nodes, s.row(i))].class != s.y[i]).count()
}

/// Bottom-up: a subtree becomes a leaf whenever that does not add errors on
/// the pruning rows.
fn reduced_error_prune(
    mut nodes: Vec<TreeNode>,
    s: &Samples<'_>,
    prune: &[usize],
) -> Vec<TreeNode> {
    // errors each node would make as a leaf, over the pruning rows reaching it
    let mut leaf_errors = vec![0usize; nodes.len()];
    for &i in prune {
        let row = s.row(i);
        let mut id = 0;
        loop {
            if nodes[id].class != s.y[i] {
                leaf_errors[id] += 1;
            }
            match nodes[id].split {
                Some(sp) => id = if row[sp.feature] <= sp.threshold { sp.left } else { sp.right },
                None => break,
            }
        }
    }
    // children always have larger ids than their parent
    let mut subtree_errors = leaf_errors.clone();
    for id in (0..nodes.len()).rev() {
        if let Some(sp) = nodes[id].split {
            let below = subtree_errors[sp.left] + subtree_errors[sp.right];
            if leaf_errors[id] <= below {
                nodes[id].split = None;
                subtree_errors[id] = leaf_errors[id];
            } else {
                subtree_errors[id] = below;
            }
        }
    }
    nodes
}

/// Drops nodes no longer reachable from the root.
fn compact(nodes: &[TreeNode]) -> Vec<TreeNode> {
    let mut out: Vec<TreeNode> = Vec::new();
    let mut stack = vec![(0usize, None::<(usize, bool)>)];
    while let Some((old, parent)) = stack.pop() {
        let new_id = out.len();
        let mut node = nodes[old].clone();
        let children = node.split.map(|sp| (sp.left, sp.right));
        if let Some(sp) = node.split.as_mut() {
            sp.left = usize::MAX;
            sp.right = usize::MAX;
        }
        out.push(node);
        if let Some((p, is_left)) = parent {
            let sp = out[p].split.as_mut().expect("parent is a split");
            if is_left {
                sp.left = new_id;
            } else {
                sp.right = new_id;
            }
        }
        if let Some((l, r)) = children {
            stack.push((r, Some((new_id, false))));
            stack.push((l, Some((new_id, true))));
        }
    }
    out
}

fn depth(nodes: &[TreeNode]) -> usize {
    let mut best = 0;
    let mut stack = vec![(0usize, 0usize)];
    while let Some((id, d)) = stack.pop() {
        best = best.max(d);
        if let Some(sp) = nodes[id].split {
            stack.push((sp.left, d + 1));
            stack.push((sp.right, d + 1));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tests::toy;
    use crate::models::{train, ModelParams, ModelSpec};

    fn fit(
        rows: Vec<Vec<f64>>,
        labels: &[&str],
        c: RepTreeConfig,
    ) -> (RepTree, crate::models::TrainedModel) {
        let m = toy(rows, labels);
        let model = train(&ModelSpec::RepTree(c), &m).unwrap();
        let ModelParams::RepTree(t) = &model.params else { unreachable!() };
        (t.clone(), model)
    }

    #[test]
    fn learns_threshold() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let labels: Vec<&str> = (0..60).map(|i| if i < 30 { "A" } else { "D" }).collect();
        let (tree, model) = fit(rows, &labels, RepTreeConfig::default());
        assert_eq!(model.predict(&[3.0, 1.0]).unwrap(), "A");
        assert_eq!(model.predict(&[55.0, 1.0]).unwrap(), "D");
        assert_eq!(tree.summary.prune_errors_after, 0);
        assert_eq!(tree.summary.grow_rows + tree.summary.prune_rows, 60);
        assert_eq!(tree.summary.prune_rows, 20);
    }

    #[test]
    fn noise_gets_pruned() {
        // the label does not depend on the feature, so the grown tree is
        // mostly noise and pruning should cut it back
        let rows: Vec<Vec<f64>> = (0..90).map(|i| vec![((i * 37) % 90) as f64]).collect();
        let labels: Vec<&str> =
            (0..90).map(|i| if (i * i * 31 + 7) % 11 < 4 { "D" } else { "A" }).collect();
        let c = RepTreeConfig { min_leaf_count: 1, ..RepTreeConfig::default() };
        let (tree, _) = fit(rows, &labels, c);
        assert!(tree.summary.nodes_after < tree.summary.nodes_before);
        assert!(tree.summary.prune_errors_after <= tree.summary.prune_errors_before);
    }

    #[test]
    fn depth_limit_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let labels: Vec<&str> = (0..64).map(|i| if (i / 4) % 2 == 0 { "A" } else { "D" }).collect();
        let c = RepTreeConfig { max_depth: Some(2), ..RepTreeConfig::default() };
        let (tree, _) = fit(rows, &labels, c);
        assert!(tree.summary.depth <= 2);
    }

    #[test]
    fn rejects_bad_fraction() {
        let m = toy(vec![vec![0.0], vec![1.0]], &["A", "D"]);
        for f in [0.0, 1.0, 1.5] {
            let c = RepTreeConfig { pruning_fraction: f, ..RepTreeConfig::default() };
            assert!(train(&ModelSpec::RepTree(c), &m).is_err());
        }
    }

    #[test]
    fn compact_preserves_predictions() {
        let rows: Vec<Vec<f64>> = (0..80).map(|i| vec![(i % 10) as f64, (i / 10) as f64]).collect();
        let labels: Vec<&str> =
            (0..80).map(|i| if (i % 10) + (i / 10) > 8 { "D" } else { "A" }).collect();
        let m = toy(rows, &labels);
        let s = Samples {
            x: m.values(),
            d: 2,
            y: m.labels().iter().map(|l| usize::from(l == "D")).collect(),
            n_classes: 2,
        };
        let all: Vec<usize> = (0..80).collect();
        let grown =
            grow_tree(&s, &all, &RepTreeConfig { min_leaf_count: 1, ..RepTreeConfig::default() });
        let compacted = compact(&grown);
        assert_eq!(compacted.len(), grown.len());
        for i in 0..80 {
            let row = s.row(i);
            assert_eq!(
                grown[descend(&grown, row)].class,
                compacted[descend(&compacted, row)].class
            );
        }
        assert_eq!(errors_on(&grown, &s, &all), 0);
    }
}
