//! CART classification trees: Gini splits, weakest-link cost-complexity
//! pruning, and k-fold cross-validation with the one-standard-error rule.
//!
//! Node risk is the Gini impurity mass `n_t · gini(t) / N`, matching the
//! split criterion, and cross-validated error is the Brier score of the
//! leaf probabilities. Misclassification risk collapses to the root when
//! positives are rare, which would hide exactly the splits of interest.

use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::features::{Feature, FeatureVector, LabeledExample};

#[derive(Debug, Clone)]
pub struct TreeConfig {
    pub min_leaf: usize,
    pub max_depth: usize,
    pub folds: usize,
    pub seed: u64,
    pub features: Vec<Feature>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            min_leaf: 20,
            max_depth: 10,
            folds: 10,
            seed: 0,
            features: Feature::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("cross-validation needs at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("no training examples")]
    Empty,
    #[error("no features selected")]
    NoFeatures,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        n: usize,
        n_pos: usize,
    },
    Split {
        feature: Feature,
        threshold: f64,
        left: usize,
        right: usize,
        n: usize,
        n_pos: usize,
    },
}

impl Node {
    fn counts(&self) -> (usize, usize) {
        match *self {
            Node::Leaf { n, n_pos } | Node::Split { n, n_pos, .. } => (n, n_pos),
        }
    }
}

/// Binary tree in an arena; node 0 is the root. Leaves carry the
/// maximum-likelihood friend probability `n_pos / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

fn weighted_gini(n: usize, pos: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        2.0 * pos as f64 * (n - pos) as f64 / n as f64
    }
}

struct Grower<'a> {
    examples: &'a [LabeledExample],
    config: &'a TreeConfig,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let n = idx.len();
        let n_pos = idx.iter().filter(|&&i| self.examples[i].friend).count();
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { n, n_pos });
        if n_pos == 0 || n_pos == n || depth >= self.config.max_depth || n < 2 * self.config.min_leaf.max(1) {
            return slot;
        }
        let Some((feature, threshold)) = self.best_split(&idx, n_pos) else {
            return slot;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.examples[i].features.get(feature) <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
            n,
            n_pos,
        };
        slot
    }

    fn best_split(&self, idx: &[usize], n_pos: usize) -> Option<(Feature, f64)> {
        let n = idx.len();
        let parent = weighted_gini(n, n_pos);
        let min_leaf = self.config.min_leaf.max(1);
        let mut best: Option<(f64, Feature, f64)> = None;
        let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);
        for &feature in &self.config.features {
            column.clear();
            column.extend(idx.iter().map(|&i| {
                let e = &self.examples[i];
                (e.features.get(feature), e.friend)
            }));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for i in 0..n - 1 {
                left_pos += usize::from(column[i].1);
                let n_left = i + 1;
                if column[i].0 == column[i + 1].0 || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let children = weighted_gini(n_left, left_pos) + weighted_gini(n - n_left, n_pos - left_pos);
                let gain = parent - children;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    let (lo, hi) = (column[i].0, column[i + 1].0);
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Grow a tree without pruning.
pub fn grow_tree(examples: &[LabeledExample], config: &TreeConfig) -> Result<DecisionTree, TreeError> {
    if examples.is_empty() {
        return Err(TreeError::Empty);
    }
    if config.features.is_empty() {
        return Err(TreeError::NoFeatures);
    }
    let mut grower = Grower {
        examples,
        config,
        nodes: Vec::new(),
    };
    grower.grow((0..examples.len()).collect(), 0);
    Ok(DecisionTree { nodes: grower.nodes })
}

/// Cross-validation summary behind a pruning choice.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub alphas: Vec<f64>,
    pub errors: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub chosen: usize,
}

/// Grow, then prune at the complexity chosen by k-fold CV (one-SE rule).
pub fn fit_tree(examples: &[LabeledExample], config: &TreeConfig) -> Result<DecisionTree, TreeError> {
    fit_tree_with_report(examples, config).map(|(t, _)| t)
}

pub fn fit_tree_with_report(
    examples: &[LabeledExample],
    config: &TreeConfig,
) -> Result<(DecisionTree, CvReport), TreeError> {
    if config.folds < 2 {
        return Err(TreeError::TooFewFolds(config.folds));
    }
    let full = grow_tree(examples, config)?;
    let sequence = full.pruning_sequence();
    let alphas: Vec<f64> = sequence.iter().map(|(a, _)| *a).collect();
    if sequence.len() == 1 {
        let report = CvReport {
            alphas,
            errors: vec![f64::NAN],
            std_errors: vec![f64::NAN],
            chosen: 0,
        };
        return Ok((full, report));
    }
    let probes: Vec<f64> = (0..alphas.len())
        .map(|k| match alphas.get(k + 1) {
            Some(next) => (alphas[k] * next).sqrt(),
            None => alphas[k],
        })
        .collect();

    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let mut fold_of = vec![0; examples.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % config.folds;
    }

    let per_fold: Vec<Vec<(usize, Vec<f64>)>> = (0..config.folds)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<LabeledExample> = (0..examples.len())
                .filter(|&i| fold_of[i] != fold)
                .map(|i| examples[i])
                .collect();
            let test: Vec<usize> = (0..examples.len()).filter(|&i| fold_of[i] == fold).collect();
            if train.is_empty() || test.is_empty() {
                return Vec::new();
            }
            let tree = grow_tree(&train, config).expect("non-empty training fold");
            let seq = tree.pruning_sequence();
            let pruned: Vec<DecisionTree> = probes.iter().map(|&b| tree.prune_with(&seq, b)).collect();
            test.into_iter()
                .map(|i| {
                    let e = &examples[i];
                    let y = f64::from(u8::from(e.friend));
                    let errs = pruned.iter().map(|t| (t.predict(&e.features) - y).powi(2)).collect();
                    (i, errs)
                })
                .collect()
        })
        .collect();

    let mut squared = vec![Vec::with_capacity(examples.len()); probes.len()];
    let mut flat: Vec<(usize, Vec<f64>)> = per_fold.into_iter().flatten().collect();
    flat.sort_unstable_by_key(|(i, _)| *i);
    for (_, errs) in flat {
        for (c, e) in errs.into_iter().enumerate() {
            squared[c].push(e);
        }
    }
    let (errors, std_errors): (Vec<f64>, Vec<f64>) = squared
        .iter()
        .map(|errs| {
            let n = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / n;
            let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            (mean, (var / n).sqrt())
        })
        .unzip();
    let best = (0..errors.len())
        .min_by(|&a, &b| errors[a].total_cmp(&errors[b]))
        .expect("at least one candidate");
    let limit = errors[best] + std_errors[best];
    let chosen = (0..errors.len()).rev().find(|&c| errors[c] <= limit).unwrap_or(best);
    let tree = full.compact(&sequence[chosen].1);
    Ok((
        tree,
        CvReport {
            alphas,
            errors,
            std_errors,
            chosen,
        },
    ))
}

impl DecisionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Feature used by the root split, if any.
    pub fn root_feature(&self) -> Option<Feature> {
        match self.nodes[0] {
            Node::Split { feature, .. } => Some(feature),
            Node::Leaf { .. } => None,
        }
    }

    /// Friend probability at the leaf reached by `x`.
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { n, n_pos } => return if n == 0 { 0.0 } else { n_pos as f64 / n as f64 },
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if x.get(feature) <= threshold { left } else { right },
            }
        }
    }

    fn risk(&self, at: usize) -> f64 {
        let (n, pos) = self.nodes[at].counts();
        let total = self.nodes[0].counts().0 as f64;
        weighted_gini(n, pos) / total
    }

    /// (risk of the leaves below `at`, number of those leaves) under `collapsed`.
    fn branch(&self, at: usize, collapsed: &[bool]) -> (f64, usize) {
        match self.nodes[at] {
            Node::Split { left, right, .. } if !collapsed[at] => {
                let (rl, nl) = self.branch(left, collapsed);
                let (rr, nr) = self.branch(right, collapsed);
                (rl + rr, nl + nr)
            }
            _ => (self.risk(at), 1),
        }
    }

    fn internal_links(&self, at: usize, collapsed: &[bool], out: &mut Vec<(usize, f64)>) {
        if let Node::Split { left, right, .. } = self.nodes[at] {
            if collapsed[at] {
                return;
            }
            let (branch_risk, leaves) = self.branch(at, collapsed);
            out.push((at, (self.risk(at) - branch_risk) / (leaves as f64 - 1.0)));
            self.internal_links(left, collapsed, out);
            self.internal_links(right, collapsed, out);
        }
    }

    /// Nested subtrees from weakest-link pruning: `(alpha_k, collapsed mask)`,
    /// starting at alpha 0 (the full tree) and ending at the root alone.
    pub fn pruning_sequence(&self) -> Vec<(f64, Vec<bool>)> {
        let mut collapsed = vec![false; self.nodes.len()];
        let mut seq = vec![(0.0, collapsed.clone())];
        loop {
            let mut links = Vec::new();
            self.internal_links(0, &collapsed, &mut links);
            let Some(alpha) = links.iter().map(|&(_, g)| g).min_by(f64::total_cmp) else {
                break;
            };
            let alpha = alpha.max(0.0);
            for (node, g) in links {
                if g <= alpha + 1e-12 {
                    collapsed[node] = true;
                }
            }
            seq.push((alpha, collapsed.clone()));
        }
        seq
    }

    fn prune_with(&self, sequence: &[(f64, Vec<bool>)], alpha: f64) -> DecisionTree {
        let k = sequence.iter().rposition(|(a, _)| *a <= alpha).unwrap_or(0);
        self.compact(&sequence[k].1)
    }

    /// Minimal cost-complexity subtree for `alpha`.
    pub fn prune(&self, alpha: f64) -> DecisionTree {
        self.prune_with(&self.pruning_sequence(), alpha)
    }

    fn compact(&self, collapsed: &[bool]) -> DecisionTree {
        fn copy(src: &DecisionTree, at: usize, collapsed: &[bool], out: &mut Vec<Node>) -> usize {
            let slot = out.len();
            let (n, n_pos) = src.nodes[at].counts();
            out.push(Node::Leaf { n, n_pos });
            if let Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } = src.nodes[at]
            {
                if !collapsed[at] {
                    let l = copy(src, left, collapsed, out);
                    let r = copy(src, right, collapsed, out);
                    out[slot] = Node::Split {
                        feature,
                        threshold,
                        left: l,
                        right: r,
                        n,
                        n_pos,
                    };
                }
            }
            slot
        }
        let mut nodes = Vec::new();
        copy(self, 0, collapsed, &mut nodes);
        DecisionTree { nodes }
    }

    /// Versioned preorder node list.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "latent-ties tree v1")?;
        writeln!(w, "nodes\t{}", self.nodes.len())?;
        // Arena order is already preorder.
        for node in &self.nodes {
            match *node {
                Node::Leaf { n, n_pos } => writeln!(w, "leaf\t{n}\t{n_pos}")?,
                Node::Split {
                    feature,
                    threshold,
                    n,
                    n_pos,
                    ..
                } => writeln!(w, "split\t{feature}\t{threshold}\t{n}\t{n_pos}")?,
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> io::Result<DecisionTree> {
        let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
        let lines: Vec<String> = reader.lines().collect::<io::Result<_>>()?;
        if lines.first().map(String::as_str) != Some("latent-ties tree v1") {
            return Err(bad("not a tree model file".into()));
        }
        let count: usize = lines
            .get(1)
            .and_then(|l| l.strip_prefix("nodes\t"))
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| bad("missing node count".into()))?;
        let body = &lines[2..];
        if body.len() != count {
            return Err(bad(format!("expected {count} nodes, found {}", body.len())));
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(count);
        // Preorder: a split's left child follows it; its right child follows the left subtree.
        fn parse(body: &[String], at: &mut usize, nodes: &mut Vec<Node>) -> io::Result<usize> {
            let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
            let line = body.get(*at).ok_or_else(|| bad("truncated tree".into()))?;
            *at += 1;
            let f: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad count {s:?}")));
            let slot = nodes.len();
            match f.as_slice() {
                ["leaf", n, p] => {
                    nodes.push(Node::Leaf {
                        n: num(n)?,
                        n_pos: num(p)?,
                    });
                }
                ["split", feat, thr, n, p] => {
                    let feature: Feature = feat.parse().map_err(bad)?;
                    let threshold: f64 = thr.parse().map_err(|_| bad(format!("bad threshold {thr:?}")))?;
                    let (n, n_pos) = (num(n)?, num(p)?);
                    nodes.push(Node::Leaf { n, n_pos });
                    let left = parse(body, at, nodes)?;
                    let right = parse(body, at, nodes)?;
                    nodes[slot] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                        n,
                        n_pos,
                    };
                }
                _ => return Err(bad(format!("bad node line {line:?}"))),
            }
            Ok(slot)
        }
        let mut at = 0;
        parse(body, &mut at, &mut nodes)?;
        Ok(DecisionTree { nodes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::PlayerId;

    fn example(values: [f64; 9], friend: bool) -> LabeledExample {
        LabeledExample {
            rater: PlayerId(0),
            target: PlayerId(0),
            features: FeatureVector(values),
            friend,
        }
    }

    fn separable(n: usize) -> Vec<LabeledExample> {
        (0..n)
            .map(|i| {
                let friend = i % 4 == 0;
                let mut v = [(i % 7) as f64; 9];
                v[Feature::PairFrequency.index()] = if friend { 10.0 + i as f64 } else { i as f64 % 5.0 };
                example(v, friend)
            })
            .collect()
    }

    #[test]
    fn single_class_gives_root_leaf() {
        let data: Vec<_> = (0..50).map(|i| example([i as f64; 9], false)).collect();
        let tree = fit_tree(&data, &TreeConfig::default()).unwrap();
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.predict(&FeatureVector([0.0; 9])), 0.0);
        let data: Vec<_> = (0..50).map(|i| example([i as f64; 9], true)).collect();
        assert_eq!(fit_tree(&data, &TreeConfig::default()).unwrap().predict(&FeatureVector([0.0; 9])), 1.0);
    }

    #[test]
    fn perfectly_separating_feature_gives_depth_one() {
        let data = separable(400);
        let tree = fit_tree(&data, &TreeConfig::default()).unwrap();
        assert_eq!(tree.depth(), 1);
        assert_eq!(tree.root_feature(), Some(Feature::PairFrequency));
    }

    #[test]
    fn too_few_folds() {
        let config = TreeConfig {
            folds: 1,
            ..Default::default()
        };
        assert_eq!(fit_tree(&separable(40), &config), Err(TreeError::TooFewFolds(1)));
    }

    #[test]
    fn pruning_sequence_ends_at_root() {
        let data: Vec<_> = (0..600)
            .map(|i| {
                let x = (i * 37 % 101) as f64;
                example([x, (i % 13) as f64, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], (i * 37 % 101) % 3 == 0 || i % 5 == 0)
            })
            .collect();
        let config = TreeConfig {
            min_leaf: 5,
            ..Default::default()
        };
        let full = grow_tree(&data, &config).unwrap();
        let seq = full.pruning_sequence();
        assert!(seq.windows(2).all(|w| w[0].0 <= w[1].0));
        assert_eq!(full.compact(&seq.last().unwrap().1).node_count(), 1);
        let (pruned, report) = fit_tree_with_report(&data, &config).unwrap();
        assert!(pruned.node_count() <= full.node_count());
        assert!(report.errors[report.chosen] <= report.errors[0] + report.std_errors[report.chosen.min(0)] + report.std_errors.iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn file_round_trip() {
        let tree = fit_tree(&separable(400), &TreeConfig::default()).unwrap();
        let mut buf = Vec::new();
        tree.write(&mut buf).unwrap();
        assert_eq!(DecisionTree::read(&buf[..]).unwrap(), tree);
    }
}
