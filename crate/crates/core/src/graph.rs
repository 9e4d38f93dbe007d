//! Inferred friendship graphs and their structural summaries.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::store::PlayerId;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on {0}")]
    SelfLoop(PlayerId),
    #[error("unknown node {0}")]
    UnknownNode(PlayerId),
    #[error("edge list line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// How a threshold was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRule {
    Undersampled,
    Oversampled,
    Manual,
}

impl ThresholdRule {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdRule::Undersampled => "under",
            ThresholdRule::Oversampled => "over",
            ThresholdRule::Manual => "manual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub threshold: f64,
    pub rule: ThresholdRule,
}

/// Undirected simple graph in CSR form. Only endpoints of edges are nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct InferredGraph {
    ids: Vec<PlayerId>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    provenance: Option<Provenance>,
}

impl InferredGraph {
    /// Build from an edge list; duplicates and reversed duplicates collapse.
    pub fn from_edges(edges: &[(PlayerId, PlayerId)]) -> Result<Self, GraphError> {
        let mut canonical: Vec<(PlayerId, PlayerId)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        canonical.dedup();

        let mut ids: Vec<PlayerId> = canonical.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<PlayerId, u32> = ids.iter().enumerate().map(|(i, &p)| (p, i as u32)).collect();

        let mut degree = vec![0usize; ids.len()];
        for (a, b) in &canonical {
            degree[index[a] as usize] += 1;
            degree[index[b] as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(ids.len() + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..ids.len()].to_vec();
        let mut neighbors = vec![0u32; offsets[ids.len()]];
        for (a, b) in &canonical {
            let (ia, ib) = (index[a], index[b]);
            neighbors[fill[ia as usize]] = ib;
            fill[ia as usize] += 1;
            neighbors[fill[ib as usize]] = ia;
            fill[ib as usize] += 1;
        }
        for i in 0..ids.len() {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Ok(InferredGraph {
            ids,
            offsets,
            neighbors,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn num_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn nodes(&self) -> &[PlayerId] {
        &self.ids
    }

    pub fn index_of(&self, p: PlayerId) -> Option<usize> {
        self.ids.binary_search(&p).ok()
    }

    pub fn degree_at(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degree(&self, p: PlayerId) -> Result<usize, GraphError> {
        Ok(self.degree_at(self.index_of(p).ok_or(GraphError::UnknownNode(p))?))
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|i| self.degree_at(i)).collect()
    }

    /// Sorted neighbor indices.
    pub fn neighbors_at(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn neighbors(&self, p: PlayerId) -> Result<Vec<PlayerId>, GraphError> {
        let i = self.index_of(p).ok_or(GraphError::UnknownNode(p))?;
        Ok(self.neighbors_at(i).iter().map(|&j| self.ids[j as usize]).collect())
    }

    pub fn has_edge(&self, a: PlayerId, b: PlayerId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.neighbors_at(i).binary_search(&(j as u32)).is_ok(),
            _ => false,
        }
    }

    /// Edges `(x, y)` with `x < y`, sorted.
    pub fn edges(&self) -> Vec<(PlayerId, PlayerId)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for i in 0..self.num_nodes() {
            for &j in self.neighbors_at(i) {
                if (j as usize) > i {
                    out.push((self.ids[i], self.ids[j as usize]));
                }
            }
        }
        out
    }

    fn clustering_at(&self, i: usize) -> f64 {
        let nbrs = self.neighbors_at(i);
        let k = nbrs.len();
        if k < 2 {
            return 0.0;
        }
        let mut links = 0usize;
        for (a, &u) in nbrs.iter().enumerate() {
            links += sorted_intersection(&nbrs[a + 1..], self.neighbors_at(u as usize));
        }
        links as f64 / (k * (k - 1) / 2) as f64
    }

    /// Local clustering coefficient; 0 for degree below 2.
    pub fn clustering(&self, p: PlayerId) -> Result<f64, GraphError> {
        Ok(self.clustering_at(self.index_of(p).ok_or(GraphError::UnknownNode(p))?))
    }

    /// Clustering of every node, in node order.
    pub fn clustering_all(&self) -> Vec<f64> {
        (0..self.num_nodes()).into_par_iter().map(|i| self.clustering_at(i)).collect()
    }

    /// Connected component sizes, descending.
    pub fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.num_nodes());
        for i in 0..self.num_nodes() {
            for &j in self.neighbors_at(i) {
                uf.union(i, j as usize);
            }
        }
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..self.num_nodes() {
            *sizes.entry(uf.find(i)).or_default() += 1;
        }
        let mut out: Vec<usize> = sizes.into_values().collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    pub fn summarize(&self) -> GraphSummary {
        let degrees = self.degrees();
        let clustering = self.clustering_all();
        let components = self.components();
        summary_from(&degrees, &clustering, &components)
    }
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

pub const CLUSTERING_BIN_WIDTH: f64 = 0.1;
pub const CLUSTERING_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    /// `(k, P(degree ≥ k))` for each observed degree k.
    pub degree_ccdf: Vec<(usize, f64)>,
    /// `(k, mean C_i, node count)` over nodes of degree k ≥ 2.
    pub clustering_by_degree: Vec<(usize, f64, usize)>,
    /// Counts of C_i in `[0, 0.1), [0.1, 0.2), ..., [0.9, 1.0]` over nodes of degree ≥ 2.
    pub clustering_histogram: [usize; CLUSTERING_BINS],
    /// `(size, number of components)`, ascending size.
    pub component_sizes: Vec<(usize, usize)>,
    pub component_count: usize,
    pub largest_component: usize,
    /// Lower median of the degree sequence; 0 for an empty graph.
    pub median_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
}

pub fn clustering_bin(c: f64) -> usize {
    ((c / CLUSTERING_BIN_WIDTH).floor() as usize).min(CLUSTERING_BINS - 1)
}

/// `(k, P(X ≥ k))` for each distinct value of `values`.
pub fn ccdf(values: &[usize]) -> Vec<(usize, f64)> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_default() += 1;
    }
    let n = values.len() as f64;
    let mut remaining = values.len();
    counts
        .into_iter()
        .map(|(k, c)| {
            let p = remaining as f64 / n;
            remaining -= c;
            (k, p)
        })
        .collect()
}

/// Summary from per-node degree and clustering plus component sizes.
pub fn summary_from(degrees: &[usize], clustering: &[f64], components: &[usize]) -> GraphSummary {
    let nodes = degrees.len();
    let mut by_degree: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut histogram = [0usize; CLUSTERING_BINS];
    for (&k, &c) in degrees.iter().zip(clustering) {
        if k < 2 {
            continue;
        }
        let e = by_degree.entry(k).or_default();
        e.0 += c;
        e.1 += 1;
        histogram[clustering_bin(c)] += 1;
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in components {
        *sizes.entry(s).or_default() += 1;
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    GraphSummary {
        nodes,
        edges: degrees.iter().sum::<usize>() / 2,
        degree_ccdf: ccdf(degrees),
        clustering_by_degree: by_degree.into_iter().map(|(k, (s, n))| (k, s / n as f64, n)).collect(),
        clustering_histogram: histogram,
        component_sizes: sizes.into_iter().collect(),
        component_count: components.len(),
        largest_component: components.iter().copied().max().unwrap_or(0),
        median_degree: if nodes == 0 { 0 } else { sorted[(nodes - 1) / 2] },
        max_degree: sorted.last().copied().unwrap_or(0),
        mean_degree: if nodes == 0 {
            0.0
        } else {
            degrees.iter().sum::<usize>() as f64 / nodes as f64
        },
    }
}

/// Sorted edge list with a header recording provenance and score statistics.
pub fn write_edges<W: Write>(mut w: W, g: &InferredGraph, score_stats: Option<(f64, f64, usize)>) -> io::Result<()> {
    match g.provenance {
        Some(p) => writeln!(w, "# threshold={}\trule={}", p.threshold, p.rule.name())?,
        None => writeln!(w, "# threshold=none")?,
    }
    if let Some((min, max, scored)) = score_stats {
        writeln!(w, "# scores: min={min}\tmax={max}\tpairs={scored}")?;
    }
    writeln!(w, "# nodes={}\tedges={}\tisolates excluded", g.num_nodes(), g.num_edges())?;
    writeln!(w, "# x\ty")?;
    for (a, b) in g.edges() {
        writeln!(w, "{a}\t{b}")?;
    }
    Ok(())
}

pub fn read_edges<R: BufRead>(reader: R) -> Result<InferredGraph, GraphError> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| GraphError::Malformed { line: idx + 1, message };
        let fields: Vec<&str> = line.split(['\t', ' ']).filter(|s| !s.is_empty()).collect();
        let [a, b] = fields.as_slice() else {
            return Err(bad(format!("expected 2 fields, found {}", fields.len())));
        };
        let id = |s: &str| s.parse().map(PlayerId).map_err(|_| bad(format!("bad player id {s:?}")));
        edges.push((id(a)?, id(b)?));
    }
    InferredGraph::from_edges(&edges)
}

pub fn write_degree_ccdf<W: Write>(mut w: W, s: &GraphSummary) -> io::Result<()> {
    writeln!(w, "# degree\tccdf")?;
    for (k, p) in &s.degree_ccdf {
        writeln!(w, "{k}\t{p}")?;
    }
    Ok(())
}

pub fn write_clustering_by_degree<W: Write>(mut w: W, s: &GraphSummary) -> io::Result<()> {
    writeln!(w, "# degree\tmean_ci")?;
    for (k, c, _) in &s.clustering_by_degree {
        writeln!(w, "{k}\t{c}")?;
    }
    Ok(())
}

pub fn write_clustering_histogram<W: Write>(mut w: W, s: &GraphSummary) -> io::Result<()> {
    writeln!(w, "# ci_bin\tcount")?;
    for (b, c) in s.clustering_histogram.iter().enumerate() {
        writeln!(w, "{:.1}\t{c}", b as f64 * CLUSTERING_BIN_WIDTH)?;
    }
    Ok(())
}

pub fn write_component_sizes<W: Write>(mut w: W, s: &GraphSummary) -> io::Result<()> {
    writeln!(w, "# component_size\tcount")?;
    for (size, count) in &s.component_sizes {
        writeln!(w, "{size}\t{count}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(edges: &[(u64, u64)]) -> InferredGraph {
        let e: Vec<_> = edges.iter().map(|&(a, b)| (PlayerId(a), PlayerId(b))).collect();
        InferredGraph::from_edges(&e).unwrap()
    }

    #[test]
    fn triangle_and_star() {
        let t = g(&[(1, 2), (2, 3), (3, 1)]);
        assert!(t.clustering_all().iter().all(|&c| c == 1.0));
        let s = g(&[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        assert_eq!(s.clustering(PlayerId(0)).unwrap(), 0.0);
        assert_eq!(s.degree(PlayerId(0)).unwrap(), 5);
        assert!(s.clustering(PlayerId(9)).is_err());
    }

    #[test]
    fn duplicates_collapse_and_self_loops_fail() {
        let d = g(&[(1, 2), (2, 1), (1, 2)]);
        assert_eq!(d.num_edges(), 1);
        assert!(matches!(
            InferredGraph::from_edges(&[(PlayerId(1), PlayerId(1))]),
            Err(GraphError::SelfLoop(_))
        ));
    }

    #[test]
    fn clique_summary() {
        let mut e = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                e.push((a, b));
            }
        }
        let s = g(&e).summarize();
        assert_eq!(s.median_degree, 4);
        assert_eq!(s.component_sizes, vec![(5, 1)]);
        assert_eq!(s.clustering_histogram[9], 5);
        assert_eq!(s.degree_ccdf, vec![(4, 1.0)]);
    }

    #[test]
    fn components_of_disjoint_triangles() {
        let t = g(&[(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4)]);
        assert_eq!(t.components(), vec![3, 3]);
        assert!(g(&[]).components().is_empty());
    }

    #[test]
    fn histogram_bins_are_right_open() {
        assert_eq!(clustering_bin(0.0), 0);
        assert_eq!(clustering_bin(0.1), 1);
        assert_eq!(clustering_bin(0.95), 9);
        assert_eq!(clustering_bin(1.0), 9);
    }

    #[test]
    fn edge_file_round_trip() {
        let t = g(&[(1, 2), (2, 3), (7, 1)]).with_provenance(Provenance {
            threshold: 3.0,
            rule: ThresholdRule::Undersampled,
        });
        let mut buf = Vec::new();
        write_edges(&mut buf, &t, Some((0.0, 9.0, 4))).unwrap();
        let back = read_edges(&buf[..]).unwrap();
        assert_eq!(back.edges(), t.edges());
    }
}
