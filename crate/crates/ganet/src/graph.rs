//! Graph data model: undirected CSR adjacency, node features, labels and
//! split masks, adjacency normalization, synthetic generators, and JSON I/O.
//!
//! Graphs are immutable once built. Self-loops are a policy applied once
//! with [`add_self_loops`]; every attention / convolution operator assumes
//! they are present.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, SeededRng};

/// Train/validation/test node splits; pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Masks {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Undirected graph in CSR form with a d x N feature matrix.
#[derive(Debug, Clone)]
pub struct Graph {
    num_nodes: usize,
    /// Row offsets, length num_nodes + 1, ending at edge_count().
    offsets: Vec<usize>,
    /// Column indices, sorted within each row.
    indices: Vec<usize>,
    features: DenseMatrix,
    labels: Option<Vec<usize>>,
    masks: Option<Masks>,
}

impl Graph {
    /// Build from undirected edge pairs. Edges are symmetrized and
    /// deduplicated; self-loop pairs are rejected (use [`add_self_loops`]).
    pub fn from_edges(
        num_nodes: usize,
        edges: &[(usize, usize)],
        features: DenseMatrix,
    ) -> Result<Self> {
        if features.cols() != num_nodes {
            return Err(Error::Config(format!(
                "feature matrix has {} columns, graph has {} nodes",
                features.cols(),
                num_nodes
            )));
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::GraphFile(format!(
                    "edge ({u}, {v}) out of range for {num_nodes} nodes"
                )));
            }
            if u == v {
                return Err(Error::GraphFile(format!(
                    "self-loop ({u}, {u}) not allowed in edge input"
                )));
            }
            set.insert((u, v));
            set.insert((v, u));
        }
        Ok(Self::from_directed_set(num_nodes, &set, features, None, None))
    }

    fn from_directed_set(
        num_nodes: usize,
        set: &BTreeSet<(usize, usize)>,
        features: DenseMatrix,
        labels: Option<Vec<usize>>,
        masks: Option<Masks>,
    ) -> Self {
        let mut offsets = vec![0usize; num_nodes + 1];
        for &(u, _) in set {
            offsets[u + 1] += 1;
        }
        for i in 0..num_nodes {
            offsets[i + 1] += offsets[i];
        }
        // BTreeSet iterates (u, v) in sorted order, so rows come out sorted.
        let indices = set.iter().map(|&(_, v)| v).collect();
        Self {
            num_nodes,
            offsets,
            indices,
            features,
            labels,
            masks,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Count of stored directed entries (each undirected edge counts twice,
    /// each self-loop once).
    pub fn edge_count(&self) -> usize {
        self.indices.len()
    }

    /// Neighbors of `node` (sorted, includes the node itself once
    /// self-loops have been applied).
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.indices[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn channels(&self) -> usize {
        self.features.rows()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn masks(&self) -> Option<&Masks> {
        self.masks.as_ref()
    }

    pub fn with_features(&self, features: DenseMatrix) -> Result<Self> {
        if features.cols() != self.num_nodes {
            return Err(Error::Config(format!(
                "feature matrix has {} columns, graph has {} nodes",
                features.cols(),
                self.num_nodes
            )));
        }
        Ok(Self {
            features,
            ..self.clone()
        })
    }

    /// CSR structural invariants. Run by tests and after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.offsets.len() != self.num_nodes + 1 || self.offsets[0] != 0 {
            return Err(Error::GraphFile("bad CSR offsets".into()));
        }
        if *self.offsets.last().unwrap() != self.indices.len() {
            return Err(Error::GraphFile("CSR offsets do not end at C".into()));
        }
        for w in self.offsets.windows(2) {
            if w[1] < w[0] {
                return Err(Error::GraphFile("CSR offsets decrease".into()));
            }
        }
        for u in 0..self.num_nodes {
            let row = self.neighbors(u);
            for w in row.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::GraphFile(format!(
                        "row {u} is not strictly sorted (duplicate entry?)"
                    )));
                }
            }
            for &v in row {
                if v >= self.num_nodes {
                    return Err(Error::GraphFile(format!("column {v} out of range")));
                }
                if u != v && !self.has_edge(v, u) {
                    return Err(Error::GraphFile(format!(
                        "edge ({u}, {v}) stored without its mirror"
                    )));
                }
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.num_nodes {
                return Err(Error::GraphFile("labels length != num_nodes".into()));
            }
        }
        if let Some(m) = &self.masks {
            let mut seen = vec![false; self.num_nodes];
            for set in [&m.train, &m.val, &m.test] {
                for &n in set {
                    if n >= self.num_nodes {
                        return Err(Error::GraphFile(format!("mask node {n} out of range")));
                    }
                    if seen[n] {
                        return Err(Error::GraphFile(format!(
                            "node {n} appears in more than one mask"
                        )));
                    }
                    seen[n] = true;
                }
            }
        }
        Ok(())
    }
}

/// Return a graph in which every node has exactly one self-loop. Idempotent.
pub fn add_self_loops(g: &Graph) -> Graph {
    let mut set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for u in 0..g.num_nodes {
        for &v in g.neighbors(u) {
            set.insert((u, v));
        }
        set.insert((u, u));
    }
    Graph::from_directed_set(
        g.num_nodes,
        &set,
        g.features.clone(),
        g.labels.clone(),
        g.masks.clone(),
    )
}

/// Edge-weighting mode for [`normalize_adjacency`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    /// All stored entries weigh 1.
    Binary,
    /// w(u,v) = 1 / sqrt(deg(u) * deg(v)), degrees counting self-loops.
    Symmetric,
    /// w(u,v) = 1 / deg(u); each row sums to 1.
    RowMean,
}

/// Per-edge weights aligned to a graph's CSR structure, carrying its own
/// copy of the structure so downstream operators need only this object.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    pub mode: NormalizeMode,
    num_nodes: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn row(&self, u: usize) -> (&[usize], &[f64]) {
        let lo = self.offsets[u];
        let hi = self.offsets[u + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Weight the stored adjacency entries. Symmetric and row-mean modes
/// require self-loops (every degree >= 1).
pub fn normalize_adjacency(g: &Graph, mode: NormalizeMode) -> Result<NormalizedAdjacency> {
    if matches!(mode, NormalizeMode::Symmetric | NormalizeMode::RowMean) {
        for u in 0..g.num_nodes() {
            if g.degree(u) == 0 {
                return Err(Error::DegreeZero { node: u });
            }
        }
    }
    let mut values = Vec::with_capacity(g.edge_count());
    for u in 0..g.num_nodes() {
        let du = g.degree(u) as f64;
        for &v in g.neighbors(u) {
            let w = match mode {
                NormalizeMode::Binary => 1.0,
                NormalizeMode::Symmetric => 1.0 / (du * g.degree(v) as f64).sqrt(),
                NormalizeMode::RowMean => 1.0 / du,
            };
            values.push(w);
        }
    }
    Ok(NormalizedAdjacency {
        mode,
        num_nodes: g.num_nodes(),
        offsets: g.offsets.clone(),
        indices: g.indices.clone(),
        values,
    })
}

/// Stochastic-block-model graph: intra-block edges with probability `p_in`,
/// inter-block with `p_out`. Features are the one-hot block indicator plus
/// zero-mean Gaussian noise of the given standard deviation; labels are the
/// block ids. Split masks default to 10% train / 20% val / 70% test, drawn
/// disjointly from a seeded shuffle.
pub fn generate_sbm(
    rng: &mut SeededRng,
    nodes_per_block: &[usize],
    p_in: f64,
    p_out: f64,
    feature_noise: f64,
) -> Result<Graph> {
    if nodes_per_block.is_empty() || nodes_per_block.contains(&0) {
        return Err(Error::Parameter(
            "nodes_per_block must be nonempty with positive sizes".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_out >= p_in {
        return Err(Error::Parameter(format!(
            "require 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    if feature_noise < 0.0 {
        return Err(Error::Parameter("feature_noise must be >= 0".into()));
    }
    let n: usize = nodes_per_block.iter().sum();
    let blocks = nodes_per_block.len();
    let mut block_of = Vec::with_capacity(n);
    for (b, &size) in nodes_per_block.iter().enumerate() {
        block_of.extend(std::iter::repeat(b).take(size));
    }

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block_of[u] == block_of[v] { p_in } else { p_out };
            if rng.bernoulli(p) {
                edges.push((u, v));
            }
        }
    }

    let features = DenseMatrix::from_fn(blocks, n, |r, c| {
        let base = if block_of[c] == r { 1.0 } else { 0.0 };
        if feature_noise > 0.0 {
            base + feature_noise * rng.next_normal()
        } else {
            base
        }
    });

    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let n_train = n / 10;
    let n_val = n / 5;
    let masks = Masks {
        train: order[..n_train].to_vec(),
        val: order[n_train..n_train + n_val].to_vec(),
        test: order[n_train + n_val..].to_vec(),
    };

    let mut g = Graph::from_edges(n, &edges, features)?;
    g.labels = Some(block_of);
    g.masks = Some(masks);
    Ok(g)
}

/// Random sparse graph with roughly the requested average degree
/// (self-loops not included). Used by the profiler's synthetic benchmarks.
pub fn generate_sparse(rng: &mut SeededRng, num_nodes: usize, avg_degree: f64) -> Result<Graph> {
    if num_nodes == 0 {
        return Err(Error::Parameter("num_nodes must be positive".into()));
    }
    let target_edges = ((num_nodes as f64) * avg_degree / 2.0).round() as usize;
    let mut set = BTreeSet::new();
    let mut attempts = 0usize;
    while set.len() < target_edges && attempts < target_edges * 20 {
        attempts += 1;
        let u = rng.next_index(num_nodes);
        let v = rng.next_index(num_nodes);
        if u != v {
            set.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<(usize, usize)> = set.into_iter().collect();
    Graph::from_edges(num_nodes, &edges, DenseMatrix::zeros(0, num_nodes))
}

// --- JSON schema ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    num_nodes: usize,
    /// Undirected, 0-based, no self-loops.
    edges: Vec<[usize; 2]>,
    channels: usize,
    /// Row-major d x N: one inner array per channel, each of length N.
    features: Vec<Vec<f64>>,
    labels: Option<Vec<usize>>,
    masks: Option<Masks>,
}

/// Parse a graph from its JSON file form. Directed duplicates are merged
/// (with a warning on stderr); unknown fields are rejected.
pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let text = std::fs::read_to_string(path.as_ref())?;
    graph_from_json(&text)
}

pub fn graph_from_json(text: &str) -> Result<Graph> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| Error::GraphFile(e.to_string()))?;
    if file.features.len() != file.channels {
        return Err(Error::GraphFile(format!(
            "field \"features\" has {} rows but \"channels\" is {}",
            file.features.len(),
            file.channels
        )));
    }
    for (i, row) in file.features.iter().enumerate() {
        if row.len() != file.num_nodes {
            return Err(Error::GraphFile(format!(
                "field \"features\" row {i} has {} entries, expected num_nodes={}",
                row.len(),
                file.num_nodes
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::GraphFile(format!(
                "field \"features\" row {i} contains a non-finite value"
            )));
        }
    }
    let features = DenseMatrix::from_rows(&file.features)?;
    let mut seen = BTreeSet::new();
    let mut duplicates = 0usize;
    for &[u, v] in &file.edges {
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            duplicates += 1;
        }
    }
    if duplicates > 0 {
        eprintln!("warning: {duplicates} duplicate edge(s) deduplicated on load");
    }
    let edges: Vec<(usize, usize)> = seen.into_iter().collect();
    let mut g = Graph::from_edges(file.num_nodes, &edges, features)?;
    g.labels = file.labels;
    g.masks = file.masks;
    g.validate()?;
    Ok(g)
}

/// Write a graph in the JSON file form. Each undirected edge is written
/// once as [u, v] with u < v; self-loops are a runtime policy and are not
/// persisted.
pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), graph_to_json(g)?)?;
    Ok(())
}

pub fn graph_to_json(g: &Graph) -> Result<String> {
    let mut edges = Vec::new();
    for u in 0..g.num_nodes() {
        for &v in g.neighbors(u) {
            if u < v {
                edges.push([u, v]);
            }
        }
    }
    let features: Vec<Vec<f64>> = (0..g.channels()).map(|r| g.features.row(r)).collect();
    let file = GraphFile {
        num_nodes: g.num_nodes(),
        edges,
        channels: g.channels(),
        features,
        labels: g.labels.clone(),
        masks: g.masks.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(n: usize, channels: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges, DenseMatrix::zeros(channels, n)).unwrap()
    }

    #[test]
    fn self_loops_on_edgeless_graph() {
        let g = Graph::from_edges(3, &[], DenseMatrix::zeros(1, 3)).unwrap();
        let g = add_self_loops(&g);
        assert_eq!(g.edge_count(), 3);
        for i in 0..3 {
            assert!(g.has_edge(i, i));
        }
        g.validate().unwrap();
    }

    #[test]
    fn self_loops_idempotent() {
        let g = add_self_loops(&path_graph(4, 1));
        let again = add_self_loops(&g);
        assert_eq!(g.offsets(), again.offsets());
        assert_eq!(g.indices(), again.indices());
    }

    #[test]
    fn self_loops_on_path() {
        let g = add_self_loops(&path_graph(2, 1));
        assert_eq!(g.edge_count(), 4);
        for (u, v) in [(0, 1), (1, 0), (0, 0), (1, 1)] {
            assert!(g.has_edge(u, v));
        }
    }

    #[test]
    fn normalize_single_node() {
        let g = add_self_loops(&path_graph(1, 1));
        let a = normalize_adjacency(&g, NormalizeMode::Symmetric).unwrap();
        assert_eq!(a.values(), &[1.0]);
    }

    #[test]
    fn normalize_two_clique_row_mean() {
        let g = add_self_loops(&path_graph(2, 1));
        let a = normalize_adjacency(&g, NormalizeMode::RowMean).unwrap();
        assert!(a.values().iter().all(|&w| (w - 0.5).abs() < 1e-15));
        for u in 0..2 {
            let (_, w) = a.row(u);
            let sum: f64 = w.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_binary_mode_is_all_ones() {
        let g = add_self_loops(&path_graph(3, 1));
        let a = normalize_adjacency(&g, NormalizeMode::Binary).unwrap();
        assert!(a.values().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn normalize_path_symmetric_weight() {
        let g = add_self_loops(&path_graph(3, 1));
        // deg(0) = 2, deg(1) = 3 with self-loops.
        let a = normalize_adjacency(&g, NormalizeMode::Symmetric).unwrap();
        let (nbrs, w) = a.row(0);
        let pos = nbrs.iter().position(|&v| v == 1).unwrap();
        assert!((w[pos] - 1.0 / (2.0f64 * 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn normalize_degree_zero_errors() {
        let g = path_graph(2, 1);
        let lonely = Graph::from_edges(2, &[], g.features().clone()).unwrap();
        assert!(matches!(
            normalize_adjacency(&lonely, NormalizeMode::Symmetric),
            Err(Error::DegreeZero { .. })
        ));
    }

    #[test]
    fn sbm_forced_cliques() {
        let mut rng = SeededRng::new(1);
        let g = generate_sbm(&mut rng, &[2, 2], 1.0, 0.0, 0.0).unwrap();
        assert!(g.has_edge(0, 1) && g.has_edge(2, 3));
        assert!(!g.has_edge(0, 2) && !g.has_edge(1, 3));
        g.validate().unwrap();
    }

    #[test]
    fn sbm_noiseless_features_one_hot() {
        let mut rng = SeededRng::new(2);
        let g = generate_sbm(&mut rng, &[3, 2], 1.0, 0.0, 0.0).unwrap();
        for c in 0..g.num_nodes() {
            let col = g.features().col(c);
            let ones = col.iter().filter(|&&v| v == 1.0).count();
            let zeros = col.iter().filter(|&&v| v == 0.0).count();
            assert_eq!((ones, zeros), (1, col.len() - 1));
            assert_eq!(col[g.labels().unwrap()[c]], 1.0);
        }
    }

    #[test]
    fn sbm_deterministic() {
        let g1 = generate_sbm(&mut SeededRng::new(9), &[5, 5], 0.8, 0.1, 0.3).unwrap();
        let g2 = generate_sbm(&mut SeededRng::new(9), &[5, 5], 0.8, 0.1, 0.3).unwrap();
        assert_eq!(g1.indices(), g2.indices());
        assert_eq!(g1.features().data(), g2.features().data());
        assert_eq!(g1.masks(), g2.masks());
    }

    #[test]
    fn sbm_invalid_probabilities() {
        let mut rng = SeededRng::new(3);
        assert!(generate_sbm(&mut rng, &[2, 2], 0.5, 0.6, 0.0).is_err());
        assert!(generate_sbm(&mut rng, &[2, 2], 1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn sbm_components_match_blocks_when_forced() {
        let mut rng = SeededRng::new(4);
        let g = generate_sbm(&mut rng, &[4, 3], 1.0, 0.0, 0.0).unwrap();
        // BFS from node 0 must reach exactly the first block.
        let mut seen = vec![false; g.num_nodes()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        let component: Vec<usize> = (0..g.num_nodes()).filter(|&i| seen[i]).collect();
        assert_eq!(component, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sbm_masks_disjoint_and_sized() {
        let mut rng = SeededRng::new(5);
        let g = generate_sbm(&mut rng, &[10, 10], 0.9, 0.05, 0.1).unwrap();
        let m = g.masks().unwrap();
        assert_eq!(m.train.len(), 2);
        assert_eq!(m.val.len(), 4);
        assert_eq!(m.test.len(), 14);
        g.validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let mut rng = SeededRng::new(6);
        let g = generate_sbm(&mut rng, &[3, 3], 0.9, 0.05, 0.2).unwrap();
        let text = graph_to_json(&g).unwrap();
        let back = graph_from_json(&text).unwrap();
        assert_eq!(g.offsets(), back.offsets());
        assert_eq!(g.indices(), back.indices());
        assert_eq!(g.features().data(), back.features().data());
        assert_eq!(g.labels(), back.labels());
        assert_eq!(g.masks(), back.masks());
    }

    #[test]
    fn json_missing_edges_field_errors() {
        let text = r#"{"num_nodes": 1, "channels": 1, "features": [[0.0]], "labels": null, "masks": null}"#;
        let err = graph_from_json(text).unwrap_err().to_string();
        assert!(err.contains("edges"), "{err}");
    }

    #[test]
    fn json_unknown_field_rejected() {
        let text = r#"{"num_nodes": 1, "edges": [], "channels": 1, "features": [[0.0]], "labels": null, "masks": null, "surprise": 3}"#;
        assert!(graph_from_json(text).is_err());
    }

    #[test]
    fn json_duplicate_edges_deduplicated() {
        let text = r#"{"num_nodes": 2, "edges": [[0,1],[1,0],[0,1]], "channels": 1, "features": [[0.0, 0.0]], "labels": null, "masks": null}"#;
        let g = graph_from_json(text).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn json_self_loop_rejected() {
        let text = r#"{"num_nodes": 2, "edges": [[0,0]], "channels": 1, "features": [[0.0, 0.0]], "labels": null, "masks": null}"#;
        assert!(graph_from_json(text).is_err());
    }

    #[test]
    fn generate_sparse_degree_near_target() {
        let mut rng = SeededRng::new(7);
        let g = generate_sparse(&mut rng, 500, 10.0).unwrap();
        let avg = g.edge_count() as f64 / 500.0;
        assert!((avg - 10.0).abs() < 1.0, "avg degree {avg}");
        g.validate().unwrap();
    }
}
