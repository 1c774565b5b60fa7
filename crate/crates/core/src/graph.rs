//! Typed multigraphs built from networks, their simple projections and
//! per-category subgraphs.
//!
//! Nodes are canonical (normalized) character names, stored sorted, so node
//! index order is canonical key order.

use std::collections::BTreeMap;
use std::io::Write;

use crate::taxonomy::{
    normalize_name, Affinity, CharacterNetwork, CoarseCategory, FineCategory, PairKey,
    TaxonomyError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("volume {volume_id}: self-pair {pair} reached graph construction")]
    SelfLoop { volume_id: String, pair: PairKey },
    #[error("volume {volume_id}: {source}")]
    Record {
        volume_id: String,
        source: TaxonomyError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypedEdge {
    pub a: usize,
    pub b: usize,
    pub affinity: Affinity,
    pub fine: FineCategory,
    pub coarse: CoarseCategory,
}

/// Undirected graph allowing several typed edges per node pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypedMultigraph {
    nodes: Vec<String>,
    labels: Vec<String>,
    edges: Vec<TypedEdge>,
}

impl TypedMultigraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical keys, sorted.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    /// Display name (first spelling seen) for each node.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[TypedEdge] {
        &self.edges
    }
}

/// One node per distinct canonical name, one typed edge per record. The
/// coarse label of each edge is derived from its fine label.
pub fn build_graph(net: &CharacterNetwork) -> Result<TypedMultigraph, GraphError> {
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut pairs = Vec::with_capacity(net.records.len());
    for record in &net.records {
        let pair = record.pair_key().map_err(|source| GraphError::Record {
            volume_id: net.volume_id.clone(),
            source,
        })?;
        if pair.is_self_pair() {
            return Err(GraphError::SelfLoop {
                volume_id: net.volume_id.clone(),
                pair,
            });
        }
        for raw in [&record.character_1, &record.character_2] {
            names
                .entry(normalize_name(raw))
                .or_insert_with(|| raw.trim().to_string());
        }
        pairs.push((pair, record));
    }

    let index: BTreeMap<&str, usize> = names
        .keys()
        .enumerate()
        .map(|(i, k)| (k.as_str(), i))
        .collect();
    let edges = pairs
        .iter()
        .map(|(pair, record)| TypedEdge {
            a: index[pair.first.as_str()],
            b: index[pair.second.as_str()],
            affinity: record.affinity,
            fine: record.fine_category,
            coarse: record.fine_category.coarse(),
        })
        .collect();
    let (nodes, labels) = names.into_iter().unzip();
    Ok(TypedMultigraph {
        nodes,
        labels,
        edges,
    })
}

/// Keeps only edges of one coarse category; nodes without such an edge are
/// dropped.
pub fn subgraph_by_coarse(g: &TypedMultigraph, category: CoarseCategory) -> TypedMultigraph {
    let kept: Vec<&TypedEdge> = g.edges.iter().filter(|e| e.coarse == category).collect();
    let mut used = vec![false; g.nodes.len()];
    for e in &kept {
        used[e.a] = true;
        used[e.b] = true;
    }
    let mut remap = vec![usize::MAX; g.nodes.len()];
    let mut nodes = Vec::new();
    let mut labels = Vec::new();
    for (old, _) in used.iter().enumerate().filter(|(_, u)| **u) {
        remap[old] = nodes.len();
        nodes.push(g.nodes[old].clone());
        labels.push(g.labels[old].clone());
    }
    let edges = kept
        .into_iter()
        .map(|e| TypedEdge {
            a: remap[e.a],
            b: remap[e.b],
            ..*e
        })
        .collect();
    TypedMultigraph {
        nodes,
        labels,
        edges,
    }
}

/// Writes `node_a<TAB>node_b<TAB>affinity<TAB>fine_category` lines using
/// display names.
pub fn write_edge_list<W: Write>(g: &TypedMultigraph, mut out: W) -> std::io::Result<()> {
    for e in &g.edges {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            g.labels[e.a], g.labels[e.b], e.affinity, e.fine
        )?;
    }
    Ok(())
}

/// Unweighted undirected graph without self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimpleGraph {
    nodes: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl SimpleGraph {
    /// Builds a graph on `n` nodes keyed `"000"`, `"001"`, ... so that key
    /// order equals index order. Self-loops and repeated pairs are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let width = n.saturating_sub(1).to_string().len();
        let nodes = (0..n).map(|i| format!("{i:0width$}")).collect();
        Self::with_nodes(nodes, edges.iter().copied())
    }

    /// Builds a graph over the given node keys. Panics when an edge endpoint
    /// is out of range.
    pub fn with_nodes(nodes: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Self {
            nodes,
            adjacency,
            edge_count: edge_count / 2,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    /// Sorted neighbor indices.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Each edge once, as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }
}

/// Same nodes; a pair is adjacent iff at least one typed edge joins it.
pub fn simple_projection(g: &TypedMultigraph) -> SimpleGraph {
    SimpleGraph::with_nodes(g.nodes.clone(), g.edges.iter().map(|e| (e.a, e.b)))
}
