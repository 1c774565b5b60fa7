//! Modularity and deterministic two-phase Louvain.
//!
//! Nodes are visited in ascending canonical key order (no randomization) and
//! the resolution is fixed at 1, so identical graphs always produce identical
//! partitions. A node moves only for a strictly positive modularity gain.

use serde::Serialize;

use crate::graph::{simple_projection, subgraph_by_coarse, SimpleGraph, TypedMultigraph};
use crate::taxonomy::CoarseCategory;

/// Gains at or below this are treated as no improvement.
const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CommunityError {
    #[error("modularity is undefined on a graph without edges")]
    NoEdges,
    #[error("node {0} has no community assignment")]
    UnassignedNode(usize),
}

/// Community assignment for every node, ids dense from 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    /// Absent for graphs without edges.
    pub modularity: Option<f64>,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    /// Members of each community, in node order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.assignment.iter().enumerate() {
            groups[c].push(node);
        }
        groups
    }
}

/// `Q = Σ_c [ L_c / m − (D_c / 2m)² ]` where `L_c` counts intra-community
/// edges and `D_c` sums degrees.
pub fn modularity(g: &SimpleGraph, assignment: &[usize]) -> Result<f64, CommunityError> {
    let n = g.node_count();
    if assignment.len() < n {
        return Err(CommunityError::UnassignedNode(assignment.len()));
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(CommunityError::NoEdges);
    }
    let k = assignment[..n].iter().max().map_or(0, |c| c + 1);
    let mut internal = vec![0usize; k];
    let mut degree = vec![0usize; k];
    for v in 0..n {
        degree[assignment[v]] += g.degree(v);
    }
    for (a, b) in g.edges() {
        if assignment[a] == assignment[b] {
            internal[assignment[a]] += 1;
        }
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&l, &d)| l as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Weighted graph used at each aggregation level. Self-loop weight counts
/// intra-node edges once; a node's strength counts it twice.
struct Level {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl Level {
    fn from_simple(g: &SimpleGraph, order: &[usize]) -> Self {
        // level nodes are positions in canonical order
        let mut position = vec![0; order.len()];
        for (pos, &v) in order.iter().enumerate() {
            position[v] = pos;
        }
        let adjacency = order
            .iter()
            .map(|&v| g.neighbors(v).iter().map(|&u| (position[u], 1.0)).collect())
            .collect();
        Self {
            adjacency,
            self_loops: vec![0.0; order.len()],
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    fn strength(&self, v: usize) -> f64 {
        self.adjacency[v].iter().map(|(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[v]
    }

    fn total_weight(&self) -> f64 {
        (0..self.len()).map(|v| self.strength(v)).sum::<f64>() / 2.0
    }

    /// Collapses communities (dense ids) into single nodes.
    fn aggregate(&self, community: &[usize], count: usize) -> Level {
        let mut weights = vec![std::collections::BTreeMap::<usize, f64>::new(); count];
        let mut self_loops = vec![0.0; count];
        for v in 0..self.len() {
            let cv = community[v];
            self_loops[cv] += self.self_loops[v];
            for &(u, w) in &self.adjacency[v] {
                let cu = community[u];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_loops[cv] += w / 2.0;
                } else {
                    *weights[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        Level {
            adjacency: weights.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops,
        }
    }
}

/// Relabels communities densely in order of first appearance.
fn densify(community: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    for c in community.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
    next
}

/// Local moving phase. Returns whether any node moved. `on_move` sees the
/// level-node community vector after every accepted move.
fn local_moves(level: &Level, community: &mut [usize], mut on_move: impl FnMut(&[usize])) -> bool {
    let n = level.len();
    let m2 = 2.0 * level.total_weight();
    let strength: Vec<f64> = (0..n).map(|v| level.strength(v)).collect();
    let mut totals = vec![0.0; n];
    for v in 0..n {
        totals[community[v]] += strength[v];
    }

    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for v in 0..n {
            let current = community[v];
            for &(u, w) in &level.adjacency[v] {
                let c = community[u];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += w;
            }
            totals[current] -= strength[v];

            let gain = |c: usize, links: &[f64]| links[c] - totals[c] * strength[v] / m2;
            let mut best = current;
            let mut best_gain = gain(current, &links);
            touched.sort_unstable();
            for &c in &touched {
                let g = gain(c, &links);
                if g > best_gain + GAIN_EPSILON {
                    best = c;
                    best_gain = g;
                }
            }

            totals[best] += strength[v];
            community[v] = best;
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
            if best != current {
                moved = true;
                any_move = true;
                on_move(community);
            }
        }
        if !moved {
            return any_move;
        }
    }
}

fn canonical_order(g: &SimpleGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by(|&a, &b| g.nodes()[a].cmp(&g.nodes()[b]).then(a.cmp(&b)));
    order
}

fn run_louvain(g: &SimpleGraph, mut trace: Option<&mut Vec<f64>>) -> Partition {
    let n = g.node_count();
    if g.edge_count() == 0 {
        return Partition {
            assignment: (0..n).collect(),
            modularity: None,
        };
    }
    let order = canonical_order(g);
    let mut level = Level::from_simple(g, &order);
    // level node currently holding each canonical position
    let mut membership: Vec<usize> = (0..n).collect();

    loop {
        let mut community: Vec<usize> = (0..level.len()).collect();
        let moved = local_moves(&level, &mut community, |current| {
            if let Some(trace) = trace.as_deref_mut() {
                let assignment = project(&order, &membership, current);
                trace.push(modularity(g, &assignment).expect("graph has edges"));
            }
        });
        let count = densify(&mut community);
        for slot in membership.iter_mut() {
            *slot = community[*slot];
        }
        if !moved || count == level.len() {
            break;
        }
        level = level.aggregate(&community, count);
    }

    let identity: Vec<usize> = (0..level.len()).collect();
    let mut assignment = project(&order, &membership, &identity);
    densify(&mut assignment);
    let q = modularity(g, &assignment).expect("graph has edges");
    Partition {
        assignment,
        modularity: Some(q),
    }
}

/// Maps level communities back to original node indices.
fn project(order: &[usize], membership: &[usize], community: &[usize]) -> Vec<usize> {
    let mut assignment = vec![0; order.len()];
    for (pos, &v) in order.iter().enumerate() {
        assignment[v] = community[membership[pos]];
    }
    assignment
}

/// Deterministic Louvain partition. Edgeless graphs yield singletons with
/// absent modularity.
pub fn louvain(g: &SimpleGraph) -> Partition {
    run_louvain(g, None)
}

/// [`louvain`] plus the modularity of the full graph after every accepted
/// move, across all levels.
pub fn louvain_with_trace(g: &SimpleGraph) -> (Partition, Vec<f64>) {
    let mut trace = Vec::new();
    let partition = run_louvain(g, Some(&mut trace));
    (partition, trace)
}

/// Which graph a partition was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphScope {
    Full,
    Social,
    Professional,
    Familial,
}

impl GraphScope {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphScope::Full => "full",
            GraphScope::Social => "social",
            GraphScope::Professional => "professional",
            GraphScope::Familial => "familial",
        }
    }
}

impl From<CoarseCategory> for GraphScope {
    fn from(c: CoarseCategory) -> Self {
        match c {
            CoarseCategory::Social => GraphScope::Social,
            CoarseCategory::Professional => GraphScope::Professional,
            CoarseCategory::Familial => GraphScope::Familial,
        }
    }
}

/// A partition together with the node keys it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct ScopedPartition {
    pub scope: GraphScope,
    pub nodes: Vec<String>,
    pub partition: Partition,
}

/// Per-category community counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CategoryCounts {
    pub social: usize,
    pub professional: usize,
    pub familial: usize,
}

impl CategoryCounts {
    pub fn get(&self, c: CoarseCategory) -> usize {
        match c {
            CoarseCategory::Social => self.social,
            CoarseCategory::Professional => self.professional,
            CoarseCategory::Familial => self.familial,
        }
    }

    fn set(&mut self, c: CoarseCategory, v: usize) {
        match c {
            CoarseCategory::Social => self.social = v,
            CoarseCategory::Professional => self.professional = v,
            CoarseCategory::Familial => self.familial = v,
        }
    }
}

/// Louvain on the full projection and on each coarse subgraph.
pub fn scoped_partitions(g: &TypedMultigraph) -> Vec<ScopedPartition> {
    let full = simple_projection(g);
    let mut out = vec![ScopedPartition {
        scope: GraphScope::Full,
        partition: louvain(&full),
        nodes: full.nodes().to_vec(),
    }];
    for &c in CoarseCategory::ALL {
        let sub = simple_projection(&subgraph_by_coarse(g, c));
        out.push(ScopedPartition {
            scope: c.into(),
            partition: louvain(&sub),
            nodes: sub.nodes().to_vec(),
        });
    }
    out
}

/// `(overall, by_type)` community counts from [`scoped_partitions`] output.
pub fn counts_from_partitions(parts: &[ScopedPartition]) -> (usize, CategoryCounts) {
    let mut overall = 0;
    let mut by_type = CategoryCounts::default();
    for p in parts {
        let count = p.partition.community_count();
        match p.scope {
            GraphScope::Full => overall = count,
            GraphScope::Social => by_type.set(CoarseCategory::Social, count),
            GraphScope::Professional => by_type.set(CoarseCategory::Professional, count),
            GraphScope::Familial => by_type.set(CoarseCategory::Familial, count),
        }
    }
    (overall, by_type)
}

/// Community counts of a network: overall and per coarse category.
pub fn community_counts(
    net: &crate::taxonomy::CharacterNetwork,
) -> Result<(usize, CategoryCounts), crate::graph::GraphError> {
    let g = crate::graph::build_graph(net)?;
    Ok(counts_from_partitions(&scoped_partitions(&g)))
}
