//! Per-network metrics.
//!
//! Topology metrics are computed on the simple projection of a network's
//! typed multigraph; affinity and category proportions are computed on the
//! record list.
//!
//! Two quantities have no closed form in the literature this crate follows
//! and use stand-in definitions:
//! - protagonism = `max_degree / (2|E|)`, the share of edge endpoints held by
//!   the best-connected character;
//! - mediatedness = the maximum normalized betweenness over all characters.

use std::collections::VecDeque;

use serde::Serialize;

use crate::community::{counts_from_partitions, scoped_partitions, CategoryCounts, ScopedPartition};
use crate::graph::{build_graph, simple_projection, GraphError, SimpleGraph};
use crate::taxonomy::{Affinity, CharacterNetwork, CoarseCategory};

pub const DEFAULT_EIGEN_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph has no edges")]
    NoEdges,
    #[error("network has no records")]
    NoRecords,
    #[error("power iteration did not converge in {max_iter} iterations")]
    NoConvergence {
        max_iter: usize,
        last_iterate: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Component id per node; ids are numbered by lowest member index.
    pub assignment: Vec<usize>,
}

pub fn connected_components(g: &SimpleGraph) -> Components {
    let n = g.node_count();
    let mut assignment = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if assignment[start] != usize::MAX {
            continue;
        }
        assignment[start] = count;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &u in g.neighbors(v) {
                if assignment[u] == usize::MAX {
                    assignment[u] = count;
                    queue.push_back(u);
                }
            }
        }
        count += 1;
    }
    Components { count, assignment }
}

/// Global transitivity: closed triples over connected triples (equivalently
/// `3 × triangles / triples`); 0 when there are no connected triples.
pub fn transitivity(g: &SimpleGraph) -> f64 {
    let mut closed = 0u64;
    let mut triples = 0u64;
    for v in 0..g.node_count() {
        let nbrs = g.neighbors(v);
        let d = nbrs.len() as u64;
        triples += d * d.saturating_sub(1) / 2;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if g.has_edge(a, b) {
                    closed += 1;
                }
            }
        }
    }
    if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

/// `2|E| / |V|`.
pub fn average_degree(g: &SimpleGraph) -> Result<f64, MetricsError> {
    if g.node_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    Ok(2.0 * g.edge_count() as f64 / g.node_count() as f64)
}

/// Shortest-path betweenness by Brandes' accumulation, normalized by
/// `(n-1)(n-2)/2`. All zeros when `n < 3`.
pub fn betweenness_centrality(g: &SimpleGraph) -> Vec<f64> {
    let n = g.node_count();
    let mut centrality = vec![0.0; n];
    if n < 3 {
        return centrality;
    }

    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = -1;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }

    // every unordered pair was counted from both endpoints
    let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
    for c in &mut centrality {
        *c *= scale;
    }
    centrality
}

/// Eigenvector centrality by power iteration, per connected component.
///
/// Each component iterates `x ← (A + I) x` from a uniform start, normalized
/// to unit length each step, until successive iterates differ by less than
/// `tol` in max norm. The shift by `I` keeps the eigenvectors of `A` while
/// avoiding the oscillation plain iteration shows on bipartite components.
/// The concatenated vector is scaled to unit Euclidean norm.
pub fn eigenvector_centrality(
    g: &SimpleGraph,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, MetricsError> {
    let n = g.node_count();
    if n == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    let comps = connected_components(g);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); comps.count];
    for (v, &c) in comps.assignment.iter().enumerate() {
        members[c].push(v);
    }

    let mut values = vec![0.0; n];
    let mut converged = true;
    let mut next = vec![0.0; n];
    for nodes in &members {
        let start = 1.0 / (nodes.len() as f64).sqrt();
        for &v in nodes {
            values[v] = start;
        }
        let mut done = false;
        for _ in 0..max_iter {
            for &v in nodes {
                next[v] = values[v] + g.neighbors(v).iter().map(|&u| values[u]).sum::<f64>();
            }
            let norm = nodes.iter().map(|&v| next[v] * next[v]).sum::<f64>().sqrt();
            let mut diff = 0.0f64;
            for &v in nodes {
                let x = next[v] / norm;
                diff = diff.max((x - values[v]).abs());
                values[v] = x;
            }
            if diff < tol {
                done = true;
                break;
            }
        }
        converged &= done;
    }

    let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut values {
        *x /= norm;
    }
    if converged {
        Ok(values)
    } else {
        Err(MetricsError::NoConvergence {
            max_iter,
            last_iterate: values,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarDistance {
    pub raw: u64,
    pub normalized: f64,
}

/// Edge edits turning the graph into a star around a maximum-degree node:
/// `|V| + |E| − 2·max_degree − 1`, and that value divided by `|V|`.
pub fn star_edit_distance(g: &SimpleGraph) -> Result<StarDistance, MetricsError> {
    let n = g.node_count();
    if n == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    // |E| ≥ Δ and |V| ≥ Δ + 1, so this never underflows
    let raw = (n + g.edge_count() - 2 * g.max_degree() - 1) as u64;
    Ok(StarDistance {
        raw,
        normalized: raw as f64 / n as f64,
    })
}

/// `max_degree / (2|E|)`.
pub fn protagonism(g: &SimpleGraph) -> Result<f64, MetricsError> {
    if g.edge_count() == 0 {
        return Err(MetricsError::NoEdges);
    }
    Ok(g.max_degree() as f64 / (2 * g.edge_count()) as f64)
}

/// Maximum normalized betweenness.
pub fn mediatedness(g: &SimpleGraph) -> Result<f64, MetricsError> {
    if g.node_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    Ok(betweenness_centrality(g).into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffinityProportions {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoarseProportions {
    pub social: f64,
    pub professional: f64,
    pub familial: f64,
}

pub fn affinity_proportions(net: &CharacterNetwork) -> Result<AffinityProportions, MetricsError> {
    let total = net.records.len();
    if total == 0 {
        return Err(MetricsError::NoRecords);
    }
    let share = |a: Affinity| {
        net.records.iter().filter(|r| r.affinity == a).count() as f64 / total as f64
    };
    Ok(AffinityProportions {
        positive: share(Affinity::Positive),
        negative: share(Affinity::Negative),
        neutral: share(Affinity::Neutral),
    })
}

/// Category shares, using the coarse category implied by each fine label.
pub fn coarse_proportions(net: &CharacterNetwork) -> Result<CoarseProportions, MetricsError> {
    let total = net.records.len();
    if total == 0 {
        return Err(MetricsError::NoRecords);
    }
    let share = |c: CoarseCategory| {
        net.records
            .iter()
            .filter(|r| r.fine_category.coarse() == c)
            .count() as f64
            / total as f64
    };
    Ok(CoarseProportions {
        social: share(CoarseCategory::Social),
        professional: share(CoarseCategory::Professional),
        familial: share(CoarseCategory::Familial),
    })
}

/// The full metric vector of one network. Optional fields are absent when
/// undefined for the network (no nodes, no edges, no records).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkMetrics {
    pub volume_id: String,
    pub node_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    pub component_count: usize,
    pub transitivity: Option<f64>,
    pub average_degree: Option<f64>,
    pub mean_betweenness: Option<f64>,
    pub mean_eigenvector: Option<f64>,
    pub star_edit_distance: Option<u64>,
    pub star_edit_distance_normalized: Option<f64>,
    pub protagonism: Option<f64>,
    pub mediatedness: Option<f64>,
    pub affinity_proportions: Option<AffinityProportions>,
    pub coarse_proportions: Option<CoarseProportions>,
    pub community_count_overall: usize,
    pub community_counts_by_type: CategoryCounts,
}

/// Names accepted by [`NetworkMetrics::metric`], in CSV column order.
pub const METRIC_NAMES: [&str; 22] = [
    "node_count",
    "edge_count",
    "max_degree",
    "component_count",
    "transitivity",
    "average_degree",
    "mean_betweenness",
    "mean_eigenvector",
    "star_edit_distance",
    "star_edit_distance_normalized",
    "protagonism",
    "mediatedness",
    "affinity_proportions_positive",
    "affinity_proportions_negative",
    "affinity_proportions_neutral",
    "coarse_proportions_social",
    "coarse_proportions_professional",
    "coarse_proportions_familial",
    "community_count_overall",
    "community_counts_by_type_social",
    "community_counts_by_type_professional",
    "community_counts_by_type_familial",
];

impl NetworkMetrics {
    /// Looks up a flattened metric by its column name.
    pub fn metric(&self, name: &str) -> Option<f64> {
        let a = self.affinity_proportions;
        let c = self.coarse_proportions;
        let by = &self.community_counts_by_type;
        match name {
            "node_count" => Some(self.node_count as f64),
            "edge_count" => Some(self.edge_count as f64),
            "max_degree" => Some(self.max_degree as f64),
            "component_count" => Some(self.component_count as f64),
            "transitivity" => self.transitivity,
            "average_degree" => self.average_degree,
            "mean_betweenness" => self.mean_betweenness,
            "mean_eigenvector" => self.mean_eigenvector,
            "star_edit_distance" => self.star_edit_distance.map(|v| v as f64),
            "star_edit_distance_normalized" => self.star_edit_distance_normalized,
            "protagonism" => self.protagonism,
            "mediatedness" => self.mediatedness,
            "affinity_proportions_positive" => a.map(|p| p.positive),
            "affinity_proportions_negative" => a.map(|p| p.negative),
            "affinity_proportions_neutral" => a.map(|p| p.neutral),
            "coarse_proportions_social" => c.map(|p| p.social),
            "coarse_proportions_professional" => c.map(|p| p.professional),
            "coarse_proportions_familial" => c.map(|p| p.familial),
            "community_count_overall" => Some(self.community_count_overall as f64),
            "community_counts_by_type_social" => Some(by.social as f64),
            "community_counts_by_type_professional" => Some(by.professional as f64),
            "community_counts_by_type_familial" => Some(by.familial as f64),
            _ => None,
        }
    }

    pub fn is_known_metric(name: &str) -> bool {
        METRIC_NAMES.contains(&name)
    }
}

/// Metrics plus the community partitions they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkAnalysis {
    pub metrics: NetworkMetrics,
    pub partitions: Vec<ScopedPartition>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Computes every metric and community partition of a repaired, deduped
/// network.
pub fn analyze_network(net: &CharacterNetwork) -> Result<NetworkAnalysis, GraphError> {
    let typed = build_graph(net)?;
    let g = simple_projection(&typed);
    let partitions = scoped_partitions(&typed);
    let (community_count_overall, community_counts_by_type) = counts_from_partitions(&partitions);
    let has_nodes = g.node_count() > 0;

    let star = star_edit_distance(&g).ok();
    let eigen = match eigenvector_centrality(&g, DEFAULT_EIGEN_TOLERANCE, DEFAULT_EIGEN_MAX_ITER) {
        Ok(v) => mean(&v),
        Err(_) => None,
    };
    let metrics = NetworkMetrics {
        volume_id: net.volume_id.clone(),
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        max_degree: g.max_degree(),
        component_count: connected_components(&g).count,
        transitivity: has_nodes.then(|| transitivity(&g)),
        average_degree: average_degree(&g).ok(),
        mean_betweenness: if has_nodes { mean(&betweenness_centrality(&g)) } else { None },
        mean_eigenvector: eigen,
        star_edit_distance: star.map(|s| s.raw),
        star_edit_distance_normalized: star.map(|s| s.normalized),
        protagonism: protagonism(&g).ok(),
        mediatedness: mediatedness(&g).ok(),
        affinity_proportions: affinity_proportions(net).ok(),
        coarse_proportions: coarse_proportions(net).ok(),
        community_count_overall,
        community_counts_by_type,
    };
    Ok(NetworkAnalysis {
        metrics,
        partitions,
    })
}

pub fn compute_metrics(net: &CharacterNetwork) -> Result<NetworkMetrics, GraphError> {
    analyze_network(net).map(|a| a.metrics)
}
