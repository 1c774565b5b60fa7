//! Louvain communities overall and per relationship type, plus the
//! modularity trace of a planted two-clique graph.

use narrative_net::community::{louvain_with_trace, scoped_partitions};
use narrative_net::{build_graph, louvain, modularity, SimpleGraph};
use narrative_net::{Affinity, CharacterNetwork, FineCategory, RelationshipRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // two 4-cliques joined by a single bridge
    let mut edges = Vec::new();
    for base in [0, 4] {
        for a in base..base + 4 {
            for b in a + 1..base + 4 {
                edges.push((a, b));
            }
        }
    }
    edges.push((3, 4));
    let g = SimpleGraph::from_edges(8, &edges);
    let (partition, trace) = louvain_with_trace(&g);
    println!("communities: {:?}", partition.communities());
    println!("modularity: {:.4}", modularity(&g, &partition.assignment)?);
    println!("trace: {:?}", trace.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>());
    println!("deterministic: {}", louvain(&g) == partition);

    let rel = |a: &str, b: &str, fine| RelationshipRecord::new(a, b, Affinity::Positive, fine);
    let net = CharacterNetwork::new(
        "karamazov",
        vec![
            rel("Fyodor", "Dmitri", FineCategory::Parent),
            rel("Fyodor", "Ivan", FineCategory::Parent),
            rel("Fyodor", "Alyosha", FineCategory::Parent),
            rel("Dmitri", "Ivan", FineCategory::Brother),
            rel("Alyosha", "Zosima", FineCategory::Student),
            rel("Dmitri", "Grushenka", FineCategory::Lovers),
            rel("Grushenka", "Katerina", FineCategory::Enemy),
            rel("Alyosha", "Kolya", FineCategory::Friend),
        ],
    );
    println!();
    for scoped in scoped_partitions(&build_graph(&net)?) {
        let groups: Vec<Vec<&str>> = scoped
            .partition
            .communities()
            .into_iter()
            .map(|c| c.into_iter().map(|v| scoped.nodes[v].as_str()).collect())
            .collect();
        println!("{:>12}: {} communities {groups:?}", scoped.scope.as_str(), groups.len());
    }
    Ok(())
}
