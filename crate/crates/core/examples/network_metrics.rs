//! Computes every per-network metric for a hub-and-spoke cast with one
//! peripheral triangle.

use narrative_net::metrics::{betweenness_centrality, eigenvector_centrality, star_edit_distance, METRIC_NAMES};
use narrative_net::{build_graph, compute_metrics, graph::simple_projection};
use narrative_net::{Affinity, CharacterNetwork, FineCategory, RelationshipRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rel = |a: &str, b: &str, aff, fine| RelationshipRecord::new(a, b, aff, fine);
    let net = CharacterNetwork::new(
        "quixote",
        vec![
            rel("Don Quixote", "Sancho Panza", Affinity::Positive, FineCategory::Employee),
            rel("Don Quixote", "Dulcinea", Affinity::Positive, FineCategory::Lovers),
            rel("Don Quixote", "Rocinante's Owner", Affinity::Neutral, FineCategory::Acquaintance),
            rel("Don Quixote", "Sansón Carrasco", Affinity::Negative, FineCategory::Enemy),
            rel("Sancho Panza", "Teresa Panza", Affinity::Positive, FineCategory::Husband),
            rel("Teresa Panza", "Sanchica", Affinity::Positive, FineCategory::Parent),
            rel("Sancho Panza", "Sanchica", Affinity::Positive, FineCategory::Parent),
        ],
    );

    let metrics = compute_metrics(&net)?;
    for name in METRIC_NAMES {
        match metrics.metric(name) {
            Some(v) => println!("{name:>40} {v:.4}"),
            None => println!("{name:>40} -"),
        }
    }

    let g = simple_projection(&build_graph(&net)?);
    let between = betweenness_centrality(&g);
    let eigen = eigenvector_centrality(&g, 1e-10, 10_000)?;
    println!();
    for (v, name) in g.nodes().iter().enumerate() {
        println!("{name:>20}  betweenness {:.3}  eigenvector {:.3}", between[v], eigen[v]);
    }
    let star = star_edit_distance(&g)?;
    println!("star edit distance {} ({:.3} per node)", star.raw, star.normalized);
    Ok(())
}
