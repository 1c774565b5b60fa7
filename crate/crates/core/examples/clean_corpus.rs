//! Cleans a small corpus in memory: coarse-label repair, duplicate pair
//! removal and dropping networks whose relationship sets coincide.

use narrative_net::pipeline::clean_networks;
use narrative_net::{Affinity, CharacterNetwork, CoarseCategory, FineCategory, RelationshipRecord};

fn record(a: &str, b: &str, fine: FineCategory, coarse: CoarseCategory) -> RelationshipRecord {
    RelationshipRecord {
        character_1: a.into(),
        character_2: b.into(),
        affinity: Affinity::Positive,
        coarse_category: coarse,
        fine_category: fine,
    }
}

fn main() {
    let first = CharacterNetwork::new(
        "emma-1",
        vec![
            // sister is familial, not social
            record("Emma", "Isabella", FineCategory::Sister, CoarseCategory::Social),
            record("Emma", "Harriet", FineCategory::Friend, CoarseCategory::Social),
            record("harriet", "EMMA", FineCategory::Friend, CoarseCategory::Social),
        ],
    );
    let reprint = CharacterNetwork::new(
        "emma-2",
        vec![
            record("Harriet", "Emma", FineCategory::Friend, CoarseCategory::Social),
            record("Isabella", "Emma", FineCategory::Sister, CoarseCategory::Familial),
        ],
    );

    let (cleaned, counts) = clean_networks(vec![first, reprint]);
    println!("{counts:#?}");
    for net in &cleaned {
        println!("{}:", net.volume_id);
        for r in &net.records {
            println!(
                "    {} / {}: {} ({})",
                r.character_1,
                r.character_2,
                r.fine_category.as_str(),
                r.coarse_category.as_str()
            );
        }
    }
}
