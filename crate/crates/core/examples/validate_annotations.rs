//! Scores predicted relationships against gold annotations, first by exact
//! pair key and then with fuzzy name pairing.

use narrative_net::validation::{score_network, Attribute};
use narrative_net::{Affinity, CharacterNetwork, FineCategory, RelationshipRecord};

fn main() {
    let rel = |a: &str, b: &str, aff, fine| RelationshipRecord::new(a, b, aff, fine);
    let gold = CharacterNetwork::new(
        "middlemarch",
        vec![
            rel("Dorothea Brooke", "Edward Casaubon", Affinity::Negative, FineCategory::Husband),
            rel("Dorothea Brooke", "Celia Brooke", Affinity::Positive, FineCategory::Sister),
            rel("Tertius Lydgate", "Rosamond Vincy", Affinity::Negative, FineCategory::Husband),
            rel("Fred Vincy", "Mary Garth", Affinity::Positive, FineCategory::Lovers),
        ],
    );
    let pred = CharacterNetwork::new(
        "middlemarch",
        vec![
            rel("Edward Casaubon", "Dorothea Brooke", Affinity::Neutral, FineCategory::Husband),
            rel("Dorothea Brook", "Celia Brooke", Affinity::Positive, FineCategory::Sister),
            rel("Tertius Lydgate", "Rosamond Vincy", Affinity::Negative, FineCategory::Wife),
            rel("Fred Vincy", "Mr. Bulstrode", Affinity::Negative, FineCategory::Enemy),
        ],
    );

    for fuzzy in [false, true] {
        let report = score_network(&gold, &pred, fuzzy);
        println!("fuzzy pairing: {fuzzy}");
        for attribute in Attribute::ALL {
            let a = report.get(attribute);
            println!(
                "    {:>15}: {}/{} correct, accuracy {:?}, kappa {:?}, unmatched gold {} pred {}",
                attribute.as_str(),
                a.correct,
                a.matched,
                a.accuracy,
                a.kappa,
                a.unmatched_gold,
                a.unmatched_pred
            );
        }
    }
}
