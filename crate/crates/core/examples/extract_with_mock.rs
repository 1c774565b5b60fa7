//! Runs single-volume extraction against a scripted mock backend, covering a
//! clean reply, a truncated reply and a content-filter refusal.

use narrative_net::extraction::{extract_network, MockClient, ScriptedReply};
use narrative_net::TokenBudget;

const TEXT: &str = "Ishmael shipped aboard the Pequod, where Ahab commanded Starbuck and Stubb.";

fn main() {
    let full = r#"[
        {"character_1": "Ahab", "character_2": "Starbuck", "affinity": "negative",
         "coarse_category": "professional", "fine_category": "employee"},
        {"character_1": "Starbuck", "character_2": "Stubb", "affinity": "positive",
         "coarse_category": "familial", "fine_category": "colleague"},
        {"character_1": "stubb", "character_2": "STARBUCK", "affinity": "neutral",
         "coarse_category": "professional", "fine_category": "colleague"}
    ]"#;
    // cut off inside the second object
    let cut = r#"[{"character_1": "Ishmael", "character_2": "Queequeg", "affinity": "positive",
        "coarse_category": "social", "fine_category": "friend"}, {"character_1": "Ish"#;

    let client = MockClient::new()
        .with_reply("full", ScriptedReply::Completed { response: full.into() })
        .with_reply("cut", ScriptedReply::OutputLimit { response: cut.into() })
        .with_reply("refused", ScriptedReply::ContentFilter);

    for id in ["full", "cut", "refused"] {
        match extract_network(id, TEXT, &client, TokenBudget::default()) {
            Ok(x) => {
                println!(
                    "{id}: {} records, {} duplicates dropped, truncated={}",
                    x.network.records.len(),
                    x.duplicate_records_dropped,
                    x.truncated
                );
                for r in &x.network.records {
                    // the mislabeled coarse category arrives repaired
                    println!(
                        "    {} / {}: {} {} ({})",
                        r.character_1,
                        r.character_2,
                        r.affinity.as_str(),
                        r.fine_category.as_str(),
                        r.coarse_category.as_str()
                    );
                }
            }
            Err(e) => println!("{id}: rejected as {} ({e})", e.reject_reason().as_str()),
        }
    }
}
