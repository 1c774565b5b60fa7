//! Extraction over HTTP. Reads the endpoint from `NARRATIVE_NET_API_URL`
//! (and optionally `NARRATIVE_NET_API_KEY` / `NARRATIVE_NET_MODEL`); without
//! a URL it prints the request body it would send and exits.
//!
//! ```text
//! NARRATIVE_NET_API_URL=http://localhost:8080/extract cargo run --example http_backend
//! ```

use narrative_net::config::resolve_http;
use narrative_net::extraction::{extract_network, response_schema, HttpClient};
use narrative_net::{build_prompt, TokenBudget};

const TEXT: &str = "Jo March wrote plays for her sisters Meg, Beth and Amy, and Laurie watched.";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = match resolve_http(Default::default(), |k| std::env::var(k).ok(), None) {
        Ok(config) => config,
        Err(e) => {
            println!("{e}");
            let prompt = build_prompt(TEXT)?;
            let body = serde_json::json!({
                "model": "default",
                "prompt": format!("<{} bytes>", prompt.len()),
                "schema": {"type": response_schema()["type"], "items": "<record schema>"},
                "max_output_tokens": TokenBudget::default().max_output_tokens(),
            });
            println!("request body shape:\n{}", serde_json::to_string_pretty(&body)?);
            return Ok(());
        }
    };

    println!("posting to {} as model {}", config.api_url, config.model);
    let extraction = extract_network("little-women", TEXT, HttpClient::new(config), TokenBudget::default())?;
    for r in &extraction.network.records {
        println!("{} / {}: {}", r.character_1, r.character_2, r.fine_category.as_str());
    }
    Ok(())
}
