//! Builds the extraction prompt for a short passage and prints the JSON
//! schema the model's answer must satisfy.
//!
//! ```text
//! cargo run --example prompt_and_schema
//! ```

use narrative_net::extraction::{estimate_tokens, prompt_text};
use narrative_net::{build_prompt, output_schema};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let passage = "Elizabeth laughed at Mr. Darcy, while Jane wrote to her aunt in London.";
    let prompt = build_prompt(passage)?;

    println!("prompt: {} lines, ~{} tokens", prompt.lines().count(), estimate_tokens(&prompt));
    println!("embedded text round-trips: {}", prompt_text(&prompt) == Some(passage));
    println!("last line: {}", prompt.lines().last().unwrap_or_default());
    println!();
    println!("{}", serde_json::to_string_pretty(&output_schema())?);
    Ok(())
}
