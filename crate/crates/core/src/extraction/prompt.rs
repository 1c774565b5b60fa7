//! Prompt template and structured-output schema.

use serde_json::{json, Value};

use super::ExtractionError;

const TEXT_HEADER: &str = "*text*:\n[begin text]\n";
/// Everything between the narrative text and the output-format block:
/// `[end text]`, task, target, affinity, category and kind instructions.
const INSTRUCTIONS: &str = include_str!("template/instructions.txt");
/// Output-format block with the inline schema and the Don Quixote example.
const FORMAT_BLOCK: &str = include_str!("template/format.txt");
const CLOSING: &str = "\nBegin the task!";

pub const BEGIN_TEXT_MARKER: &str = "[begin text]";
pub const END_TEXT_MARKER: &str = "[end text]";

/// Section markers present in every prompt, in order of appearance.
pub const SECTION_MARKERS: [&str; 20] = [
    "*text*:",
    "[begin text]",
    "[end text]",
    "*task*:",
    "[begin task]",
    "[end task]",
    "*Target*:",
    "[begin characters]",
    "[end characters]",
    "*Affinity*:",
    "[begin affinity]",
    "[end affinity]",
    "*Category*:",
    "[begin category]",
    "[end category]",
    "*Kind*:",
    "[begin kind]",
    "[end kind]",
    "*Output Format*:",
    "[begin format]",
];

/// The example array embedded in the prompt (12 records).
pub fn example_output() -> &'static str {
    let start = FORMAT_BLOCK
        .find("[begin example]\n")
        .expect("template has example block")
        + "[begin example]\n".len();
    let end = FORMAT_BLOCK
        .find("[end example]")
        .expect("template has example block");
    &FORMAT_BLOCK[start..end]
}

/// Renders the extraction prompt for one volume.
pub fn build_prompt(text: &str) -> Result<String, ExtractionError> {
    if text.trim().is_empty() {
        return Err(ExtractionError::EmptyText);
    }
    let mut prompt = String::with_capacity(prompt_template_len() + text.len());
    prompt.push_str(TEXT_HEADER);
    prompt.push_str(text);
    prompt.push_str(INSTRUCTIONS);
    prompt.push_str(FORMAT_BLOCK);
    prompt.push_str(CLOSING);
    Ok(prompt)
}

/// The prompt with no narrative text, used to measure fixed overhead.
pub fn prompt_template() -> String {
    [TEXT_HEADER, INSTRUCTIONS, FORMAT_BLOCK, CLOSING].concat()
}

fn prompt_template_len() -> usize {
    TEXT_HEADER.len() + INSTRUCTIONS.len() + FORMAT_BLOCK.len() + CLOSING.len()
}

/// Recovers the narrative text from a rendered prompt.
pub fn prompt_text(prompt: &str) -> Option<&str> {
    let rest = prompt.strip_prefix(TEXT_HEADER)?;
    let end = rest.rfind(&format!("\n{END_TEXT_MARKER}"))?;
    Some(&rest[..end])
}

/// JSON Schema for a single relationship record.
///
/// The coarse enumeration lists all three categories; the inline schema text
/// inside the prompt repeats "social" and omits "familial", and is left as is.
pub fn output_schema() -> Value {
    use crate::taxonomy::{Affinity, CoarseCategory, FineCategory};
    let names = |all: &[&'static str]| Value::from(all.to_vec());
    let affinity: Vec<_> = Affinity::ALL.iter().map(|a| a.as_str()).collect();
    let coarse: Vec<_> = CoarseCategory::ALL.iter().map(|c| c.as_str()).collect();
    let fine: Vec<_> = FineCategory::ALL.iter().map(|f| f.as_str()).collect();
    json!({
        "$schema": "http://json-schema.org/draft-07/schema#",
        "$comment": "coarse_category enum corrected to professional/social/familial; the prompt's inline copy lists social twice",
        "type": "object",
        "title": "Character Relationship Schema",
        "description": "Schema for describing relationships between literary characters",
        "required": crate::taxonomy::RECORD_FIELDS,
        "properties": {
            "character_1": {
                "type": "string",
                "description": "First character in the relationship"
            },
            "character_2": {
                "type": "string",
                "description": "Second character in the relationship"
            },
            "affinity": {
                "type": "string",
                "enum": names(&affinity),
                "description": "The nature of the relationship between characters"
            },
            "coarse_category": {
                "type": "string",
                "enum": names(&coarse),
                "description": "Broad category of the relationship"
            },
            "fine_category": {
                "type": "string",
                "description": "Specific type of relationship",
                "enum": names(&fine)
            }
        },
        "additionalProperties": false
    })
}

/// Schema sent with each request: an array of [`output_schema`] records.
pub fn response_schema() -> Value {
    json!({ "type": "array", "items": output_schema() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn substitutes_text() {
        let p = build_prompt("Hello.").unwrap();
        assert!(p.contains("[begin text]\nHello."));
        assert!(p.contains("[end text]"));
        assert!(p.ends_with("Begin the task!"));
    }

    #[test]
    fn contains_example_pair() {
        let p = build_prompt("x").unwrap();
        assert!(p.contains("\"character_1\": \"Sancho Panza\",\n        \"character_2\": \"Don Quixote\""));
    }

    #[test]
    fn empty_text_rejected() {
        assert!(matches!(build_prompt(""), Err(ExtractionError::EmptyText)));
        assert!(matches!(build_prompt(" \n"), Err(ExtractionError::EmptyText)));
    }

    #[test]
    fn markers_in_order() {
        let p = build_prompt("sentinel").unwrap();
        let mut from = 0;
        for marker in SECTION_MARKERS {
            let at = p[from..].find(marker).unwrap_or_else(|| panic!("{marker} missing"));
            from += at + marker.len();
        }
        for marker in ["[end format]", "*Example output for Don Quixote*:", "[begin example]", "[end example]"] {
            assert!(p.contains(marker), "{marker}");
        }
    }

    #[test]
    fn example_has_twelve_records() {
        let v: Value = serde_json::from_str(example_output()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 12);
    }

    #[test]
    fn schema_shape() {
        let s = output_schema();
        assert_eq!(s["required"].as_array().unwrap().len(), 5);
        assert_eq!(
            s["properties"]["affinity"]["enum"],
            json!(["positive", "negative", "neutral"])
        );
        let coarse = s["properties"]["coarse_category"]["enum"].as_array().unwrap();
        let distinct: std::collections::HashSet<_> = coarse.iter().collect();
        assert_eq!(distinct.len(), 3);
        assert_eq!(s["properties"]["fine_category"]["enum"].as_array().unwrap().len(), 34);
        assert_eq!(s["additionalProperties"], json!(false));
    }

    proptest! {
        #[test]
        fn text_round_trips(text in "\\PC{1,200}") {
            prop_assume!(!text.trim().is_empty());
            let p = build_prompt(&text).unwrap();
            prop_assert_eq!(prompt_text(&p), Some(text.as_str()));
        }

        #[test]
        fn round_trips_adversarial_markers(a in "[a-z\n]{0,10}", b in "[a-z\n]{0,10}") {
            let text = format!("x{a}\n[end text]\n{b}[begin text]");
            let p = build_prompt(&text).unwrap();
            prop_assert_eq!(prompt_text(&p), Some(text.as_str()));
        }
    }
}
