//! Tolerant parsing of model responses into relationship records.

use serde_json::Value;

use super::ExtractionError;
use crate::taxonomy::{parse_json_record, RelationshipRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedOutput {
    pub records: Vec<RelationshipRecord>,
    pub malformed_records_dropped: usize,
    /// The response was not valid JSON and complete leading objects were
    /// recovered from an unterminated array.
    pub salvaged_prefix: bool,
}

/// Parses a response body into schema-valid records.
///
/// A well-formed array is validated record by record, dropping and counting
/// invalid entries. A single record object is accepted as a one-element
/// array. Output cut off mid-array keeps every complete leading object.
pub fn parse_model_output(raw: &str) -> Result<ParsedOutput, ExtractionError> {
    let body = strip_code_fence(raw.trim());
    let (values, salvaged_prefix) = match serde_json::from_str::<Value>(body) {
        Ok(Value::Array(items)) => (items, false),
        Ok(obj @ Value::Object(_)) => (vec![obj], false),
        Ok(_) => return Err(malformed("response is not an array of records")),
        Err(_) => (salvage_array_prefix(body)?, true),
    };

    let total = values.len();
    let records: Vec<_> = values
        .iter()
        .filter_map(|v| parse_json_record(v).ok())
        .collect();
    let dropped = total - records.len();
    if records.is_empty() && (dropped > 0 || salvaged_prefix) {
        return Err(malformed("no valid record in response"));
    }
    Ok(ParsedOutput {
        records,
        malformed_records_dropped: dropped,
        salvaged_prefix,
    })
}

fn malformed(detail: &str) -> ExtractionError {
    ExtractionError::MalformedOutput(detail.to_string())
}

fn strip_code_fence(s: &str) -> &str {
    let Some(rest) = s.strip_prefix("```") else {
        return s;
    };
    let rest = rest.strip_prefix("json").unwrap_or(rest);
    rest.trim_end()
        .strip_suffix("```")
        .unwrap_or(rest)
        .trim()
}

/// Recovers the complete top-level objects of an array whose closing bracket
/// is missing.
fn salvage_array_prefix(s: &str) -> Result<Vec<Value>, ExtractionError> {
    let open = s
        .find('[')
        .ok_or_else(|| malformed("no JSON array in response"))?;
    let bytes = s.as_bytes();
    let mut values = Vec::new();
    let mut i = open + 1;
    loop {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b',') {
            i += 1;
        }
        if i >= bytes.len() || bytes[i] != b'{' {
            break;
        }
        let Some(end) = matching_brace(bytes, i) else {
            break;
        };
        match serde_json::from_str::<Value>(&s[i..=end]) {
            Ok(v) => values.push(v),
            Err(_) => break,
        }
        i = end + 1;
    }
    if values.is_empty() {
        Err(malformed("no complete record recoverable"))
    } else {
        Ok(values)
    }
}

fn matching_brace(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if in_string {
            match (escaped, b) {
                (true, _) => escaped = false,
                (false, b'\\') => escaped = true,
                (false, b'"') => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' | b'[' => depth += 1,
            b'}' | b']' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(start + offset);
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::prompt::example_output;

    #[test]
    fn parses_example_array() {
        let out = parse_model_output(example_output()).unwrap();
        assert_eq!(out.records.len(), 12);
        assert_eq!(out.malformed_records_dropped, 0);
        assert!(!out.salvaged_prefix);
    }

    #[test]
    fn drops_invalid_records_individually() {
        let raw = example_output().replacen("\"negative\"", "\"maybe\"", 1);
        let out = parse_model_output(&raw).unwrap();
        assert_eq!(out.records.len(), 11);
        assert_eq!(out.malformed_records_dropped, 1);
    }

    #[test]
    fn salvages_truncated_array() {
        let full = example_output();
        // cut inside the fourth object
        let fourth = full.match_indices('{').nth(3).unwrap().0;
        let cut = &full[..fourth + 30];
        let out = parse_model_output(cut).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.salvaged_prefix);
        assert_eq!(out.records[2].character_2, "Don Quixote");
    }

    #[test]
    fn braces_inside_strings_do_not_confuse_salvage() {
        let raw = r#"[{"character_1": "A {x}", "character_2": "B\"}", "affinity": "positive",
            "coarse_category": "social", "fine_category": "friend"}, {"character_1": "C"#;
        let out = parse_model_output(raw).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].character_2, "B\"}");
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(
            parse_model_output("not data"),
            Err(ExtractionError::MalformedOutput(_))
        ));
        assert!(matches!(
            parse_model_output("[{\"character_1\": "),
            Err(ExtractionError::MalformedOutput(_))
        ));
        assert!(matches!(
            parse_model_output("42"),
            Err(ExtractionError::MalformedOutput(_))
        ));
    }

    #[test]
    fn all_invalid_is_malformed_but_empty_array_is_not() {
        let raw = r#"[{"character_1": "A"}]"#;
        assert!(parse_model_output(raw).is_err());
        let out = parse_model_output("[]").unwrap();
        assert!(out.records.is_empty());
    }

    #[test]
    fn accepts_fenced_output() {
        let raw = format!("```json\n{}\n```", example_output());
        assert_eq!(parse_model_output(&raw).unwrap().records.len(), 12);
    }
}
