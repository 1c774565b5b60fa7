//! Prompting a structured-output model for one volume's relationship network.
//!
//! [`Extractor`] ties together the prompt, the token budget, a
//! [`StructuredClient`] and the tolerant parser: the result is a repaired,
//! pair-deduplicated [`CharacterNetwork`] or a typed failure.

pub mod client;
pub mod parse;
pub mod prompt;

use serde::{Deserialize, Serialize};

pub use client::{
    FinishReason, HttpClient, HttpConfig, MockClient, ModelRequest, ModelResponse, ScriptedReply,
    StructuredClient,
};
pub use parse::{parse_model_output, ParsedOutput};
pub use prompt::{build_prompt, output_schema, prompt_text, response_schema};

use crate::taxonomy::{dedupe_network, repair, CharacterNetwork};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractionError {
    #[error("volume text is empty")]
    EmptyText,
    #[error("{tokens} tokens exceed the context limit of {limit}")]
    TooLong { tokens: u64, limit: u64 },
    #[error("rejected by the content filter")]
    ContentFiltered,
    #[error("transport failure: {0}")]
    TransportFailure(String),
    #[error("malformed output: {0}")]
    MalformedOutput(String),
    #[error("invalid token budget: {0}")]
    InvalidBudget(String),
}

/// Rejection reasons as written to the rejection log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooLong,
    ContentFiltered,
    Transport,
    Malformed,
}

impl RejectReason {
    pub const ALL: [RejectReason; 4] = [
        RejectReason::TooLong,
        RejectReason::ContentFiltered,
        RejectReason::Transport,
        RejectReason::Malformed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TooLong => "too_long",
            RejectReason::ContentFiltered => "content_filtered",
            RejectReason::Transport => "transport",
            RejectReason::Malformed => "malformed",
        }
    }
}

impl ExtractionError {
    pub fn reject_reason(&self) -> RejectReason {
        match self {
            ExtractionError::TooLong { .. } => RejectReason::TooLong,
            ExtractionError::ContentFiltered => RejectReason::ContentFiltered,
            ExtractionError::TransportFailure(_) => RejectReason::Transport,
            ExtractionError::EmptyText
            | ExtractionError::MalformedOutput(_)
            | ExtractionError::InvalidBudget(_) => RejectReason::Malformed,
        }
    }
}

/// Context and output token limits of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBudget {
    max_context_tokens: u64,
    max_output_tokens: u64,
}

impl TokenBudget {
    pub const DEFAULT_CONTEXT: u64 = 1_000_000;
    pub const DEFAULT_OUTPUT: u64 = 8_000;

    pub fn new(max_context_tokens: u64, max_output_tokens: u64) -> Result<Self, ExtractionError> {
        if max_context_tokens == 0 || max_output_tokens == 0 {
            return Err(ExtractionError::InvalidBudget(
                "token limits must be positive".into(),
            ));
        }
        if max_output_tokens > max_context_tokens {
            return Err(ExtractionError::InvalidBudget(format!(
                "output limit {max_output_tokens} exceeds context limit {max_context_tokens}"
            )));
        }
        Ok(Self {
            max_context_tokens,
            max_output_tokens,
        })
    }

    pub fn max_context_tokens(&self) -> u64 {
        self.max_context_tokens
    }

    pub fn max_output_tokens(&self) -> u64 {
        self.max_output_tokens
    }
}

impl Default for TokenBudget {
    fn default() -> Self {
        Self {
            max_context_tokens: Self::DEFAULT_CONTEXT,
            max_output_tokens: Self::DEFAULT_OUTPUT,
        }
    }
}

/// Estimates the token count of a text. Swap in an exact tokenizer by
/// implementing this trait.
pub trait TokenEstimator: Send + Sync {
    fn estimate(&self, text: &str) -> u64;
}

/// `ceil(words × numerator / denominator)`; the default ratio is 3.2 tokens
/// per whitespace-separated word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordRatioEstimator {
    numerator: u64,
    denominator: u64,
}

impl WordRatioEstimator {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "ratio denominator must be positive");
        Self {
            numerator,
            denominator,
        }
    }

    pub fn tokens_for_words(&self, words: u64) -> u64 {
        (words * self.numerator).div_ceil(self.denominator)
    }
}

impl Default for WordRatioEstimator {
    fn default() -> Self {
        Self::new(32, 10)
    }
}

impl TokenEstimator for WordRatioEstimator {
    fn estimate(&self, text: &str) -> u64 {
        self.tokens_for_words(text.split_whitespace().count() as u64)
    }
}

/// Default estimate: 3.2 tokens per word, rounded up.
pub fn estimate_tokens(text: &str) -> u64 {
    WordRatioEstimator::default().estimate(text)
}

/// Inclusive check of a full request size against the context window.
pub fn check_budget(tokens: u64, budget: &TokenBudget) -> Result<(), ExtractionError> {
    if tokens > budget.max_context_tokens {
        Err(ExtractionError::TooLong {
            tokens,
            limit: budget.max_context_tokens,
        })
    } else {
        Ok(())
    }
}

/// A successful extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub network: CharacterNetwork,
    pub malformed_records_dropped: usize,
    pub duplicate_records_dropped: usize,
    /// The model hit its output limit; the network may be incomplete.
    pub truncated: bool,
}

/// Runs the prompt → model → parse → repair → dedupe chain for volumes.
pub struct Extractor<C> {
    client: C,
    budget: TokenBudget,
    estimator: Box<dyn TokenEstimator>,
    prompt_overhead: u64,
    schema: serde_json::Value,
}

impl<C: StructuredClient> Extractor<C> {
    pub fn new(client: C) -> Self {
        Self::with_estimator(client, Box::new(WordRatioEstimator::default()))
    }

    pub fn with_estimator(client: C, estimator: Box<dyn TokenEstimator>) -> Self {
        let prompt_overhead = estimator.estimate(&prompt::prompt_template());
        Self {
            client,
            budget: TokenBudget::default(),
            estimator,
            prompt_overhead,
            schema: response_schema(),
        }
    }

    pub fn budget(mut self, budget: TokenBudget) -> Self {
        self.budget = budget;
        self
    }

    /// Estimated tokens of the fixed template and schema.
    pub fn prompt_overhead(&self) -> u64 {
        self.prompt_overhead
    }

    pub fn extract(&self, volume_id: &str, text: &str) -> Result<Extraction, ExtractionError> {
        let prompt = build_prompt(text)?;
        check_budget(
            self.estimator.estimate(text) + self.prompt_overhead,
            &self.budget,
        )?;

        let request = ModelRequest {
            volume_id,
            prompt: &prompt,
            schema: &self.schema,
            max_output_tokens: self.budget.max_output_tokens,
        };
        // one retry on transport failure
        let response = match self.submit(&request) {
            Err(ExtractionError::TransportFailure(_)) => self.submit(&request)?,
            other => other?,
        };

        let truncated = response.finish_reason == FinishReason::OutputLimit;
        let parsed = parse_model_output(&response.text)?;
        let network = CharacterNetwork::new(
            volume_id,
            parsed.records.into_iter().map(repair).collect(),
        );
        let (network, duplicate_records_dropped) = dedupe_network(network);
        Ok(Extraction {
            network,
            malformed_records_dropped: parsed.malformed_records_dropped,
            duplicate_records_dropped,
            truncated,
        })
    }

    fn submit(&self, request: &ModelRequest<'_>) -> Result<ModelResponse, ExtractionError> {
        let response = self
            .client
            .submit(request)
            .map_err(ExtractionError::TransportFailure)?;
        match response.finish_reason {
            FinishReason::ContentFilter => Err(ExtractionError::ContentFiltered),
            FinishReason::Error => Err(ExtractionError::TransportFailure(if response
                .text
                .is_empty()
            {
                "backend reported an error".to_string()
            } else {
                response.text
            })),
            FinishReason::Completed | FinishReason::OutputLimit => Ok(response),
        }
    }
}

/// One-shot form of [`Extractor::extract`] with the default estimator.
pub fn extract_network<C: StructuredClient>(
    volume_id: &str,
    text: &str,
    client: C,
    budget: TokenBudget,
) -> Result<Extraction, ExtractionError> {
    Extractor::new(client).budget(budget).extract(volume_id, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::CoarseCategory;
    use proptest::prelude::*;

    fn completed(text: &str) -> ScriptedReply {
        ScriptedReply::Completed {
            response: text.to_string(),
        }
    }

    #[test]
    fn estimate_examples() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("a b c d e f g h i j"), 32);
        let longest = WordRatioEstimator::default().tokens_for_words(4_233_776);
        assert_eq!(longest, 13_548_084);
        let rel = (longest as f64 - 13_551_565.0).abs() / 13_551_565.0;
        assert!(rel < 0.001);
    }

    #[test]
    fn budget_examples() {
        let budget = TokenBudget::default();
        let mean_volume = WordRatioEstimator::default().tokens_for_words(63_656);
        assert_eq!(mean_volume, 203_700);
        assert!(check_budget(mean_volume, &budget).is_ok());
        assert_eq!(
            check_budget(13_548_084, &budget),
            Err(ExtractionError::TooLong {
                tokens: 13_548_084,
                limit: 1_000_000
            })
        );
        assert!(check_budget(1_000_000, &budget).is_ok());
        assert!(check_budget(1_000_001, &budget).is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(TokenBudget::new(0, 0).is_err());
        assert!(TokenBudget::new(10, 11).is_err());
        assert!(TokenBudget::new(10, 10).is_ok());
    }

    #[test]
    fn extracts_example_network() {
        let client = MockClient::new().with_reply("dq", completed(prompt::example_output()));
        let out = extract_network("dq", "En un lugar de la Mancha", &client, TokenBudget::default())
            .unwrap();
        assert_eq!(out.network.records.len(), 12);
        assert!(!out.truncated);
        assert_eq!(out.malformed_records_dropped, 0);
        // repaired on the way in
        assert!(out.network.records.iter().all(|r| r.is_consistent()));
        let rocinante = &out.network.records[1];
        assert_eq!(rocinante.coarse_category, CoarseCategory::Social);
    }

    #[test]
    fn salvages_bad_record() {
        let raw = prompt::example_output().replacen("\"positive\"", "\"maybe\"", 1);
        let client = MockClient::new().with_reply("dq", completed(&raw));
        let out = extract_network("dq", "text", &client, TokenBudget::default()).unwrap();
        assert_eq!(out.network.records.len(), 11);
        assert_eq!(out.malformed_records_dropped, 1);
    }

    #[test]
    fn content_filter_is_typed() {
        let client = MockClient::new().with_reply("v", ScriptedReply::ContentFilter);
        assert_eq!(
            extract_network("v", "text", &client, TokenBudget::default()),
            Err(ExtractionError::ContentFiltered)
        );
    }

    #[test]
    fn output_limit_marks_truncated() {
        let full = prompt::example_output();
        let cut = &full[..full.len() / 2];
        let client = MockClient::new().with_reply(
            "v",
            ScriptedReply::OutputLimit {
                response: cut.to_string(),
            },
        );
        let out = extract_network("v", "text", &client, TokenBudget::default()).unwrap();
        assert!(out.truncated);
        assert!(!out.network.records.is_empty());
        assert!(out.network.records.len() < 12);
    }

    #[test]
    fn transport_failure_retried_once() {
        let flaky = MockClient::new()
            .with_reply("v", ScriptedReply::TransportError { detail: "reset".into() })
            .with_reply("v", completed("[]"));
        assert!(extract_network("v", "text", &flaky, TokenBudget::default()).is_ok());

        let dead = MockClient::new()
            .with_reply("v", ScriptedReply::TransportError { detail: "a".into() })
            .with_reply("v", ScriptedReply::TransportError { detail: "b".into() })
            .with_reply("v", completed("[]"));
        assert_eq!(
            extract_network("v", "text", &dead, TokenBudget::default()),
            Err(ExtractionError::TransportFailure("b".into()))
        );
    }

    #[test]
    fn content_filter_not_retried() {
        let client = MockClient::new()
            .with_reply("v", ScriptedReply::ContentFilter)
            .with_reply("v", completed("[]"));
        assert_eq!(
            extract_network("v", "text", &client, TokenBudget::default()),
            Err(ExtractionError::ContentFiltered)
        );
    }

    #[test]
    fn too_long_before_calling_backend() {
        let client = MockClient::new();
        let budget = TokenBudget::new(2_000, 100).unwrap();
        let text = "word ".repeat(1_000);
        let err = extract_network("v", &text, &client, budget).unwrap_err();
        assert!(matches!(err, ExtractionError::TooLong { limit: 2_000, .. }));
    }

    #[test]
    fn overhead_counts_against_budget() {
        let extractor = Extractor::new(MockClient::new().with_reply("v", completed("[]")));
        let overhead = extractor.prompt_overhead();
        assert!(overhead > 1000);
        let exact = TokenBudget::new(overhead + 32, 10).unwrap();
        let extractor = extractor.budget(exact);
        assert!(extractor.extract("v", "a b c d e f g h i j").is_ok());
        let extractor = extractor.budget(TokenBudget::new(overhead + 31, 10).unwrap());
        assert!(extractor.extract("v", "a b c d e f g h i j").is_err());
    }

    proptest! {
        #[test]
        fn estimate_monotone(a in 0u64..100_000, b in 0u64..100_000) {
            let est = WordRatioEstimator::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(est.tokens_for_words(lo) <= est.tokens_for_words(hi));
        }

        #[test]
        fn truncated_iff_output_limit(limit in any::<bool>()) {
            let body = prompt::example_output().to_string();
            let reply = if limit {
                ScriptedReply::OutputLimit { response: body }
            } else {
                ScriptedReply::Completed { response: body }
            };
            let client = MockClient::new().with_reply("v", reply);
            let out = extract_network("v", "t", &client, TokenBudget::default()).unwrap();
            prop_assert_eq!(out.truncated, limit);
        }
    }
}
