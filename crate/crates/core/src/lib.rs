//! Character-relationship networks from narrative texts.
//!
//! The crate covers the whole pipeline, one module per stage:
//!
//! - [`taxonomy`]: the affinity / coarse / fine label system, record parsing,
//!   coarse-label repair and pair/network deduplication.
//! - [`extraction`]: prompt construction, token budgets, the structured-output
//!   client interface (mock and HTTP backends) and tolerant output parsing.
//! - [`alignment`]: Levenshtein similarity matching of volumes against a
//!   metadata catalog.
//! - [`graph`]: typed multigraphs, simple projections and per-category subgraphs.
//! - [`metrics`]: components, transitivity, degrees, betweenness, eigenvector
//!   centrality, star edit distance, protagonism, mediatedness, proportions.
//! - [`community`]: modularity and deterministic Louvain.
//! - [`stats`]: Welch's t-test, Pearson correlation, incomplete beta,
//!   fiction/nonfiction comparisons and decade trends.
//! - [`validation`]: per-attribute accuracy and Cohen's kappa against gold
//!   annotations.
//! - [`pipeline`]: file-based `extract`, `clean`, `analyze`, `validate` and
//!   `align` workflows used by the `narrative-net` binary.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod alignment;
pub mod community;
pub mod config;
pub mod extraction;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod stats;
pub mod svg;
pub mod taxonomy;
pub mod validation;

pub use community::{louvain, modularity, Partition};
pub use extraction::{build_prompt, output_schema, Extraction, ExtractionError, TokenBudget};
pub use graph::{build_graph, SimpleGraph, TypedMultigraph};
pub use metrics::{compute_metrics, NetworkMetrics};
pub use taxonomy::{
    Affinity, CharacterNetwork, CoarseCategory, FineCategory, RelationshipRecord, TaxonomyError,
};
