//! Title/author record linkage against a metadata catalog.
//!
//! A volume matches a catalog entry only when both the normalized title and
//! the normalized author similarity strictly exceed the threshold (0.8 by
//! default). Similarity is `1 - levenshtein / max_len` over characters.

use serde::{Deserialize, Serialize};

pub const DEFAULT_THRESHOLD: f64 = 0.8;

/// Catalog metadata for one volume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeMetadata {
    pub volume_id: String,
    pub title: String,
    pub author: String,
    pub language: String,
    pub year: Option<i32>,
    pub is_fiction: Option<bool>,
}

impl VolumeMetadata {
    pub fn decade(&self) -> Option<i32> {
        self.year.map(|y| y.div_euclid(10) * 10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchCandidate {
    pub catalog_index: usize,
    pub catalog_id: String,
    pub title_similarity: f64,
    pub author_similarity: f64,
}

impl MatchCandidate {
    pub fn score(&self) -> f64 {
        self.title_similarity + self.author_similarity
    }
}

/// Edit distance over Unicode scalar values (insert, delete, substitute).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0; short.len() + 1];
    for (i, lc) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, sc) in short.iter().enumerate() {
            let substitute = prev[j] + usize::from(lc != sc);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// Case-folds, collapses whitespace and strips leading/trailing punctuation.
pub fn normalize(s: &str) -> String {
    let collapsed = s
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ");
    collapsed
        .trim_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
        .to_string()
}

/// Similarity of two already-normalized strings.
fn raw_similarity(a: &[char], b: &[char]) -> f64 {
    let len = a.len().max(b.len());
    if len == 0 {
        return 1.0;
    }
    let d = levenshtein_chars(a, b);
    (len - d) as f64 / len as f64
}

/// `1 - levenshtein(a, b) / max(|a|, |b|)` after [`normalize`]; 1 when both
/// are empty.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = normalize(a).chars().collect();
    let b: Vec<char> = normalize(b).chars().collect();
    raw_similarity(&a, &b)
}

/// Upper bound on similarity from lengths alone.
fn length_bound(a: usize, b: usize) -> f64 {
    let len = a.max(b);
    if len == 0 {
        1.0
    } else {
        (len - a.abs_diff(b)) as f64 / len as f64
    }
}

/// Normalized title/author characters, computed once per side.
struct Prepared {
    title: Vec<char>,
    author: Vec<char>,
}

impl Prepared {
    fn new(v: &VolumeMetadata) -> Self {
        Self {
            title: normalize(&v.title).chars().collect(),
            author: normalize(&v.author).chars().collect(),
        }
    }
}

/// Catalog prepared for repeated matching.
pub struct Catalog<'a> {
    entries: &'a [VolumeMetadata],
    prepared: Vec<Prepared>,
}

impl<'a> Catalog<'a> {
    pub fn new(entries: &'a [VolumeMetadata]) -> Self {
        Self {
            entries,
            prepared: entries.iter().map(Prepared::new).collect(),
        }
    }

    pub fn entries(&self) -> &'a [VolumeMetadata] {
        self.entries
    }

    /// The entry maximizing title + author similarity among those strictly
    /// above `threshold` on both; ties go to the lowest index.
    pub fn best_match(&self, volume: &VolumeMetadata, threshold: f64) -> Option<MatchCandidate> {
        let query = Prepared::new(volume);
        let mut best: Option<MatchCandidate> = None;
        for (index, entry) in self.prepared.iter().enumerate() {
            // similarity ≤ length bound, so entries failing the bound cannot pass
            if length_bound(query.title.len(), entry.title.len()) <= threshold
                || length_bound(query.author.len(), entry.author.len()) <= threshold
            {
                continue;
            }
            let title_similarity = raw_similarity(&query.title, &entry.title);
            if title_similarity <= threshold {
                continue;
            }
            let author_similarity = raw_similarity(&query.author, &entry.author);
            if author_similarity <= threshold {
                continue;
            }
            let candidate = MatchCandidate {
                catalog_index: index,
                catalog_id: self.entries[index].volume_id.clone(),
                title_similarity,
                author_similarity,
            };
            if best.as_ref().is_none_or(|b| candidate.score() > b.score()) {
                best = Some(candidate);
            }
        }
        best
    }
}

/// Single-shot form of [`Catalog::best_match`] at the default threshold.
pub fn best_match(volume: &VolumeMetadata, catalog: &[VolumeMetadata]) -> Option<MatchCandidate> {
    Catalog::new(catalog).best_match(volume, DEFAULT_THRESHOLD)
}

/// Matches every volume against the catalog in parallel; output order
/// follows `volumes`.
pub fn align_all(
    volumes: &[VolumeMetadata],
    catalog: &[VolumeMetadata],
    threshold: f64,
) -> Vec<Option<MatchCandidate>> {
    use rayon::prelude::*;
    let catalog = Catalog::new(catalog);
    volumes
        .par_iter()
        .map(|v| catalog.best_match(v, threshold))
        .collect()
}
