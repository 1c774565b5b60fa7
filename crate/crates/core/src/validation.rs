//! Scoring predicted annotations against gold annotations.
//!
//! Records are paired by canonical character pair, then each attribute is
//! scored over the matched pairs only. Labels are compared as stored; no
//! coarse repair happens here.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::alignment::{similarity, DEFAULT_THRESHOLD};
use crate::taxonomy::{CharacterNetwork, PairKey, RelationshipRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("no matched pairs to score")]
    NoMatches,
    #[error("gold and predicted corpora share no volume_id")]
    NoSharedVolumes,
}

/// A scored annotation attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Affinity,
    CoarseCategory,
    FineCategory,
}

impl Attribute {
    pub const ALL: [Attribute; 3] = [
        Attribute::Affinity,
        Attribute::CoarseCategory,
        Attribute::FineCategory,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Affinity => "affinity",
            Attribute::CoarseCategory => "coarse_category",
            Attribute::FineCategory => "fine_category",
        }
    }

    pub fn value(self, record: &RelationshipRecord) -> &'static str {
        match self {
            Attribute::Affinity => record.affinity.as_str(),
            Attribute::CoarseCategory => record.coarse_category.as_str(),
            Attribute::FineCategory => record.fine_category.as_str(),
        }
    }
}

/// A gold record and the prediction it was paired with.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub gold: RelationshipRecord,
    pub pred: RelationshipRecord,
    /// Paired by name similarity rather than an equal pair key.
    pub fuzzy: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairAlignment {
    pub matched: Vec<MatchedPair>,
    pub unmatched_gold: usize,
    pub unmatched_pred: usize,
}

fn keyed(records: &[RelationshipRecord]) -> Vec<Option<PairKey>> {
    records.iter().map(|r| r.pair_key().ok()).collect()
}

/// Best orientation score of two name pairs, if both names clear the
/// threshold in that orientation.
fn fuzzy_score(gold: &RelationshipRecord, pred: &RelationshipRecord) -> Option<f64> {
    let orient = |a: &str, b: &str| {
        let s1 = similarity(&gold.character_1, a);
        let s2 = similarity(&gold.character_2, b);
        (s1 > DEFAULT_THRESHOLD && s2 > DEFAULT_THRESHOLD).then_some(s1 + s2)
    };
    let straight = orient(&pred.character_1, &pred.character_2);
    let swapped = orient(&pred.character_2, &pred.character_1);
    match (straight, swapped) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    }
}

/// Pairs gold and predicted records by canonical pair key, optionally
/// falling back to greedy fuzzy matching of the leftovers.
pub fn align_pairs(gold: &CharacterNetwork, pred: &CharacterNetwork, fuzzy: bool) -> PairAlignment {
    let gold_keys = keyed(&gold.records);
    let pred_keys = keyed(&pred.records);
    let mut pred_index: HashMap<&PairKey, usize> = HashMap::new();
    for (i, key) in pred_keys.iter().enumerate() {
        if let Some(key) = key {
            pred_index.entry(key).or_insert(i);
        }
    }

    let mut gold_used = vec![false; gold.records.len()];
    let mut pred_used = vec![false; pred.records.len()];
    let mut matched = Vec::new();
    for (gi, key) in gold_keys.iter().enumerate() {
        let Some(pi) = key.as_ref().and_then(|k| pred_index.get(k)).copied() else {
            continue;
        };
        if pred_used[pi] {
            continue;
        }
        gold_used[gi] = true;
        pred_used[pi] = true;
        matched.push(MatchedPair {
            gold: gold.records[gi].clone(),
            pred: pred.records[pi].clone(),
            fuzzy: false,
        });
    }

    if fuzzy {
        let mut candidates = Vec::new();
        for (gi, g) in gold.records.iter().enumerate().filter(|(i, _)| !gold_used[*i]) {
            for (pi, p) in pred.records.iter().enumerate().filter(|(i, _)| !pred_used[*i]) {
                if let Some(score) = fuzzy_score(g, p) {
                    candidates.push((score, gi, pi));
                }
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        for (_, gi, pi) in candidates {
            if gold_used[gi] || pred_used[pi] {
                continue;
            }
            gold_used[gi] = true;
            pred_used[pi] = true;
            matched.push(MatchedPair {
                gold: gold.records[gi].clone(),
                pred: pred.records[pi].clone(),
                fuzzy: true,
            });
        }
    }

    PairAlignment {
        unmatched_gold: gold_used.iter().filter(|u| !**u).count(),
        unmatched_pred: pred_used.iter().filter(|u| !**u).count(),
        matched,
    }
}

fn correct_count(pairs: &[MatchedPair], attribute: Attribute) -> usize {
    pairs
        .iter()
        .filter(|p| attribute.value(&p.gold) == attribute.value(&p.pred))
        .count()
}

/// Fraction of matched pairs agreeing on `attribute`.
pub fn attribute_accuracy(pairs: &[MatchedPair], attribute: Attribute) -> Result<f64, ValidationError> {
    if pairs.is_empty() {
        return Err(ValidationError::NoMatches);
    }
    Ok(correct_count(pairs, attribute) as f64 / pairs.len() as f64)
}

/// Cohen's kappa between gold and predicted labels; 1 when observed
/// agreement is perfect.
pub fn cohen_kappa(pairs: &[MatchedPair], attribute: Attribute) -> Result<f64, ValidationError> {
    let n = pairs.len();
    if n == 0 {
        return Err(ValidationError::NoMatches);
    }
    let correct = correct_count(pairs, attribute);
    if correct == n {
        return Ok(1.0);
    }
    let mut marginals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for p in pairs {
        marginals.entry(attribute.value(&p.gold)).or_default().0 += 1;
        marginals.entry(attribute.value(&p.pred)).or_default().1 += 1;
    }
    let n = n as f64;
    let po = correct as f64 / n;
    let pe: f64 = marginals
        .values()
        .map(|(g, p)| (*g as f64 / n) * (*p as f64 / n))
        .sum();
    Ok((po - pe) / (1.0 - pe))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeReport {
    pub attribute: Attribute,
    pub matched: usize,
    pub correct: usize,
    /// Absent when nothing matched.
    pub accuracy: Option<f64>,
    pub kappa: Option<f64>,
    pub unmatched_gold: usize,
    pub unmatched_pred: usize,
}

/// Per-attribute scores for one volume, or pooled over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub volume_id: String,
    pub attributes: Vec<AttributeReport>,
}

impl AccuracyReport {
    pub fn get(&self, attribute: Attribute) -> &AttributeReport {
        self.attributes
            .iter()
            .find(|a| a.attribute == attribute)
            .expect("every report carries all attributes")
    }
}

fn report(volume_id: &str, alignment: &PairAlignment) -> AccuracyReport {
    let pairs = &alignment.matched;
    let attributes = Attribute::ALL
        .iter()
        .map(|&attribute| AttributeReport {
            attribute,
            matched: pairs.len(),
            correct: correct_count(pairs, attribute),
            accuracy: attribute_accuracy(pairs, attribute).ok(),
            kappa: cohen_kappa(pairs, attribute).ok(),
            unmatched_gold: alignment.unmatched_gold,
            unmatched_pred: alignment.unmatched_pred,
        })
        .collect();
    AccuracyReport {
        volume_id: volume_id.to_string(),
        attributes,
    }
}

/// Scores one predicted network against its gold counterpart.
pub fn score_network(gold: &CharacterNetwork, pred: &CharacterNetwork, fuzzy: bool) -> AccuracyReport {
    report(&gold.volume_id, &align_pairs(gold, pred, fuzzy))
}

/// Volume id used for the pooled row.
pub const AGGREGATE_ID: &str = "ALL";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    /// In gold order, shared volumes only.
    pub per_volume: Vec<AccuracyReport>,
    /// Matched pairs pooled across all shared volumes.
    pub aggregate: AccuracyReport,
    pub gold_only_volumes: usize,
    pub pred_only_volumes: usize,
}

/// Scores every volume present in both corpora and pools the matched pairs.
pub fn score_corpus(
    gold: &[CharacterNetwork],
    pred: &[CharacterNetwork],
    fuzzy: bool,
) -> Result<CorpusReport, ValidationError> {
    let mut pred_by_id: HashMap<&str, &CharacterNetwork> = HashMap::new();
    for p in pred {
        pred_by_id.entry(p.volume_id.as_str()).or_insert(p);
    }
    let shared: Vec<(&CharacterNetwork, &CharacterNetwork)> = gold
        .iter()
        .filter_map(|g| pred_by_id.get(g.volume_id.as_str()).map(|p| (g, *p)))
        .collect();
    if shared.is_empty() {
        return Err(ValidationError::NoSharedVolumes);
    }
    let alignments: Vec<PairAlignment> = shared
        .par_iter()
        .map(|(g, p)| align_pairs(g, p, fuzzy))
        .collect();

    let mut pooled = PairAlignment::default();
    let mut per_volume = Vec::with_capacity(shared.len());
    for ((g, _), a) in shared.iter().zip(&alignments) {
        per_volume.push(report(&g.volume_id, a));
        pooled.matched.extend(a.matched.iter().cloned());
        pooled.unmatched_gold += a.unmatched_gold;
        pooled.unmatched_pred += a.unmatched_pred;
    }
    let shared_ids: std::collections::HashSet<&str> =
        shared.iter().map(|(g, _)| g.volume_id.as_str()).collect();
    Ok(CorpusReport {
        per_volume,
        aggregate: report(AGGREGATE_ID, &pooled),
        gold_only_volumes: gold.len() - shared.len(),
        pred_only_volumes: pred
            .iter()
            .filter(|p| !shared_ids.contains(p.volume_id.as_str()))
            .count(),
    })
}
