//! Relationship label system, record validation, coarse-label repair and
//! deduplication.
//!
//! Every relationship carries three labels: an [`Affinity`] (valence), a
//! [`CoarseCategory`] and a [`FineCategory`]. Each fine label belongs to
//! exactly one coarse category, so the coarse label is redundant and
//! [`repair`] recomputes it from the fine label.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// The five record field names, in schema order.
pub const RECORD_FIELDS: [&str; 5] = [
    "character_1",
    "character_2",
    "affinity",
    "coarse_category",
    "fine_category",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("invalid value {value:?} for field `{field}`")]
    InvalidEnum { field: &'static str, value: String },
    #[error("character name is empty")]
    EmptyName,
    #[error("field `{0}` is not a string")]
    NotAString(&'static str),
    #[error("record is not a JSON object")]
    NotAnObject,
}

/// Returned by the label `FromStr` impls; carries the rejected input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?}")]
pub struct UnknownLabel(pub String);

macro_rules! label_enum {
    (
        $(#[$meta:meta])*
        $name:ident { $($variant:ident => $text:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownLabel;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(UnknownLabel(other.to_string())),
                }
            }
        }
    };
}

label_enum! {
    /// How the two characters feel toward each other.
    Affinity {
        Positive => "positive",
        Negative => "negative",
        Neutral => "neutral",
    }
}

label_enum! {
    /// Broad relationship class.
    CoarseCategory {
        Social => "social",
        Professional => "professional",
        Familial => "familial",
    }
}

label_enum! {
    /// Specific relationship label. Declaration order follows the schema
    /// enumeration: 6 social, 9 professional, 19 familial labels.
    FineCategory {
        Friend => "friend",
        Enemy => "enemy",
        Acquaintance => "acquaintance",
        Lovers => "lovers",
        UnrequitedLoveInterest => "unrequited love interest",
        Rivals => "rivals",
        Employer => "employer",
        Employee => "employee",
        Colleague => "colleague",
        Servant => "servant",
        Master => "master",
        Student => "student",
        Teacher => "teacher",
        Client => "client",
        ServiceProvider => "person offering service to client",
        Husband => "husband",
        Wife => "wife",
        Brother => "brother",
        Sister => "sister",
        Cousin => "cousin",
        Uncle => "uncle",
        Aunt => "aunt",
        Niece => "niece",
        Nephew => "nephew",
        Child => "child",
        Parent => "parent",
        Grandchild => "grandchild",
        Grandparent => "grandparent",
        Orphan => "orphan",
        FosterParent => "foster parent",
        StepChild => "step-child",
        StepParent => "step-parent",
        InLawRelation => "in-law relation",
        HalfRelation => "half relation",
    }
}

impl FineCategory {
    /// The coarse category this label belongs to.
    pub fn coarse(self) -> CoarseCategory {
        use FineCategory::*;
        match self {
            Friend | Enemy | Acquaintance | Lovers | UnrequitedLoveInterest | Rivals => {
                CoarseCategory::Social
            }
            Employer | Employee | Colleague | Servant | Master | Student | Teacher | Client
            | ServiceProvider => CoarseCategory::Professional,
            Husband | Wife | Brother | Sister | Cousin | Uncle | Aunt | Niece | Nephew | Child
            | Parent | Grandchild | Grandparent | Orphan | FosterParent | StepChild
            | StepParent | InLawRelation | HalfRelation => CoarseCategory::Familial,
        }
    }
}

/// Free-function form of [`FineCategory::coarse`].
pub fn coarse_of(fine: FineCategory) -> CoarseCategory {
    fine.coarse()
}

/// One annotated character pair. Field names match the output schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationshipRecord {
    pub character_1: String,
    pub character_2: String,
    pub affinity: Affinity,
    pub coarse_category: CoarseCategory,
    pub fine_category: FineCategory,
}

impl RelationshipRecord {
    pub fn new(
        character_1: impl Into<String>,
        character_2: impl Into<String>,
        affinity: Affinity,
        fine_category: FineCategory,
    ) -> Self {
        Self {
            character_1: character_1.into(),
            character_2: character_2.into(),
            affinity,
            coarse_category: fine_category.coarse(),
            fine_category,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.coarse_category == self.fine_category.coarse()
    }

    pub fn pair_key(&self) -> Result<PairKey, TaxonomyError> {
        canonical_pair(&self.character_1, &self.character_2)
    }
}

/// All relationships extracted from one volume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterNetwork {
    pub volume_id: String,
    pub records: Vec<RelationshipRecord>,
}

impl CharacterNetwork {
    pub fn new(volume_id: impl Into<String>, records: Vec<RelationshipRecord>) -> Self {
        Self {
            volume_id: volume_id.into(),
            records,
        }
    }
}

fn parse_label<T: FromStr>(field: &'static str, raw: &str) -> Result<T, TaxonomyError> {
    raw.parse().map_err(|_| TaxonomyError::InvalidEnum {
        field,
        value: raw.to_string(),
    })
}

fn parse_name(raw: &str) -> Result<String, TaxonomyError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        Err(TaxonomyError::EmptyName)
    } else {
        Ok(trimmed.to_string())
    }
}

fn parse_fields<'a>(
    mut get: impl FnMut(&'static str) -> Result<&'a str, TaxonomyError>,
) -> Result<RelationshipRecord, TaxonomyError> {
    let character_1 = get("character_1")?;
    let character_2 = get("character_2")?;
    let affinity = get("affinity")?;
    let coarse = get("coarse_category")?;
    let fine = get("fine_category")?;
    Ok(RelationshipRecord {
        character_1: parse_name(character_1)?,
        character_2: parse_name(character_2)?,
        affinity: parse_label("affinity", affinity)?,
        coarse_category: parse_label("coarse_category", coarse)?,
        fine_category: parse_label("fine_category", fine)?,
    })
}

/// Validates a raw string field map against the record schema.
///
/// Field presence is checked before values, in schema order. Labels must
/// match the schema enumerations exactly; names are trimmed. Coarse labels
/// are not repaired here.
pub fn parse_record<S: std::hash::BuildHasher>(
    raw: &HashMap<String, String, S>,
) -> Result<RelationshipRecord, TaxonomyError> {
    for field in RECORD_FIELDS {
        if !raw.contains_key(field) {
            return Err(missing(field));
        }
    }
    parse_fields(|field| Ok(raw[field].as_str()))
}

/// [`parse_record`] over a JSON value, as produced by the model or read from
/// a networks file. Extra keys are ignored.
pub fn parse_json_record(value: &Value) -> Result<RelationshipRecord, TaxonomyError> {
    let obj = value.as_object().ok_or(TaxonomyError::NotAnObject)?;
    for field in RECORD_FIELDS {
        if !obj.contains_key(field) {
            return Err(missing(field));
        }
    }
    parse_fields(|field| match &obj[field] {
        Value::String(s) => Ok(s.as_str()),
        _ => Err(TaxonomyError::NotAString(field)),
    })
}

fn missing(field: &str) -> TaxonomyError {
    let name = RECORD_FIELDS
        .iter()
        .find(|f| **f == field)
        .copied()
        .unwrap_or("unknown");
    TaxonomyError::MissingField(name)
}

/// Replaces the coarse label with the one implied by the fine label.
pub fn repair(record: RelationshipRecord) -> RelationshipRecord {
    RelationshipRecord {
        coarse_category: record.fine_category.coarse(),
        ..record
    }
}

/// Lowercases and collapses internal whitespace.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Order-insensitive key for a character pair. The smaller normalized name
/// comes first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairKey {
    pub first: String,
    pub second: String,
}

impl PairKey {
    pub fn is_self_pair(&self) -> bool {
        self.first == self.second
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -- {}", self.first, self.second)
    }
}

pub fn canonical_pair(c1: &str, c2: &str) -> Result<PairKey, TaxonomyError> {
    let a = normalize_name(c1);
    let b = normalize_name(c2);
    if a.is_empty() || b.is_empty() {
        return Err(TaxonomyError::EmptyName);
    }
    let (first, second) = if a <= b { (a, b) } else { (b, a) };
    Ok(PairKey { first, second })
}

/// Keeps the first record for each unordered pair. Self-pairs and records
/// with blank names are dropped too; all drops are counted.
pub fn dedupe_network(net: CharacterNetwork) -> (CharacterNetwork, usize) {
    let mut seen = HashSet::new();
    let mut dropped = 0;
    let mut records = Vec::with_capacity(net.records.len());
    for record in net.records {
        let keep = match record.pair_key() {
            Ok(key) => !key.is_self_pair() && seen.insert(key),
            Err(_) => false,
        };
        if keep {
            records.push(record);
        } else {
            dropped += 1;
        }
    }
    (
        CharacterNetwork {
            volume_id: net.volume_id,
            records,
        },
        dropped,
    )
}

type RelationshipSet = Vec<(PairKey, Affinity, FineCategory)>;

/// The identity used to detect duplicate networks: the sorted set of
/// (pair, affinity, fine label) triples. Volume ids and record order do not
/// participate.
pub fn relationship_set(net: &CharacterNetwork) -> RelationshipSet {
    let mut set: Vec<_> = net
        .records
        .iter()
        .filter_map(|r| r.pair_key().ok().map(|k| (k, r.affinity, r.fine_category)))
        .collect();
    set.sort();
    set.dedup();
    set
}

/// Collapses networks with identical relationship sets to their first
/// occurrence, preserving input order.
pub fn dedupe_corpus(nets: Vec<CharacterNetwork>) -> Vec<CharacterNetwork> {
    let mut seen = HashSet::new();
    nets.into_iter()
        .filter(|net| seen.insert(relationship_set(net)))
        .collect()
}

/// Fiber sizes of [`coarse_of`] over all fine labels.
pub fn coarse_fiber_sizes() -> BTreeMap<CoarseCategory, usize> {
    let mut sizes = BTreeMap::new();
    for fine in FineCategory::ALL {
        *sizes.entry(fine.coarse()).or_insert(0) += 1;
    }
    sizes
}
