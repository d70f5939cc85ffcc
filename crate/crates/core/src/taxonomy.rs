//! The fourteen CRediT contributor roles and their keyword / example profiles.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::embed::EmbeddingVector;
use crate::error::{Error, Result};

/// Bundled default configuration (keywords plus five curated example phrases per role).
pub const DEFAULT_TAXONOMY_JSON: &str = include_str!("../data/taxonomy.json");

pub const MIN_EXAMPLES: usize = 5;
pub const MAX_EXAMPLES: usize = 15;

/// A CRediT contributor role. Declaration order is the fixed ordinal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CreditCategory {
    WritingReviewEditing,
    Methodology,
    Investigation,
    Conceptualization,
    FormalAnalysis,
    DataCuration,
    WritingOriginalDraft,
    Supervision,
    Validation,
    ProjectAdministration,
    Resources,
    FundingAcquisition,
    Visualization,
    Software,
}

impl CreditCategory {
    pub const COUNT: usize = 14;

    pub const ALL: [CreditCategory; 14] = [
        CreditCategory::WritingReviewEditing,
        CreditCategory::Methodology,
        CreditCategory::Investigation,
        CreditCategory::Conceptualization,
        CreditCategory::FormalAnalysis,
        CreditCategory::DataCuration,
        CreditCategory::WritingOriginalDraft,
        CreditCategory::Supervision,
        CreditCategory::Validation,
        CreditCategory::ProjectAdministration,
        CreditCategory::Resources,
        CreditCategory::FundingAcquisition,
        CreditCategory::Visualization,
        CreditCategory::Software,
    ];

    /// 1-based position in the fixed order.
    pub fn ordinal(self) -> usize {
        self.index() + 1
    }

    /// 0-based position, convenient for indexing label vectors.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            CreditCategory::WritingReviewEditing => "writing – review editing",
            CreditCategory::Methodology => "methodology",
            CreditCategory::Investigation => "investigation",
            CreditCategory::Conceptualization => "conceptualization",
            CreditCategory::FormalAnalysis => "formal analysis",
            CreditCategory::DataCuration => "data curation",
            CreditCategory::WritingOriginalDraft => "writing – original draft",
            CreditCategory::Supervision => "supervision",
            CreditCategory::Validation => "validation",
            CreditCategory::ProjectAdministration => "project administration",
            CreditCategory::Resources => "resources",
            CreditCategory::FundingAcquisition => "funding acquisition",
            CreditCategory::Visualization => "visualization",
            CreditCategory::Software => "software",
        }
    }
}

/// Letters and digits only, lowercased. "Writing - Review & Editing" and
/// "writing – review editing" share a key.
fn category_key(s: &str) -> String {
    s.to_lowercase()
        .replace('&', " ")
        .split_whitespace()
        .filter(|w| *w != "and")
        .flat_map(|w| w.chars())
        .filter(|c| c.is_alphanumeric())
        .collect()
}

impl FromStr for CreditCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = category_key(s);
        CreditCategory::ALL
            .iter()
            .copied()
            .find(|c| category_key(c.name()) == key)
            .ok_or_else(|| Error::Invalid(format!("unknown CRediT category {s:?}")))
    }
}

impl fmt::Display for CreditCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for CreditCategory {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for CreditCategory {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryProfile {
    pub category: CreditCategory,
    /// Lowercase; multi-word keywords are matched as contiguous phrases.
    pub keywords: Vec<String>,
    pub examples: Vec<String>,
    pub prototype: Option<EmbeddingVector>,
}

/// All fourteen profiles in ordinal order.
#[derive(Clone, Debug, PartialEq)]
pub struct Taxonomy {
    profiles: Vec<CategoryProfile>,
    /// Keywords listed under more than one category.
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
struct ProfileConfig {
    keywords: Vec<String>,
    examples: Vec<String>,
}

impl Taxonomy {
    pub fn profiles(&self) -> &[CategoryProfile] {
        &self.profiles
    }

    pub fn profiles_mut(&mut self) -> &mut [CategoryProfile] {
        &mut self.profiles
    }

    pub fn profile(&self, category: CreditCategory) -> &CategoryProfile {
        &self.profiles[category.index()]
    }

    pub fn has_prototypes(&self) -> bool {
        self.profiles.iter().all(|p| p.prototype.is_some())
    }

    pub fn default_bundled() -> Self {
        Self::from_json(DEFAULT_TAXONOMY_JSON).expect("bundled taxonomy is valid")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, ProfileConfig> =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("taxonomy JSON: {e}")))?;

        let mut by_category: HashMap<CreditCategory, ProfileConfig> = HashMap::new();
        for (name, cfg) in raw {
            let category: CreditCategory = name
                .parse()
                .map_err(|_| Error::Config(format!("unknown category {name:?}")))?;
            if by_category.insert(category, cfg).is_some() {
                return Err(Error::Config(format!("category {name:?} listed twice")));
            }
        }

        let mut profiles = Vec::with_capacity(CreditCategory::COUNT);
        for category in CreditCategory::ALL {
            let cfg = by_category
                .remove(&category)
                .ok_or_else(|| Error::MissingCategory(category.name().to_string()))?;

            let mut keywords: Vec<String> = Vec::with_capacity(cfg.keywords.len());
            for kw in cfg.keywords {
                let kw = kw.trim().to_lowercase();
                if kw.is_empty() {
                    return Err(Error::Config(format!("{category}: empty keyword")));
                }
                if keywords.contains(&kw) {
                    return Err(Error::Config(format!(
                        "{category}: duplicate keyword {kw:?}"
                    )));
                }
                keywords.push(kw);
            }
            if keywords.is_empty() {
                return Err(Error::Config(format!("{category}: no keywords")));
            }
            if !(MIN_EXAMPLES..=MAX_EXAMPLES).contains(&cfg.examples.len()) {
                return Err(Error::ExamplesOutOfRange {
                    category: category.name().to_string(),
                    count: cfg.examples.len(),
                });
            }
            profiles.push(CategoryProfile {
                category,
                keywords,
                examples: cfg.examples,
                prototype: None,
            });
        }

        let mut warnings = Vec::new();
        for (i, a) in profiles.iter().enumerate() {
            for b in &profiles[i + 1..] {
                for kw in a.keywords.iter().filter(|k| b.keywords.contains(k)) {
                    let msg = format!(
                        "keyword {kw:?} appears under both {} and {}",
                        a.category, b.category
                    );
                    log::warn!("{msg}");
                    warnings.push(msg);
                }
            }
        }

        Ok(Taxonomy { profiles, warnings })
    }
}

pub fn load_taxonomy(path: &Path) -> Result<Taxonomy> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Taxonomy::from_json(&text)
}
