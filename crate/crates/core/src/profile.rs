//! Reflection profile and the pattern-model indicators derived from it.
//!
//! A reflection is a list of main thoughts, each tagged with one
//! [`ThoughtCategory`] and carrying an ordered list of elaborations. The
//! parent-child relation between a thought and its elaborations is held
//! directly by [`Thought::elaborations`].
//!
//! Indicators per category `k`:
//!
//! * depth of a thought: `1 + |elaborations|`
//! * breadth `B_k`: number of thoughts in `k`
//! * fixation `S_k`: sum of depths in `k` (equivalently `B_k + Σ|E_i|`)
//! * average depth: `S_k / B_k` when `B_k > 0`, otherwise `0`

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Type of consideration a thought expresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThoughtCategory {
    Internal,
    External,
    Experiential,
    Other,
}

impl ThoughtCategory {
    pub const ALL: [ThoughtCategory; 4] = [
        ThoughtCategory::Internal,
        ThoughtCategory::External,
        ThoughtCategory::Experiential,
        ThoughtCategory::Other,
    ];

    /// Categories the exploration bank can target, in tie-break order.
    pub const EXPLORABLE: [ThoughtCategory; 3] = [
        ThoughtCategory::Internal,
        ThoughtCategory::Experiential,
        ThoughtCategory::External,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ThoughtCategory::Internal => "internal",
            ThoughtCategory::External => "external",
            ThoughtCategory::Experiential => "experiential",
            ThoughtCategory::Other => "other",
        }
    }

    pub fn is_explorable(self) -> bool {
        self != ThoughtCategory::Other
    }

    /// Position in the fixed tie-break order internal < experiential < external < other.
    pub fn tie_rank(self) -> usize {
        match self {
            ThoughtCategory::Internal => 0,
            ThoughtCategory::Experiential => 1,
            ThoughtCategory::External => 2,
            ThoughtCategory::Other => 3,
        }
    }

    /// Maps a model-produced label onto a category; anything unrecognized is `Other`.
    pub fn from_label_lenient(label: &str) -> Self {
        label.parse().unwrap_or(ThoughtCategory::Other)
    }
}

impl fmt::Display for ThoughtCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThoughtCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "internal" => Ok(ThoughtCategory::Internal),
            "external" => Ok(ThoughtCategory::External),
            "experiential" => Ok(ThoughtCategory::Experiential),
            "other" => Ok(ThoughtCategory::Other),
            other => Err(Error::validation(format!("unknown thought category {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ThoughtId(pub u64);

/// Accepts a number or a numeric string, since ids also appear as JSON
/// object keys and buffered (tagged-enum) content keeps keys as strings.
impl<'de> Deserialize<'de> for ThoughtId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = ThoughtId;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a thought id")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<ThoughtId, E> {
                Ok(ThoughtId(v))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<ThoughtId, E> {
                u64::try_from(v).map(ThoughtId).map_err(|_| E::custom("thought id must be non-negative"))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<ThoughtId, E> {
                v.parse().map(ThoughtId).map_err(|_| E::custom(format!("invalid thought id {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElaborationId(pub u64);

impl fmt::Display for ThoughtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elaboration {
    pub id: ElaborationId,
    pub text: String,
    pub source_turn: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thought {
    pub id: ThoughtId,
    pub text: String,
    pub category: ThoughtCategory,
    pub source_turn: usize,
    pub utility_discount: f64,
    pub elaborations: Vec<Elaboration>,
}

impl Thought {
    /// `1 + |elaborations|`; never below 1.
    pub fn depth(&self) -> usize {
        1 + self.elaborations.len()
    }
}

/// What happened to an opt-out request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptOutOutcome {
    Recorded,
    AlreadyOptedOut,
    /// The category currently holds the profile's (positive) maximum
    /// fixation, so it is not an under-explored aspect to opt out of.
    Declined,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct ReflectionProfile {
    pub thoughts: Vec<Thought>,
    pub opted_out: BTreeSet<ThoughtCategory>,
}

#[derive(Deserialize)]
struct RawProfile {
    thoughts: Vec<Thought>,
    #[serde(default)]
    opted_out: BTreeSet<ThoughtCategory>,
}

impl TryFrom<RawProfile> for ReflectionProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        let profile = ReflectionProfile {
            thoughts: raw.thoughts,
            opted_out: raw.opted_out,
        };
        profile.validate()?;
        Ok(profile)
    }
}

fn non_empty(text: &str, what: &str) -> Result<()> {
    if text.trim().is_empty() {
        Err(Error::validation(format!("{what} text must not be empty")))
    } else {
        Ok(())
    }
}

impl ReflectionProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses the JSON document form and checks every invariant.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let mut thought_ids = HashSet::new();
        for thought in &self.thoughts {
            if !thought_ids.insert(thought.id) {
                return Err(Error::validation(format!("duplicate thought id {}", thought.id.0)));
            }
            non_empty(&thought.text, "thought")?;
            if !(thought.utility_discount > 0.0 && thought.utility_discount <= 1.0) {
                return Err(Error::validation(format!(
                    "utility_discount {} of thought {} outside (0, 1]",
                    thought.utility_discount, thought.id.0
                )));
            }
            let mut elaboration_ids = HashSet::new();
            for elaboration in &thought.elaborations {
                if !elaboration_ids.insert(elaboration.id) {
                    return Err(Error::validation(format!(
                        "duplicate elaboration id {} in thought {}",
                        elaboration.id.0, thought.id.0
                    )));
                }
                non_empty(&elaboration.text, "elaboration")?;
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.thoughts.is_empty()
    }

    pub fn thought(&self, id: ThoughtId) -> Option<&Thought> {
        self.thoughts.iter().find(|t| t.id == id)
    }

    pub fn thought_mut(&mut self, id: ThoughtId) -> Option<&mut Thought> {
        self.thoughts.iter_mut().find(|t| t.id == id)
    }

    fn in_category(&self, category: ThoughtCategory) -> impl Iterator<Item = &Thought> {
        self.thoughts.iter().filter(move |t| t.category == category)
    }

    pub fn breadth(&self, category: ThoughtCategory) -> usize {
        self.in_category(category).count()
    }

    pub fn fixation(&self, category: ThoughtCategory) -> usize {
        self.in_category(category).map(Thought::depth).sum()
    }

    pub fn avg_depth(&self, category: ThoughtCategory) -> f64 {
        match self.breadth(category) {
            0 => 0.0,
            b => self.fixation(category) as f64 / b as f64,
        }
    }

    pub fn is_opted_out(&self, category: ThoughtCategory) -> bool {
        self.opted_out.contains(&category)
    }

    // Thought and elaboration ids are derived from the current maxima so the
    // JSON form needs no counter field.
    fn next_thought_id(&self) -> ThoughtId {
        ThoughtId(self.thoughts.iter().map(|t| t.id.0 + 1).max().unwrap_or(1))
    }

    fn next_elaboration_id(&self) -> ElaborationId {
        ElaborationId(
            self.thoughts
                .iter()
                .flat_map(|t| &t.elaborations)
                .map(|e| e.id.0 + 1)
                .max()
                .unwrap_or(1),
        )
    }

    pub fn add_thought(
        &mut self,
        text: &str,
        category: ThoughtCategory,
        source_turn: usize,
    ) -> Result<ThoughtId> {
        non_empty(text, "thought")?;
        let id = self.next_thought_id();
        self.thoughts.push(Thought {
            id,
            text: text.trim().to_string(),
            category,
            source_turn,
            utility_discount: 1.0,
            elaborations: Vec::new(),
        });
        Ok(id)
    }

    pub fn add_elaboration(
        &mut self,
        thought_id: ThoughtId,
        text: &str,
        source_turn: usize,
    ) -> Result<ElaborationId> {
        non_empty(text, "elaboration")?;
        let id = self.next_elaboration_id();
        let thought = self
            .thought_mut(thought_id)
            .ok_or_else(|| Error::NotFound(format!("thought {}", thought_id.0)))?;
        thought.elaborations.push(Elaboration {
            id,
            text: text.trim().to_string(),
            source_turn,
        });
        Ok(id)
    }

    /// Records that the user deliberately declines to consider `category`.
    pub fn opt_out_category(&mut self, category: ThoughtCategory) -> OptOutOutcome {
        if self.opted_out.contains(&category) {
            return OptOutOutcome::AlreadyOptedOut;
        }
        let max = ThoughtCategory::ALL
            .iter()
            .map(|&k| self.fixation(k))
            .max()
            .unwrap_or(0);
        if max > 0 && self.fixation(category) == max {
            return OptOutOutcome::Declined;
        }
        self.opted_out.insert(category);
        OptOutOutcome::Recorded
    }
}

/// Per-category indicators plus per-thought depth, always derived from a profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternModel {
    pub breadth: BTreeMap<ThoughtCategory, usize>,
    pub fixation: BTreeMap<ThoughtCategory, usize>,
    pub avg_depth: BTreeMap<ThoughtCategory, f64>,
    pub depth: BTreeMap<ThoughtId, usize>,
}

impl PatternModel {
    /// Builds the full model in one pass over the profile.
    pub fn compute(profile: &ReflectionProfile) -> Self {
        let mut breadth: BTreeMap<_, _> = ThoughtCategory::ALL.iter().map(|&k| (k, 0)).collect();
        let mut fixation = breadth.clone();
        let mut depth = BTreeMap::new();
        for thought in &profile.thoughts {
            let d = thought.depth();
            *breadth.entry(thought.category).or_default() += 1;
            *fixation.entry(thought.category).or_default() += d;
            depth.insert(thought.id, d);
        }
        let avg_depth = ThoughtCategory::ALL
            .iter()
            .map(|&k| {
                let avg = match breadth[&k] {
                    0 => 0.0,
                    b => fixation[&k] as f64 / b as f64,
                };
                (k, avg)
            })
            .collect();
        PatternModel {
            breadth,
            fixation,
            avg_depth,
            depth,
        }
    }

    pub fn breadth_of(&self, category: ThoughtCategory) -> usize {
        self.breadth.get(&category).copied().unwrap_or(0)
    }

    pub fn fixation_of(&self, category: ThoughtCategory) -> usize {
        self.fixation.get(&category).copied().unwrap_or(0)
    }

    pub fn avg_depth_of(&self, category: ThoughtCategory) -> f64 {
        self.avg_depth.get(&category).copied().unwrap_or(0.0)
    }
}

pub fn compute_pattern_model(profile: &ReflectionProfile) -> PatternModel {
    PatternModel::compute(profile)
}
