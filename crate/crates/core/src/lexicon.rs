//! Dictionary-based reflective-language markers.
//!
//! A lexicon maps category names to word stems (a trailing `*` marks a
//! prefix match). Categories are grouped into three composites:
//! cognitive, emotional and intuitive. A composite score is the percentage
//! of tokens matching any category of the group. One token can count
//! toward several groups.
//!
//! The shipped starter lexicon is an open approximation; absolute values are
//! not comparable to those of commercial dictionaries.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EMBEDDED_LEXICON: &str = include_str!("../data/lexicon.json");

pub const DIMENSIONS: [&str; 3] = ["cognitive", "emotional", "intuitive"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Groupings {
    pub cognitive: Vec<String>,
    pub emotional: Vec<String>,
    pub intuitive: Vec<String>,
}

impl Default for Groupings {
    fn default() -> Self {
        let v = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        Self {
            cognitive: v(&["insight", "causation", "discrepancy", "tentative"]),
            emotional: v(&["positive_emotion", "negative_emotion"]),
            intuitive: v(&["past_focus", "perceptual_see", "perceptual_hear", "perceptual_feel"]),
        }
    }
}

impl Groupings {
    fn members(&self) -> [&[String]; 3] {
        [&self.cognitive, &self.emotional, &self.intuitive]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct StemSet {
    exact: HashSet<String>,
    prefixes: Vec<String>,
}

impl StemSet {
    fn matches(&self, token: &str) -> bool {
        self.exact.contains(token) || self.prefixes.iter().any(|p| token.starts_with(p.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconSet {
    categories: BTreeMap<String, StemSet>,
    groupings: Groupings,
}

impl Default for LexiconSet {
    fn default() -> Self {
        Self::embedded()
    }
}

fn parse_stem(stem: &str) -> Result<(String, bool)> {
    let (base, prefix) = match stem.strip_suffix('*') {
        Some(base) => (base, true),
        None => (stem, false),
    };
    if base.is_empty() || base.contains('*') {
        return Err(Error::validation(format!("invalid stem {stem:?}: wildcard only as trailing marker")));
    }
    if base.chars().any(|c| c.is_uppercase() || c.is_whitespace()) {
        return Err(Error::validation(format!("stem {stem:?} must be a lowercase single word")));
    }
    Ok((base.to_string(), prefix))
}

impl LexiconSet {
    pub fn embedded() -> Self {
        Self::from_json(EMBEDDED_LEXICON).expect("embedded lexicon is valid")
    }

    /// Reads `{category: [stems...], "groupings": {cognitive: [...], ...}}`.
    /// The `groupings` block is optional and defaults to the standard one.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let serde_json::Value::Object(map) = value else {
            return Err(Error::validation("lexicon must be a JSON object"));
        };
        let mut categories = BTreeMap::new();
        let mut groupings = Groupings::default();
        for (name, entry) in map {
            if name == "groupings" {
                groupings = serde_json::from_value(entry)?;
                continue;
            }
            let stems: Vec<String> = serde_json::from_value(entry)?;
            let mut set = StemSet::default();
            for stem in &stems {
                let (base, prefix) = parse_stem(stem)?;
                if prefix {
                    set.prefixes.push(base);
                } else {
                    set.exact.insert(base);
                }
            }
            categories.insert(name, set);
        }
        for member in groupings.members().into_iter().flatten() {
            if !categories.contains_key(member) {
                return Err(Error::validation(format!("grouping member {member:?} is not a lexicon category")));
            }
        }
        Ok(Self { categories, groupings })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn groupings(&self) -> &Groupings {
        &self.groupings
    }

    pub fn category_names(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn category_matches(&self, category: &str, token: &str) -> bool {
        self.categories.get(category).is_some_and(|s| s.matches(token))
    }

    fn group_matches(&self, group: &[String], token: &str) -> bool {
        group.iter().any(|c| self.category_matches(c, token))
    }
}

/// Lowercased word tokens; apostrophes and all other non-alphanumerics split.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CompositeScores {
    pub cognitive: f64,
    pub emotional: f64,
    pub intuitive: f64,
    pub token_count: usize,
}

impl CompositeScores {
    pub fn as_array(&self) -> [f64; 3] {
        [self.cognitive, self.emotional, self.intuitive]
    }
}

pub fn score(text: &str, lexicon: &LexiconSet) -> CompositeScores {
    let tokens = tokenize(text);
    let mut hits = [0usize; 3];
    for token in &tokens {
        for (slot, group) in hits.iter_mut().zip(lexicon.groupings.members()) {
            if lexicon.group_matches(group, token) {
                *slot += 1;
            }
        }
    }
    let n = tokens.len();
    let pct = |h: usize| if n == 0 { 0.0 } else { 100.0 * h as f64 / n as f64 };
    CompositeScores {
        cognitive: pct(hits[0]),
        emotional: pct(hits[1]),
        intuitive: pct(hits[2]),
        token_count: n,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

/// Column-wise z-scores; a constant column maps to zeros.
pub fn standardize_columns(rows: &[[f64; 3]], scaling: Scaling) -> Result<Vec<[f64; 3]>> {
    if rows.len() < 2 {
        return Err(Error::validation("standardization needs at least two observations"));
    }
    let n = rows.len() as f64;
    let denom = match scaling {
        Scaling::Population => n,
        Scaling::Sample => n - 1.0,
    };
    let mut out = vec![[0.0; 3]; rows.len()];
    for d in 0..3 {
        let mean = rows.iter().map(|r| r[d]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / denom;
        let sd = var.sqrt();
        // Identical values can leave rounding noise in the variance.
        if sd > 1e-12 * mean.abs().max(1.0) {
            for (o, r) in out.iter_mut().zip(rows) {
                o[d] = (r[d] - mean) / sd;
            }
        }
    }
    Ok(out)
}

pub fn standardize(scores: &[CompositeScores]) -> Result<Vec<[f64; 3]>> {
    let rows: Vec<_> = scores.iter().map(CompositeScores::as_array).collect();
    standardize_columns(&rows, Scaling::Population)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny() -> LexiconSet {
        LexiconSet::from_json(
            r#"{
                "insight": ["think", "know*"], "causation": ["because"], "discrepancy": ["should"], "tentative": ["maybe"],
                "positive_emotion": ["happy"], "negative_emotion": ["afraid", "fear*"],
                "past_focus": ["was"], "perceptual_see": ["saw"], "perceptual_hear": ["heard"], "perceptual_feel": ["feel"]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize("I don't know."), vec!["i", "don", "t", "know"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("FEEL feel"), vec!["feel", "feel"]);
    }

    #[test]
    fn hand_counted_scores() {
        let lex = tiny();
        // 10 tokens; "think" and "knowing" are cognitive.
        let s = score("I think knowing the new city helps me a lot", &lex);
        assert_eq!(s.token_count, 10);
        assert_eq!(s.cognitive, 20.0);
        assert_eq!(s.emotional, 0.0);

        assert_eq!(score("", &lex), CompositeScores::default());
        let none = score("blue green red", &lex);
        assert_eq!(none.token_count, 3);
        assert_eq!(none.as_array(), [0.0; 3]);

        // "fearful" matches the fear* prefix.
        let e = score("fearful happy was", &lex);
        assert!((e.emotional - 200.0 / 3.0).abs() < 1e-12);
        assert!((e.intuitive - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lexicon_validation() {
        assert!(LexiconSet::from_json(r#"{"insight": ["Think"]}"#).is_err());
        assert!(LexiconSet::from_json(r#"{"insight": ["th*nk"]}"#).is_err());
        // Default groupings reference missing categories.
        assert!(LexiconSet::from_json(r#"{"insight": ["think"]}"#).is_err());
        let custom = r#"{"a": ["x"], "b": ["y*"], "groupings": {"cognitive": ["a"], "emotional": ["b"], "intuitive": []}}"#;
        let lex = LexiconSet::from_json(custom).unwrap();
        assert_eq!(score("x yes z", &lex).emotional, 100.0 / 3.0);
    }

    #[test]
    fn embedded_lexicon_groups() {
        let lex = LexiconSet::embedded();
        assert_eq!(lex.category_names().count(), 10);
        assert!(lex.category_matches("perceptual_feel", "feel"));
        assert!(lex.category_matches("negative_emotion", "worried"));
    }

    #[test]
    fn z_scores() {
        let rows = [[1.0, 5.0, 0.0], [2.0, 5.0, 0.0], [3.0, 5.0, 3.0]];
        let z = standardize_columns(&rows, Scaling::Population).unwrap();
        let expected = (1.5f64).sqrt();
        assert!((z[0][0] + expected).abs() < 1e-12);
        assert_eq!(z[1][0], 0.0);
        assert!((z[2][0] - expected).abs() < 1e-12);
        assert!(z.iter().all(|r| r[1] == 0.0));
        assert!(standardize_columns(&rows[..1], Scaling::Population).is_err());
        let s = standardize_columns(&rows, Scaling::Sample).unwrap();
        assert!((s[2][0] - 1.0).abs() < 1e-12);
    }

    const WORDS: &[&str] = &["i", "think", "maybe", "happy", "afraid", "was", "saw", "the", "city", "feel", "because", "blue"];

    fn arb_text() -> impl Strategy<Value = Vec<&'static str>> {
        prop::collection::vec(prop::sample::select(WORDS), 0..40)
    }

    proptest! {
        #[test]
        fn order_and_doubling_invariance(words in arb_text(), seed in any::<u64>()) {
            let lex = tiny();
            let text = words.join(" ");
            let base = score(&text, &lex);
            let mut shuffled = words.clone();
            use rand::{seq::SliceRandom, SeedableRng};
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(score(&shuffled.join(" "), &lex), base);
            let doubled = score(&format!("{text} {text}"), &lex);
            for (a, b) in doubled.as_array().iter().zip(base.as_array()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn adding_a_match_follows_ratio(words in arb_text()) {
            let lex = tiny();
            let text = words.join(" ");
            let before = score(&text, &lex);
            let after = score(&format!("{text} think"), &lex);
            let n = before.token_count as f64;
            let hits = before.cognitive * n / 100.0;
            let expected = 100.0 * (hits + 1.0) / (n + 1.0);
            prop_assert!((after.cognitive - expected).abs() < 1e-9);
            prop_assert_eq!(after.cognitive >= before.cognitive, 100.0 >= before.cognitive);
        }

        #[test]
        fn standardized_moments(rows in prop::collection::vec(prop::array::uniform3(0.0f64..100.0), 2..50)) {
            let z = standardize_columns(&rows, Scaling::Population).unwrap();
            for d in 0..3 {
                let n = z.len() as f64;
                let mean = z.iter().map(|r| r[d]).sum::<f64>() / n;
                let sd = (z.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / n).sqrt();
                prop_assert!(mean.abs() < 1e-9);
                prop_assert!(sd.abs() < 1e-9 || (sd - 1.0).abs() < 1e-9);
            }
        }
    }
}
