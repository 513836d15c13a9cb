//! Curated exploration questions, one short list per explorable category.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ThoughtCategory;

const EMBEDDED_BANK: &str = include_str!("../data/exploration_bank.json");

pub const DECISION_PLACEHOLDER: &str = "{decision}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankEntry {
    pub id: String,
    pub category: ThoughtCategory,
    pub template: String,
}

impl BankEntry {
    pub fn render(&self, topic: &str) -> String {
        self.template.replace(DECISION_PLACEHOLDER, topic)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationBank {
    entries: Vec<BankEntry>,
}

impl Default for ExplorationBank {
    fn default() -> Self {
        Self::embedded()
    }
}

impl ExplorationBank {
    pub fn embedded() -> Self {
        Self::from_json(EMBEDDED_BANK).expect("embedded exploration bank is valid")
    }

    /// Loads an override bank. Ids must be unique and "other" has no questions.
    pub fn from_json(text: &str) -> Result<Self> {
        let bank: ExplorationBank = serde_json::from_str(text)?;
        let mut seen = std::collections::HashSet::new();
        for entry in &bank.entries {
            if !seen.insert(entry.id.as_str()) {
                return Err(Error::validation(format!("duplicate bank id {:?}", entry.id)));
            }
            if !entry.category.is_explorable() {
                return Err(Error::validation(format!(
                    "bank entry {:?} targets the non-explorable category \"other\"",
                    entry.id
                )));
            }
            if entry.template.trim().is_empty() {
                return Err(Error::validation(format!("bank entry {:?} is empty", entry.id)));
            }
        }
        Ok(bank)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn entries(&self) -> &[BankEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&BankEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn for_category(&self, category: ThoughtCategory) -> impl Iterator<Item = &BankEntry> {
        self.entries.iter().filter(move |e| e.category == category)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_bank_shape() {
        let bank = ExplorationBank::embedded();
        assert_eq!(bank.len(), 8);
        assert_eq!(bank.for_category(ThoughtCategory::Internal).count(), 3);
        assert_eq!(bank.for_category(ThoughtCategory::Experiential).count(), 3);
        assert_eq!(bank.for_category(ThoughtCategory::External).count(), 2);
        assert_eq!(bank.for_category(ThoughtCategory::Other).count(), 0);
    }

    #[test]
    fn render_substitutes_topic() {
        let bank = ExplorationBank::embedded();
        let first = bank.for_category(ThoughtCategory::Internal).next().unwrap();
        assert_eq!(first.render("move abroad"), "What are your gut feelings about move abroad?");
    }

    #[test]
    fn rejects_other_category_and_duplicates() {
        let other = r#"{"entries":[{"id":"o","category":"other","template":"x?"}]}"#;
        assert!(ExplorationBank::from_json(other).is_err());
        let dup = r#"{"entries":[{"id":"a","category":"internal","template":"x?"},{"id":"a","category":"external","template":"y?"}]}"#;
        assert!(ExplorationBank::from_json(dup).is_err());
    }
}
