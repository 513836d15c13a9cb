use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EMBEDDED_TOPICS: &str = include_str!("../../data/topics.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub category: String,
    pub topic: String,
}

/// The big-life-decision topics participants choose from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCatalog {
    entries: Vec<Topic>,
}

impl Default for TopicCatalog {
    fn default() -> Self {
        serde_json::from_str(EMBEDDED_TOPICS).expect("embedded topic catalog is valid")
    }
}

impl TopicCatalog {
    pub fn entries(&self) -> &[Topic] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Result<&Topic> {
        self.entries
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| Error::validation(format!("unknown topic {id:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn fourteen_topics_six_categories() {
        let c = TopicCatalog::default();
        assert_eq!(c.entries().len(), 14);
        let cats: BTreeSet<_> = c.entries().iter().map(|t| t.category.as_str()).collect();
        assert_eq!(
            cats.into_iter().collect::<Vec<_>>(),
            ["Career", "Education", "Family", "Finances", "Relationships", "Relocation"]
        );
        assert_eq!(c.get("move-city-country").unwrap().topic, "Move to a new city/country");
        assert!(c.get("sail-the-world").is_err());
    }
}
