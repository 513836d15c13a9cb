//! Two-phase study protocol: consent, optional pre-questionnaire, unaided
//! reflection, assisted reflection with a minimum number of turns, and the
//! post-questionnaire.
//!
//! Session state is never mutated in place. Every operation produces
//! [`SessionEvent`]s which are appended to the log and then folded into the
//! session, so replaying the log always yields the live state.

mod events;
mod service;
mod topics;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{ActionRecord, AgentState};
use crate::profile::ThoughtCategory;

pub use events::{
    parse_event_line, replay, Envelope, EventStore, FileEventStore, MemoryEventStore, SessionEvent,
    EVENT_SCHEMA_VERSION,
};
pub use service::{ParticipantView, SessionService, TranscriptLine, TurnReply};
pub use topics::{Topic, TopicCatalog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Experimental,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Consent,
    PreQuestionnaire,
    Unaided,
    Assisted,
    PostQuestionnaire,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Participant,
    Agent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub turn: usize,
    pub speaker: Speaker,
    pub text: String,
    pub timestamp: DateTime<Utc>,
}

/// Two five-point Likert items plus a free comment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostQuestionnaire {
    pub holistic_integration: u8,
    pub elaboration_depth: u8,
    #[serde(default)]
    pub open_comment: Option<String>,
}

pub const HOLISTIC_INTEGRATION_STATEMENT: &str =
    "The agent posed questions that helped me integrate head, heart, and gut.";
pub const ELABORATION_DEPTH_STATEMENT: &str =
    "The agent posed questions that helped me elaborate further on my thoughts.";

impl PostQuestionnaire {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("holistic_integration", self.holistic_integration),
            ("elaboration_depth", self.elaboration_depth),
        ] {
            if !(1..=5).contains(&v) {
                return Err(Error::validation(format!("{name} must be a Likert value in 1..=5, got {v}")));
            }
        }
        Ok(())
    }
}

/// Opaque pre-questionnaire answers (demographics, decision clarity, SRIS items).
pub type PreQuestionnaire = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub topic_id: String,
    pub topic: String,
    pub condition: Condition,
    pub phase: Phase,
    pub pre_questionnaire_required: bool,
    pub transcript: Vec<TranscriptEntry>,
    /// Agent questions delivered in the assisted phase.
    pub assisted_turn_count: usize,
    pub agent_seed: u64,
    pub agent_state: Option<AgentState>,
    pub actions: Vec<ActionRecord>,
    pub opted_out: BTreeSet<ThoughtCategory>,
    /// The agent ran out of questions; ending is allowed below the minimum.
    pub end_suggested: bool,
    pub pre_questionnaire: Option<PreQuestionnaire>,
    pub post_questionnaire: Option<PostQuestionnaire>,
}

impl Session {
    pub fn expect_phase(&self, expected: Phase) -> Result<()> {
        if self.phase == expected {
            Ok(())
        } else {
            Err(Error::Phase { expected, actual: self.phase })
        }
    }

    /// Chat history as seen by an agent: unaided text first, then the turns.
    pub fn history(&self) -> Vec<crate::gateway::ChatMessage> {
        use crate::gateway::ChatMessage;
        self.transcript
            .iter()
            .map(|e| match e.speaker {
                Speaker::Participant => ChatMessage::user(e.text.clone()),
                Speaker::Agent => ChatMessage::assistant(e.text.clone()),
            })
            .collect()
    }

    pub fn turns_remaining(&self, min_turns: usize) -> usize {
        min_turns.saturating_sub(self.assisted_turn_count)
    }

    /// Equality that ignores wall-clock timestamps.
    pub fn same_state(&self, other: &Session) -> bool {
        let strip = |s: &Session| {
            let mut s = s.clone();
            for e in &mut s.transcript {
                e.timestamp = DateTime::<Utc>::UNIX_EPOCH;
            }
            s
        };
        strip(self) == strip(other)
    }
}
