//! Append-only session event log.
//!
//! Each line of a session's log is one JSON [`Envelope`]:
//!
//! ```text
//! {"schema_version":1,"seq":3,"session_id":"s-…","timestamp":"…","event":{"type":"agent_question",…}}
//! ```
//!
//! Experimental sessions carry a full agent-state snapshot (including the
//! generator state) on every agent question, so a replayed session resumes
//! with exactly the same policy behavior.

use std::collections::{BTreeSet, HashMap};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Condition, Phase, PostQuestionnaire, PreQuestionnaire, Session, Speaker, TranscriptEntry};
use crate::error::{Error, Result};
use crate::policy::{ActionRecord, AgentState};
use crate::profile::ThoughtCategory;

pub const EVENT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    Created {
        topic_id: String,
        topic: String,
        condition: Condition,
        agent_seed: u64,
        pre_questionnaire_required: bool,
    },
    Consented,
    PreQuestionnaireSubmitted { answers: PreQuestionnaire },
    UnaidedSubmitted { text: String },
    ParticipantMessage { text: String },
    AgentQuestion {
        turn: usize,
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        action: Option<ActionRecord>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agent_state: Option<Box<AgentState>>,
    },
    EndSuggested {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agent_state: Option<Box<AgentState>>,
    },
    OptedOut {
        category: ThoughtCategory,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agent_state: Option<Box<AgentState>>,
    },
    Ended,
    QuestionnaireSubmitted { answers: PostQuestionnaire },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub seq: u64,
    pub session_id: String,
    pub timestamp: DateTime<Utc>,
    pub event: SessionEvent,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::validation(format!("event log: {}", msg.into()))
}

/// Folds one event into the session it belongs to.
pub fn apply(session: Option<Session>, env: &Envelope) -> Result<Session> {
    let ts = env.timestamp;
    if let SessionEvent::Created { topic_id, topic, condition, agent_seed, pre_questionnaire_required } = &env.event {
        if session.is_some() {
            return Err(corrupt("duplicate created event"));
        }
        return Ok(Session {
            id: env.session_id.clone(),
            topic_id: topic_id.clone(),
            topic: topic.clone(),
            condition: *condition,
            phase: Phase::Consent,
            pre_questionnaire_required: *pre_questionnaire_required,
            transcript: Vec::new(),
            assisted_turn_count: 0,
            agent_seed: *agent_seed,
            agent_state: None,
            actions: Vec::new(),
            opted_out: BTreeSet::new(),
            end_suggested: false,
            pre_questionnaire: None,
            post_questionnaire: None,
        });
    }
    let mut s = session.ok_or_else(|| corrupt("event before created"))?;
    if s.id != env.session_id {
        return Err(corrupt("session id mismatch"));
    }
    match &env.event {
        SessionEvent::Created { .. } => unreachable!(),
        SessionEvent::Consented => {
            s.expect_phase(Phase::Consent)?;
            s.phase = if s.pre_questionnaire_required { Phase::PreQuestionnaire } else { Phase::Unaided };
        }
        SessionEvent::PreQuestionnaireSubmitted { answers } => {
            s.expect_phase(Phase::PreQuestionnaire)?;
            s.pre_questionnaire = Some(answers.clone());
            s.phase = Phase::Unaided;
        }
        SessionEvent::UnaidedSubmitted { text } => {
            s.expect_phase(Phase::Unaided)?;
            s.transcript.push(TranscriptEntry { turn: 0, speaker: Speaker::Participant, text: text.clone(), timestamp: ts });
            s.phase = Phase::Assisted;
        }
        SessionEvent::ParticipantMessage { text } => {
            s.expect_phase(Phase::Assisted)?;
            s.transcript.push(TranscriptEntry {
                turn: s.assisted_turn_count,
                speaker: Speaker::Participant,
                text: text.clone(),
                timestamp: ts,
            });
        }
        SessionEvent::AgentQuestion { turn, text, action, agent_state } => {
            s.expect_phase(Phase::Assisted)?;
            if *turn != s.assisted_turn_count + 1 {
                return Err(corrupt(format!("turn {turn} out of order")));
            }
            s.transcript.push(TranscriptEntry { turn: *turn, speaker: Speaker::Agent, text: text.clone(), timestamp: ts });
            s.assisted_turn_count = *turn;
            s.end_suggested = false;
            if let Some(a) = action {
                s.actions.push(a.clone());
            }
            if let Some(state) = agent_state {
                s.agent_state = Some((**state).clone());
            }
        }
        SessionEvent::EndSuggested { agent_state } => {
            s.expect_phase(Phase::Assisted)?;
            s.end_suggested = true;
            if let Some(state) = agent_state {
                s.agent_state = Some((**state).clone());
            }
        }
        SessionEvent::OptedOut { category, agent_state } => {
            s.opted_out.insert(*category);
            if let Some(state) = agent_state {
                s.agent_state = Some((**state).clone());
            }
        }
        SessionEvent::Ended => {
            s.expect_phase(Phase::Assisted)?;
            s.phase = Phase::PostQuestionnaire;
        }
        SessionEvent::QuestionnaireSubmitted { answers } => {
            s.expect_phase(Phase::PostQuestionnaire)?;
            s.post_questionnaire = Some(answers.clone());
            s.phase = Phase::Done;
        }
    }
    Ok(s)
}

/// Rebuilds a session from its full log.
pub fn replay(events: &[Envelope]) -> Result<Session> {
    let mut session = None;
    for (i, env) in events.iter().enumerate() {
        if env.seq != i as u64 {
            return Err(corrupt(format!("expected seq {i}, found {}", env.seq)));
        }
        if env.schema_version != EVENT_SCHEMA_VERSION {
            return Err(corrupt(format!("unsupported schema version {}", env.schema_version)));
        }
        session = Some(apply(session, env)?);
    }
    session.ok_or_else(|| corrupt("empty log"))
}

/// Parses one JSON-lines record.
pub fn parse_event_line(line: &str) -> Result<Envelope> {
    let env: Envelope = serde_json::from_str(line)?;
    if env.schema_version != EVENT_SCHEMA_VERSION {
        return Err(corrupt(format!("unsupported schema version {}", env.schema_version)));
    }
    Ok(env)
}

pub trait EventStore: Send + Sync {
    fn append(&self, session_id: &str, events: &[Envelope]) -> Result<()>;
    fn load(&self, session_id: &str) -> Result<Vec<Envelope>>;
    fn session_ids(&self) -> Result<Vec<String>>;
}

#[derive(Debug, Default)]
pub struct MemoryEventStore {
    logs: Mutex<HashMap<String, Vec<Envelope>>>,
}

impl MemoryEventStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl EventStore for MemoryEventStore {
    fn append(&self, session_id: &str, events: &[Envelope]) -> Result<()> {
        let mut logs = self.logs.lock().unwrap_or_else(|e| e.into_inner());
        logs.entry(session_id.to_string()).or_default().extend_from_slice(events);
        Ok(())
    }

    fn load(&self, session_id: &str) -> Result<Vec<Envelope>> {
        let logs = self.logs.lock().unwrap_or_else(|e| e.into_inner());
        logs.get(session_id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("session {session_id}")))
    }

    fn session_ids(&self) -> Result<Vec<String>> {
        let logs = self.logs.lock().unwrap_or_else(|e| e.into_inner());
        let mut ids: Vec<_> = logs.keys().cloned().collect();
        ids.sort();
        Ok(ids)
    }
}

/// One `<session id>.jsonl` file per session under a directory.
#[derive(Debug)]
pub struct FileEventStore {
    dir: PathBuf,
}

impl FileEventStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { dir: dir.as_ref().to_path_buf() })
    }

    fn path(&self, session_id: &str) -> Result<PathBuf> {
        if session_id.is_empty() || !session_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(Error::validation(format!("invalid session id {session_id:?}")));
        }
        Ok(self.dir.join(format!("{session_id}.jsonl")))
    }
}

impl EventStore for FileEventStore {
    fn append(&self, session_id: &str, events: &[Envelope]) -> Result<()> {
        let mut buf = Vec::new();
        for env in events {
            serde_json::to_writer(&mut buf, env)?;
            buf.push(b'\n');
        }
        let mut file = OpenOptions::new().create(true).append(true).open(self.path(session_id)?)?;
        file.write_all(&buf)?;
        file.sync_data()?;
        Ok(())
    }

    fn load(&self, session_id: &str) -> Result<Vec<Envelope>> {
        let path = self.path(session_id)?;
        let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(format!("session {session_id}")),
            _ => e.into(),
        })?;
        text.lines().filter(|l| !l.trim().is_empty()).map(parse_event_line).collect()
    }

    fn session_ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(seq: u64, event: SessionEvent) -> Envelope {
        Envelope {
            schema_version: EVENT_SCHEMA_VERSION,
            seq,
            session_id: "s-1".into(),
            timestamp: DateTime::<Utc>::UNIX_EPOCH,
            event,
        }
    }

    fn created() -> SessionEvent {
        SessionEvent::Created {
            topic_id: "get-pet".into(),
            topic: "Get pet".into(),
            condition: Condition::Baseline,
            agent_seed: 1,
            pre_questionnaire_required: false,
        }
    }

    #[test]
    fn replay_checks_order_and_phase() {
        let log = vec![env(0, created()), env(1, SessionEvent::Consented)];
        assert_eq!(replay(&log).unwrap().phase, Phase::Unaided);

        let gap = vec![env(0, created()), env(2, SessionEvent::Consented)];
        assert!(replay(&gap).is_err());

        let early_end = vec![env(0, created()), env(1, SessionEvent::Ended)];
        assert!(matches!(replay(&early_end), Err(Error::Phase { .. })));
        assert!(replay(&[]).is_err());
        assert!(replay(&[env(0, SessionEvent::Consented)]).is_err());
    }

    #[test]
    fn line_format_is_versioned() {
        let line = serde_json::to_string(&env(0, created())).unwrap();
        assert!(line.contains("\"schema_version\":1"));
        assert!(line.contains("\"type\":\"created\""));
        assert_eq!(parse_event_line(&line).unwrap(), env(0, created()));
        let future = line.replace("\"schema_version\":1", "\"schema_version\":9");
        assert!(parse_event_line(&future).is_err());
        assert!(parse_event_line("{not json").is_err());
    }

    #[test]
    fn file_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileEventStore::open(dir.path()).unwrap();
        store.append("s-1", &[env(0, created())]).unwrap();
        store.append("s-1", &[env(1, SessionEvent::Consented)]).unwrap();
        assert_eq!(store.session_ids().unwrap(), vec!["s-1"]);
        assert_eq!(store.load("s-1").unwrap().len(), 2);
        assert!(matches!(store.load("s-2"), Err(Error::NotFound(_))));
        assert!(store.append("../evil", &[]).is_err());
    }
}
