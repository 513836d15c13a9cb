use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use chrono::Utc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::events::{apply, replay, Envelope, EventStore, SessionEvent, EVENT_SCHEMA_VERSION};
use super::{Condition, Phase, PostQuestionnaire, PreQuestionnaire, Session, Speaker, TopicCatalog};
use crate::agents::{self, TurnOutcome, TurnResult};
use crate::bank::ExplorationBank;
use crate::config::ServiceConfig;
use crate::error::{Error, Result};
use crate::gateway::Gateway;
use crate::profile::{OptOutOutcome, ThoughtCategory};

/// What a participant may see of a transcript line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub turn: usize,
    pub speaker: Speaker,
    pub text: String,
}

/// Blinded session view: no condition, no actions, no profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantView {
    pub id: String,
    pub topic_id: String,
    pub topic: String,
    pub phase: Phase,
    pub transcript: Vec<TranscriptLine>,
    pub turns_completed: usize,
    pub turns_required: usize,
    pub turns_remaining: usize,
    pub can_end: bool,
    pub end_suggested: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnReply {
    pub question: Option<String>,
    pub end_suggested: bool,
    pub turns_completed: usize,
    pub turns_remaining: usize,
}

struct Slot {
    /// Held for the whole of a mutating operation; contention means busy.
    turn: Mutex<()>,
    snapshot: RwLock<Arc<Session>>,
    next_seq: Mutex<u64>,
}

/// Runs many sessions concurrently; operations on one session are serialized.
pub struct SessionService {
    config: ServiceConfig,
    gateway: Gateway,
    bank: ExplorationBank,
    catalog: TopicCatalog,
    store: Box<dyn EventStore>,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
    assigner: Mutex<ChaCha8Rng>,
}

fn session_agent_seed(base: u64, draw: u64) -> u64 {
    base ^ draw
}

impl SessionService {
    /// Opens the service and resumes every session found in `store`.
    pub fn open(
        config: ServiceConfig,
        gateway: Gateway,
        bank: ExplorationBank,
        store: Box<dyn EventStore>,
    ) -> Result<Self> {
        config.validate()?;
        let mut assigner = ChaCha8Rng::seed_from_u64(config.assignment_seed);
        let mut sessions = HashMap::new();
        for id in store.session_ids()? {
            let log = store.load(&id)?;
            let session = replay(&log)?;
            // Keep the assignment stream aligned with what was drawn before the restart.
            let _: (f64, u64, u64) = (assigner.gen(), assigner.gen(), assigner.gen());
            sessions.insert(
                id,
                Arc::new(Slot {
                    turn: Mutex::new(()),
                    snapshot: RwLock::new(Arc::new(session)),
                    next_seq: Mutex::new(log.len() as u64),
                }),
            );
        }
        Ok(Self {
            config,
            gateway,
            bank,
            catalog: TopicCatalog::default(),
            store,
            sessions: RwLock::new(sessions),
            assigner: Mutex::new(assigner),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn catalog(&self) -> &TopicCatalog {
        &self.catalog
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("session {id}")))
    }

    fn snapshot(slot: &Slot) -> Arc<Session> {
        slot.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Persists `events` and folds them into the snapshot. Nothing changes
    /// when validation or the write fails.
    fn commit(&self, slot: &Slot, events: Vec<SessionEvent>) -> Result<Arc<Session>> {
        let mut seq = slot.next_seq.lock().unwrap_or_else(|e| e.into_inner());
        let current = Self::snapshot(slot);
        let now = Utc::now();
        let envelopes: Vec<Envelope> = events
            .into_iter()
            .enumerate()
            .map(|(i, event)| Envelope {
                schema_version: EVENT_SCHEMA_VERSION,
                seq: *seq + i as u64,
                session_id: current.id.clone(),
                timestamp: now,
                event,
            })
            .collect();
        let mut next = Some((*current).clone());
        for env in &envelopes {
            next = Some(apply(next, env)?);
        }
        let next = Arc::new(next.expect("at least the current session"));
        self.store.append(&current.id, &envelopes)?;
        *seq += envelopes.len() as u64;
        *slot.snapshot.write().unwrap_or_else(|e| e.into_inner()) = next.clone();
        Ok(next)
    }

    /// Runs `f` with the session's turn lock held; a concurrent call gets [`Error::Busy`].
    fn mutate<T>(
        &self,
        id: &str,
        f: impl FnOnce(&Session) -> Result<(Vec<SessionEvent>, T)>,
    ) -> Result<(Arc<Session>, T)> {
        let slot = self.slot(id)?;
        let _guard = match slot.turn.try_lock() {
            Ok(g) => g,
            Err(std::sync::TryLockError::WouldBlock) => return Err(Error::Busy),
            Err(std::sync::TryLockError::Poisoned(e)) => e.into_inner(),
        };
        let current = Self::snapshot(&slot);
        let (events, out) = f(&current)?;
        let session = if events.is_empty() { current } else { self.commit(&slot, events)? };
        Ok((session, out))
    }

    pub fn create_session(&self, topic_id: &str, condition_override: Option<Condition>) -> Result<ParticipantView> {
        let topic = self.catalog.get(topic_id)?.clone();
        let (draw, agent_draw, id_draw): (f64, u64, u64) = {
            let mut rng = self.assigner.lock().unwrap_or_else(|e| e.into_inner());
            (rng.gen(), rng.gen(), rng.gen())
        };
        let assigned = if draw < 0.5 { Condition::Experimental } else { Condition::Baseline };
        let condition = condition_override.unwrap_or(assigned);
        let id = format!("s-{id_draw:016x}");
        let env = Envelope {
            schema_version: EVENT_SCHEMA_VERSION,
            seq: 0,
            session_id: id.clone(),
            timestamp: Utc::now(),
            event: SessionEvent::Created {
                topic_id: topic.id.clone(),
                topic: topic.topic.clone(),
                condition,
                agent_seed: session_agent_seed(self.config.agent_seed, agent_draw),
                pre_questionnaire_required: self.config.require_pre_questionnaire,
            },
        };
        let session = apply(None, &env)?;
        let mut sessions = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        if sessions.contains_key(&id) {
            return Err(Error::validation(format!("session id collision {id}")));
        }
        self.store.append(&id, std::slice::from_ref(&env))?;
        let view = self.view_of(&session);
        sessions.insert(
            id,
            Arc::new(Slot {
                turn: Mutex::new(()),
                snapshot: RwLock::new(Arc::new(session)),
                next_seq: Mutex::new(1),
            }),
        );
        Ok(view)
    }

    pub fn consent(&self, id: &str) -> Result<ParticipantView> {
        let (s, _) = self.mutate(id, |s| {
            s.expect_phase(Phase::Consent)?;
            Ok((vec![SessionEvent::Consented], ()))
        })?;
        Ok(self.view_of(&s))
    }

    pub fn submit_pre_questionnaire(&self, id: &str, answers: PreQuestionnaire) -> Result<ParticipantView> {
        let (s, _) = self.mutate(id, |s| {
            s.expect_phase(Phase::PreQuestionnaire)?;
            Ok((vec![SessionEvent::PreQuestionnaireSubmitted { answers }], ()))
        })?;
        Ok(self.view_of(&s))
    }

    /// Stores the unaided reflection, enters the assisted phase and asks the first question.
    pub fn submit_unaided(&self, id: &str, text: &str) -> Result<TurnReply> {
        let (s, _) = self.mutate(id, |s| {
            s.expect_phase(Phase::Unaided)?;
            if text.trim().is_empty() {
                return Err(Error::validation("unaided reflection must not be empty"));
            }
            let mut events = vec![SessionEvent::UnaidedSubmitted { text: text.to_string() }];
            match s.condition {
                Condition::Experimental => {
                    let policy = self.config.policy(s.agent_seed);
                    let mut state = agents::experimental_init(&self.gateway, text, &s.topic, &policy)?;
                    for &k in &s.opted_out {
                        state.profile.opt_out_category(k);
                    }
                    let (outcome, state) = agents::experimental_turn(&self.gateway, &self.bank, state, None, &policy)?;
                    events.push(self.agent_event(s, outcome, state));
                }
                Condition::Baseline => {
                    let mut history = s.history();
                    history.push(crate::gateway::ChatMessage::user(text));
                    let r = agents::baseline_turn(&self.gateway, &history, &s.topic)?;
                    events.push(question_event(s, r, None));
                }
            }
            Ok((events, ()))
        })?;
        Ok(self.reply_of(&s))
    }

    fn agent_event(&self, s: &Session, outcome: TurnOutcome, state: crate::policy::AgentState) -> SessionEvent {
        match outcome {
            TurnOutcome::Question(r) => question_event(s, r, Some(state)),
            TurnOutcome::EndSuggested => SessionEvent::EndSuggested { agent_state: Some(Box::new(state)) },
        }
    }

    /// Routes one participant message to the session's agent.
    pub fn post_message(&self, id: &str, text: &str) -> Result<TurnReply> {
        let (s, _) = self.mutate(id, |s| {
            s.expect_phase(Phase::Assisted)?;
            if text.trim().is_empty() {
                return Err(Error::validation("message must not be empty"));
            }
            let mut events = vec![SessionEvent::ParticipantMessage { text: text.to_string() }];
            match s.condition {
                Condition::Experimental => {
                    let policy = self.config.policy(s.agent_seed);
                    let state = s
                        .agent_state
                        .clone()
                        .ok_or_else(|| Error::validation("experimental session has no agent state"))?;
                    let (outcome, state) =
                        agents::experimental_turn(&self.gateway, &self.bank, state, Some(text), &policy)?;
                    events.push(self.agent_event(s, outcome, state));
                }
                Condition::Baseline => {
                    let mut history = s.history();
                    history.push(crate::gateway::ChatMessage::user(text));
                    let r = agents::baseline_turn(&self.gateway, &history, &s.topic)?;
                    events.push(question_event(s, r, None));
                }
            }
            Ok((events, ()))
        })?;
        Ok(self.reply_of(&s))
    }

    /// Explicit opt-out of an aspect (internal, experiential or external).
    pub fn opt_out(&self, id: &str, category: ThoughtCategory) -> Result<ParticipantView> {
        let (s, _) = self.mutate(id, |s| {
            if !category.is_explorable() {
                return Err(Error::validation("only internal, experiential or external aspects can be skipped"));
            }
            if s.phase >= Phase::PostQuestionnaire {
                return Err(Error::Phase { expected: Phase::Assisted, actual: s.phase });
            }
            if s.opted_out.contains(&category) {
                return Ok((Vec::new(), ()));
            }
            let agent_state = match s.agent_state.clone() {
                Some(mut st) => {
                    if st.profile.opt_out_category(category) == OptOutOutcome::Declined {
                        return Err(Error::validation(format!(
                            "{category} is the aspect explored most so far and cannot be skipped"
                        )));
                    }
                    Some(Box::new(st))
                }
                None => None,
            };
            Ok((vec![SessionEvent::OptedOut { category, agent_state }], ()))
        })?;
        Ok(self.view_of(&s))
    }

    pub fn end_session(&self, id: &str) -> Result<ParticipantView> {
        let min = self.config.min_turns;
        let (s, _) = self.mutate(id, |s| {
            if s.phase == Phase::PostQuestionnaire {
                return Ok((Vec::new(), ()));
            }
            s.expect_phase(Phase::Assisted)?;
            if s.assisted_turn_count < min && !s.end_suggested {
                return Err(Error::TurnsRemaining {
                    completed: s.assisted_turn_count,
                    required: min,
                    remaining: s.turns_remaining(min),
                });
            }
            Ok((vec![SessionEvent::Ended], ()))
        })?;
        Ok(self.view_of(&s))
    }

    pub fn submit_questionnaire(&self, id: &str, answers: PostQuestionnaire) -> Result<ParticipantView> {
        let (s, _) = self.mutate(id, |s| {
            s.expect_phase(Phase::PostQuestionnaire)?;
            answers.validate()?;
            Ok((vec![SessionEvent::QuestionnaireSubmitted { answers }], ()))
        })?;
        Ok(self.view_of(&s))
    }

    pub fn view(&self, id: &str) -> Result<ParticipantView> {
        let slot = self.slot(id)?;
        Ok(self.view_of(&Self::snapshot(&slot)))
    }

    /// Full internal state, including condition. Admin use only.
    pub fn session(&self, id: &str) -> Result<Session> {
        let slot = self.slot(id)?;
        Ok((*Self::snapshot(&slot)).clone())
    }

    /// The complete event log. Admin use only.
    pub fn export(&self, id: &str) -> Result<Vec<Envelope>> {
        self.slot(id)?;
        self.store.load(id)
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<_> = self.sessions.read().unwrap_or_else(|e| e.into_inner()).keys().cloned().collect();
        ids.sort();
        ids
    }

    fn view_of(&self, s: &Session) -> ParticipantView {
        let min = self.config.min_turns;
        ParticipantView {
            id: s.id.clone(),
            topic_id: s.topic_id.clone(),
            topic: s.topic.clone(),
            phase: s.phase,
            transcript: s
                .transcript
                .iter()
                .map(|e| TranscriptLine { turn: e.turn, speaker: e.speaker, text: e.text.clone() })
                .collect(),
            turns_completed: s.assisted_turn_count,
            turns_required: min,
            turns_remaining: s.turns_remaining(min),
            can_end: s.phase == Phase::Assisted && (s.assisted_turn_count >= min || s.end_suggested),
            end_suggested: s.end_suggested,
        }
    }

    fn reply_of(&self, s: &Session) -> TurnReply {
        let question = s
            .transcript
            .last()
            .filter(|e| e.speaker == Speaker::Agent && !s.end_suggested)
            .map(|e| e.text.clone());
        TurnReply {
            question,
            end_suggested: s.end_suggested,
            turns_completed: s.assisted_turn_count,
            turns_remaining: s.turns_remaining(self.config.min_turns),
        }
    }
}

fn question_event(s: &Session, r: TurnResult, state: Option<crate::policy::AgentState>) -> SessionEvent {
    SessionEvent::AgentQuestion {
        turn: s.assisted_turn_count + 1,
        text: r.question,
        action: r.record,
        agent_state: state.map(Box::new),
    }
}
