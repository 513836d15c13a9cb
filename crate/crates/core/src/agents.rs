//! Turn orchestration for the profile-driven experimental agent.
//!
//! The baseline agent lives in [`crate::baseline`] and has no access path to
//! profiles or pattern models.

use serde::{Deserialize, Serialize};

use crate::bank::ExplorationBank;
use crate::error::{Error, Result};
use crate::gateway::{ChatMessage, Gateway, ParseMode};
use crate::policy::{self, ActionRecord, AgentAction, AgentState, PolicyConfig};
use crate::profile::ReflectionProfile;

pub use crate::baseline::baseline_turn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResult {
    pub question: String,
    /// Absent for the baseline agent.
    pub action: Option<AgentAction>,
    pub record: Option<ActionRecord>,
    /// Sequence number of the persisted event holding the state snapshot.
    pub state_snapshot_ref: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TurnOutcome {
    Question(TurnResult),
    /// Both exploration and exploitation are exhausted.
    EndSuggested,
}

/// Builds the initial state from the unaided reflection.
pub fn experimental_init(
    gateway: &Gateway,
    unaided_text: &str,
    topic: &str,
    config: &PolicyConfig,
) -> Result<AgentState> {
    let parsed = gateway.parse_reflection(unaided_text, topic, ParseMode::Full)?;
    let mut profile = ReflectionProfile::new();
    for pt in &parsed.thoughts {
        let id = profile.add_thought(&pt.text, pt.category, 0)?;
        for e in &pt.elaborations {
            profile.add_elaboration(id, e, 0)?;
        }
    }
    for &k in &parsed.deliberate_optouts {
        profile.opt_out_category(k);
    }
    let mut state = AgentState::new(topic, profile, config.rng_seed);
    state.dialog.push(ChatMessage::user(unaided_text));
    Ok(state)
}

/// Parses the user's answer to the pending question and updates the state.
///
/// Extraction failures leave the profile untouched (the raw text stays in
/// the dialog); backend failures propagate.
pub fn absorb_response(
    gateway: &Gateway,
    state: &mut AgentState,
    response: &str,
    config: &PolicyConfig,
) -> Result<()> {
    if response.trim().is_empty() {
        return Err(Error::validation("response must not be empty"));
    }
    state.dialog.push(ChatMessage::user(response));
    let Some(action) = state.pending_action.clone() else {
        return Ok(());
    };
    let mode = if action.is_explore() { ParseMode::Full } else { ParseMode::ElaborationsOnly };
    match gateway.parse_reflection(response, &state.topic, mode) {
        Ok(parsed) => policy::update_after_response(state, &action, &parsed, config),
        Err(Error::Parse { message, raw }) => {
            tracing::warn!(%message, raw, "could not extract response; profile left unchanged");
            state.turn_index += 1;
            state.pending_action = None;
            Ok(())
        }
        Err(e) => Err(e),
    }
}

/// Absorbs `user_response` (if any) and asks the next question.
///
/// The input state is consumed; on error nothing is committed, so callers
/// keep their previous copy.
pub fn experimental_turn(
    gateway: &Gateway,
    bank: &ExplorationBank,
    mut state: AgentState,
    user_response: Option<&str>,
    config: &PolicyConfig,
) -> Result<(TurnOutcome, AgentState)> {
    if let Some(response) = user_response {
        absorb_response(gateway, &mut state, response, config)?;
    }
    let (action, record) = match policy::select_action(&mut state, bank, config) {
        Ok(chosen) => chosen,
        Err(Error::NoActionAvailable) => return Ok((TurnOutcome::EndSuggested, state)),
        Err(e) => return Err(e),
    };
    let question = match &action {
        AgentAction::Explore { question_id, .. } => bank
            .get(question_id)
            .map(|e| e.render(&state.topic))
            .ok_or_else(|| Error::NotFound(format!("bank question {question_id}")))?,
        AgentAction::Exploit { target_thought } => {
            let span = state
                .profile
                .thought(*target_thought)
                .map(|t| t.text.clone())
                .ok_or_else(|| Error::NotFound(format!("thought {}", target_thought.0)))?;
            gateway.generate_exploitation_question(&span, &state.topic, &state.dialog)?
        }
    };
    state.record_question(&question, action.clone());
    Ok((
        TurnOutcome::Question(TurnResult {
            question,
            action: Some(action),
            record: Some(record),
            state_snapshot_ref: None,
        }),
        state,
    ))
}
