//! History-only baseline agent: a fixed instruction plus the transcript.

use crate::agents::TurnResult;
use crate::error::Result;
use crate::gateway::{ChatMessage, Gateway};

/// Generates the next question from the transcript alone.
///
/// `history` starts with the unaided reflection as a user message.
pub fn baseline_turn(gateway: &Gateway, history: &[ChatMessage], topic: &str) -> Result<TurnResult> {
    let question = gateway.generate_baseline_question(topic, history)?;
    Ok(TurnResult { question, action: None, record: None, state_snapshot_ref: None })
}
