//! Explore/exploit question policy.
//!
//! Each turn draws `u ~ U[0, 1)` from the state's own generator: `u < ε`
//! means explore, otherwise exploit. When the chosen path is infeasible the
//! other one is taken. Exploration targets the eligible category with the
//! lowest fixation; exploitation targets the shallowest category and, inside
//! it, the thought with the highest `utility_discount / depth`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bank::{BankEntry, ExplorationBank};
use crate::error::{Error, Result};
use crate::gateway::{ChatMessage, ParsedReflection};
use crate::profile::{PatternModel, ReflectionProfile, ThoughtCategory, ThoughtId};

/// Thoughts whose discount falls below this are no longer exploited.
pub const DISCOUNT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    /// Probability of choosing exploration.
    pub epsilon: f64,
    /// Multiplies a thought's discount after a minimal-elaboration response.
    pub discount_factor: f64,
    /// A response adding at most this many elaborations counts as minimal.
    pub minimal_elaboration_threshold: usize,
    /// Priority bonus for staying in the previous turn's category.
    pub coherence_stickiness: f64,
    pub rng_seed: u64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            discount_factor: 0.5,
            minimal_elaboration_threshold: 0,
            coherence_stickiness: 1.0,
            rng_seed: 0,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} outside [0, 1]", self.epsilon)));
        }
        if !(self.discount_factor > 0.0 && self.discount_factor < 1.0) {
            return Err(Error::Config(format!(
                "discount_factor {} outside (0, 1)",
                self.discount_factor
            )));
        }
        if self.coherence_stickiness.is_nan() || self.coherence_stickiness < 0.0 {
            return Err(Error::Config("coherence_stickiness must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AgentAction {
    Explore { target_category: ThoughtCategory, question_id: String },
    Exploit { target_thought: ThoughtId },
}

impl AgentAction {
    pub fn kind(&self) -> &'static str {
        match self {
            AgentAction::Explore { .. } => "explore",
            AgentAction::Exploit { .. } => "exploit",
        }
    }

    pub fn is_explore(&self) -> bool {
        matches!(self, AgentAction::Explore { .. })
    }
}

/// One line of the action trace persisted per turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub turn: usize,
    pub action_type: String,
    pub target: String,
    pub rng_draw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AskedQuestion {
    pub question: String,
    pub action: AgentAction,
    pub turn: usize,
}

/// Everything the experimental agent knows about one conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub topic: String,
    pub profile: ReflectionProfile,
    pub pattern: PatternModel,
    pub asked_questions: Vec<AskedQuestion>,
    pub last_category: Option<ThoughtCategory>,
    /// Number of user responses absorbed in the assisted phase.
    pub turn_index: usize,
    /// Question awaiting the user's response.
    pub pending_action: Option<AgentAction>,
    pub dialog: Vec<ChatMessage>,
    #[serde(with = "rng_state")]
    pub rng: ChaCha8Rng,
}

/// Generator state as `{seed: hex, stream, word_pos: decimal string}` so the
/// 128-bit position survives JSON consumers limited to 53-bit numbers.
mod rng_state {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Snapshot {
        seed: String,
        stream: u64,
        word_pos: String,
    }

    pub fn serialize<S: Serializer>(rng: &ChaCha8Rng, s: S) -> Result<S::Ok, S::Error> {
        Snapshot {
            seed: rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ChaCha8Rng, D::Error> {
        let snap = Snapshot::deserialize(d)?;
        if snap.seed.len() != 64 || !snap.seed.is_ascii() {
            return Err(D::Error::custom("rng seed must be 64 hex digits"));
        }
        let mut seed = [0u8; 32];
        for (i, byte) in seed.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&snap.seed[2 * i..2 * i + 2], 16).map_err(D::Error::custom)?;
        }
        let word_pos: u128 = snap.word_pos.parse().map_err(D::Error::custom)?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(snap.stream);
        rng.set_word_pos(word_pos);
        Ok(rng)
    }
}

impl AgentState {
    pub fn new(topic: &str, profile: ReflectionProfile, seed: u64) -> Self {
        let pattern = PatternModel::compute(&profile);
        Self {
            topic: topic.to_string(),
            profile,
            pattern,
            asked_questions: Vec::new(),
            last_category: None,
            turn_index: 0,
            pending_action: None,
            dialog: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn refresh_pattern(&mut self) {
        self.pattern = PatternModel::compute(&self.profile);
    }

    pub fn was_asked(&self, question_id: &str) -> bool {
        self.asked_questions.iter().any(|q| {
            matches!(&q.action, AgentAction::Explore { question_id: id, .. } if id == question_id)
        })
    }

    /// Category an action points at, if it still resolves.
    pub fn action_category(&self, action: &AgentAction) -> Option<ThoughtCategory> {
        match action {
            AgentAction::Explore { target_category, .. } => Some(*target_category),
            AgentAction::Exploit { target_thought } => {
                self.profile.thought(*target_thought).map(|t| t.category)
            }
        }
    }

    /// Logs a delivered question; it becomes the pending action.
    pub fn record_question(&mut self, question: &str, action: AgentAction) {
        self.asked_questions.push(AskedQuestion {
            question: question.to_string(),
            action: action.clone(),
            turn: self.turn_index + 1,
        });
        self.dialog.push(ChatMessage::assistant(question));
        self.pending_action = Some(action);
    }
}

fn category_has_question(state: &AgentState, bank: &ExplorationBank, category: ThoughtCategory) -> bool {
    bank.for_category(category).any(|e| !state.was_asked(&e.id))
}

/// Categories exploration may target right now.
pub fn eligible_exploration_categories(state: &AgentState, bank: &ExplorationBank) -> Vec<ThoughtCategory> {
    ThoughtCategory::EXPLORABLE
        .into_iter()
        .filter(|&k| !state.profile.is_opted_out(k) && category_has_question(state, bank, k))
        .collect()
}

/// Eligible category with minimum fixation; ties prefer the previous turn's
/// category, then internal < experiential < external.
pub fn select_exploration_category(state: &AgentState, bank: &ExplorationBank) -> Option<ThoughtCategory> {
    let eligible = eligible_exploration_categories(state, bank);
    let min = eligible.iter().map(|&k| state.pattern.fixation_of(k)).min()?;
    let tied: Vec<_> = eligible
        .into_iter()
        .filter(|&k| state.pattern.fixation_of(k) == min)
        .collect();
    match state.last_category {
        Some(last) if tied.contains(&last) => Some(last),
        _ => tied.into_iter().min_by_key(|k| k.tie_rank()),
    }
}

/// First unasked bank question for `category`, rendered for the session topic.
pub fn select_exploration_question<'b>(
    state: &AgentState,
    bank: &'b ExplorationBank,
    category: ThoughtCategory,
) -> Option<(&'b BankEntry, String)> {
    bank.for_category(category)
        .find(|e| !state.was_asked(&e.id))
        .map(|e| (e, e.render(&state.topic)))
}

pub fn exploitation_priority(state: &AgentState, thought: ThoughtId, config: &PolicyConfig) -> Option<f64> {
    let t = state.profile.thought(thought)?;
    let mut priority = t.utility_discount / t.depth() as f64;
    if state.last_category == Some(t.category) {
        priority *= 1.0 + config.coherence_stickiness;
    }
    Some(priority)
}

/// Shallowest category (by average depth) holding an eligible thought, then
/// its highest-priority thought; remaining ties go to the lowest id.
pub fn select_exploitation_target(state: &AgentState, config: &PolicyConfig) -> Option<ThoughtId> {
    let eligible: Vec<_> = state
        .profile
        .thoughts
        .iter()
        .filter(|t| t.utility_discount >= DISCOUNT_FLOOR)
        .collect();
    let category = eligible
        .iter()
        .map(|t| t.category)
        .min_by(|a, b| {
            let (da, db) = (state.pattern.avg_depth_of(*a), state.pattern.avg_depth_of(*b));
            da.total_cmp(&db)
                .then_with(|| {
                    let last = state.last_category;
                    (last != Some(*a)).cmp(&(last != Some(*b)))
                })
                .then_with(|| a.tie_rank().cmp(&b.tie_rank()))
        })?;
    eligible
        .into_iter()
        .filter(|t| t.category == category)
        .map(|t| (t.id, exploitation_priority(state, t.id, config).unwrap_or(0.0)))
        .max_by(|(ia, pa), (ib, pb)| pa.total_cmp(pb).then_with(|| ib.cmp(ia)))
        .map(|(id, _)| id)
}

/// Draws the explore/exploit decision and resolves its target.
pub fn select_action(
    state: &mut AgentState,
    bank: &ExplorationBank,
    config: &PolicyConfig,
) -> Result<(AgentAction, ActionRecord)> {
    let draw: f64 = state.rng.gen();
    let explore = || {
        let category = select_exploration_category(state, bank)?;
        let (entry, _) = select_exploration_question(state, bank, category)?;
        Some(AgentAction::Explore { target_category: category, question_id: entry.id.clone() })
    };
    let exploit = || {
        select_exploitation_target(state, config)
            .map(|target_thought| AgentAction::Exploit { target_thought })
    };
    let action = if draw < config.epsilon {
        explore().or_else(exploit)
    } else {
        exploit().or_else(explore)
    }
    .ok_or(Error::NoActionAvailable)?;
    let target = match &action {
        AgentAction::Explore { target_category, question_id } => format!("{target_category}:{question_id}"),
        AgentAction::Exploit { target_thought } => target_thought.0.to_string(),
    };
    let record = ActionRecord {
        turn: state.turn_index + 1,
        action_type: action.kind().to_string(),
        target,
        rng_draw: draw,
    };
    Ok((action, record))
}

/// Minimal responses multiply the target's discount; productive ones reset it.
pub fn apply_implicit_feedback(
    state: &mut AgentState,
    action: &AgentAction,
    new_elaboration_count: usize,
    config: &PolicyConfig,
) {
    let AgentAction::Exploit { target_thought } = action else {
        return;
    };
    if let Some(t) = state.profile.thought_mut(*target_thought) {
        if new_elaboration_count <= config.minimal_elaboration_threshold {
            t.utility_discount *= config.discount_factor;
        } else {
            t.utility_discount = 1.0;
        }
    }
}

/// Folds the extraction of the user's latest response into the state.
pub fn update_after_response(
    state: &mut AgentState,
    action: &AgentAction,
    parsed: &ParsedReflection,
    config: &PolicyConfig,
) -> Result<()> {
    let turn = state.turn_index + 1;
    match action {
        AgentAction::Explore { .. } => {
            for pt in &parsed.thoughts {
                let id = state.profile.add_thought(&pt.text, pt.category, turn)?;
                for e in &pt.elaborations {
                    state.profile.add_elaboration(id, e, turn)?;
                }
            }
        }
        AgentAction::Exploit { target_thought } => {
            let mut added = 0;
            let texts = parsed
                .elaborations
                .iter()
                .chain(parsed.thoughts.iter().flat_map(|t| std::iter::once(&t.text).chain(&t.elaborations)));
            for text in texts {
                state.profile.add_elaboration(*target_thought, text, turn)?;
                added += 1;
            }
            apply_implicit_feedback(state, action, added, config);
        }
    }
    for &k in &parsed.deliberate_optouts {
        state.profile.opt_out_category(k);
    }
    state.last_category = state.action_category(action);
    state.refresh_pattern();
    state.turn_index = turn;
    state.pending_action = None;
    Ok(())
}
