//! Deterministic rule-based stand-in for the language model.
//!
//! Extraction splits text into sentences and routes each one to a category
//! by keyword counts. A sentence opening with "because"/"since" (optionally
//! after a hedge such as "mostly") attaches to the previous thought as an
//! elaboration. Questions come from fixed templates.

use super::prompts::{exploitation_fallback, normalize_span};
use super::{BackendError, ChatBackend, ChatMessage, CompletionRequest, ParseMode, ParsedReflection, ParsedThought, Role, Task};
use crate::profile::ThoughtCategory;

#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl ChatBackend for MockBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        Ok(match &request.task {
            Task::Extract { text, mode, .. } => {
                serde_json::to_string(&mock_parse(text, *mode)).expect("parsed reflection serializes")
            }
            Task::ExploitQuestion { span, topic } => exploitation_fallback(&normalize_span(span), topic),
            Task::BaselineQuestion { topic } => baseline_question(topic, &request.messages),
        })
    }
}

const INTERNAL_WORDS: &[&str] = &[
    "feel", "feels", "feeling", "feelings", "felt", "want", "wants", "wanted", "afraid", "scared",
    "fear", "fears", "love", "hope", "hopeful", "worry", "worried", "worries", "happy", "excited",
    "anxious", "nervous", "heart", "gut", "value", "values", "dream", "wish", "emotion", "emotions",
    "sad", "lonely", "proud", "guilty", "joy",
];

const EXTERNAL_WORDS: &[&str] = &[
    "job", "jobs", "cost", "costs", "visa", "they", "them", "salary", "money", "market", "rent",
    "price", "prices", "finance", "finances", "financial", "law", "company", "employer", "budget",
    "mortgage", "contract", "partner", "schedule", "commute", "taxes", "career", "economy",
];

const EXPERIENTIAL_WORDS: &[&str] = &["remember", "remembered", "experience", "experiences", "before", "ago"];

const EXPERIENTIAL_PHRASES: &[&[&str]] = &[
    &["last", "time"],
    &["when", "i"],
    &["used", "to"],
    &["in", "the", "past"],
];

const HEDGES: &[&str] = &[
    "mostly", "mainly", "partly", "probably", "maybe", "also", "and", "just", "especially",
    "largely", "simply", "only", "perhaps", "that's", "it's",
];

const ELABORATION_MARKERS: &[&str] = &["because", "since"];

const FILLER: &[&str] = &[
    "i don't know", "i do not know", "dont know", "don't know", "not sure", "i'm not sure",
    "i am not sure", "no", "nothing", "nothing else", "nothing more", "no idea", "i have nothing to add",
    "that's all", "ok", "okay", "hmm", "pass", "i guess", "not really",
];

const OPTOUT_TRIGGERS: &[&str] = &[
    "skip", "don't care about", "do not care about", "not interested in", "leave out", "rather not",
    "don't want to talk about", "do not want to talk about", "won't consider", "will not consider",
    "not going to consider", "ignore",
];

const OPTOUT_ASPECTS: &[(ThoughtCategory, &[&str])] = &[
    (ThoughtCategory::Internal, &["feeling", "feelings", "emotion", "emotions", "emotional", "heart", "gut"]),
    (ThoughtCategory::External, &["financial", "finances", "money", "practical", "external", "cost", "costs", "logistics"]),
    (ThoughtCategory::Experiential, &["past", "experience", "experiences", "history", "memories"]),
];

fn words(sentence: &str) -> Vec<String> {
    sentence
        .to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|w| !w.is_empty())
        .map(|w| w.trim_matches('\'').to_string())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Splits after runs of `.`, `!` or `?` and at newlines.
pub(crate) fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\n' || c == '\r' {
            push_sentence(&mut out, &mut current);
            continue;
        }
        current.push(c);
        if matches!(c, '.' | '!' | '?') {
            while let Some(&n) = chars.peek() {
                if matches!(n, '.' | '!' | '?' | '"' | '\'' | ')') {
                    current.push(n);
                    chars.next();
                } else {
                    break;
                }
            }
            push_sentence(&mut out, &mut current);
        }
    }
    push_sentence(&mut out, &mut current);
    out
}

fn push_sentence(out: &mut Vec<String>, current: &mut String) {
    let s = current.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
    current.clear();
}

fn contains_phrase(ws: &[String], phrase: &[&str]) -> bool {
    ws.windows(phrase.len())
        .any(|w| w.iter().zip(phrase).all(|(a, b)| a == b))
}

pub(crate) fn categorize(sentence: &str) -> ThoughtCategory {
    let ws = words(sentence);
    let count = |list: &[&str]| ws.iter().filter(|w| list.contains(&w.as_str())).count();
    let experiential = count(EXPERIENTIAL_WORDS)
        + EXPERIENTIAL_PHRASES.iter().filter(|p| contains_phrase(&ws, p)).count();
    let scores = [
        (ThoughtCategory::Internal, count(INTERNAL_WORDS)),
        (ThoughtCategory::External, count(EXTERNAL_WORDS)),
        (ThoughtCategory::Experiential, experiential),
    ];
    // Highest count wins; ties keep the earlier entry.
    let (best, n) = scores
        .iter()
        .fold((ThoughtCategory::Other, 0), |acc, &(k, n)| if n > acc.1 { (k, n) } else { acc });
    if n == 0 {
        ThoughtCategory::Other
    } else {
        best
    }
}

fn is_elaboration(sentence: &str) -> bool {
    words(sentence)
        .iter()
        .find(|w| !HEDGES.contains(&w.as_str()))
        .is_some_and(|w| ELABORATION_MARKERS.contains(&w.as_str()))
}

fn is_filler(sentence: &str) -> bool {
    let norm = words(sentence).join(" ");
    norm.is_empty() || FILLER.contains(&norm.as_str())
}

fn optout_of(sentence: &str) -> Vec<ThoughtCategory> {
    let lower = sentence.to_lowercase();
    let Some(pos) = OPTOUT_TRIGGERS.iter().filter_map(|t| lower.find(t)).min() else {
        return Vec::new();
    };
    let tail = words(&lower[pos..]);
    OPTOUT_ASPECTS
        .iter()
        .filter(|(_, aspects)| tail.iter().any(|w| aspects.contains(&w.as_str())))
        .map(|(k, _)| *k)
        .collect()
}

fn strip_terminal(sentence: &str) -> String {
    normalize_span(sentence)
}

/// The mock's extraction rules, exposed for tests and the simulator.
pub fn mock_parse(text: &str, mode: ParseMode) -> ParsedReflection {
    let mut parsed = ParsedReflection::default();
    for sentence in sentences(text) {
        let optouts = optout_of(&sentence);
        if !optouts.is_empty() {
            for k in optouts {
                if !parsed.deliberate_optouts.contains(&k) {
                    parsed.deliberate_optouts.push(k);
                }
            }
            continue;
        }
        if is_filler(&sentence) {
            continue;
        }
        let text = strip_terminal(&sentence);
        if text.is_empty() {
            continue;
        }
        match mode {
            ParseMode::ElaborationsOnly => parsed.elaborations.push(text),
            ParseMode::Full => match parsed.thoughts.last_mut() {
                Some(prev) if is_elaboration(&sentence) => prev.elaborations.push(text),
                _ => parsed.thoughts.push(ParsedThought {
                    category: categorize(&sentence),
                    text,
                    elaborations: Vec::new(),
                }),
            },
        }
    }
    parsed
}

const BASELINE_TEMPLATES: &[&str] = &[
    "What are the main reasons you are weighing when you think about {topic}?",
    "Why do you think this decision about {topic} matters to you right now?",
    "What information would help you decide about {topic}?",
    "How do you think the practical factors of {topic} should be weighed against each other?",
    "What could cause you to change your mind about {topic}?",
    "Which consideration about {topic} do you think matters most?",
];

/// Cognitive-leaning questions chosen by how many questions the history already holds.
fn baseline_question(topic: &str, messages: &[ChatMessage]) -> String {
    let asked = messages.iter().filter(|m| m.role == Role::Assistant).count();
    BASELINE_TEMPLATES[asked % BASELINE_TEMPLATES.len()].replace("{topic}", topic)
}
