//! Prompt templates. The exploitation and baseline system prompts are kept
//! verbatim in `data/` and only their placeholders are substituted.

use super::ParseMode;

pub const EXPLOITATION_PROMPT: &str = include_str!("../../data/exploitation_prompt.txt");
pub const BASELINE_PROMPT: &str = include_str!("../../data/baseline_prompt.txt");

pub const TOPIC_PLACEHOLDER: &str = "{topic}";
pub const SPAN_PLACEHOLDER: &str = "{span}";

pub const JSON_REPAIR_INSTRUCTION: &str =
    "Your previous reply was not valid JSON. Emit valid JSON only, exactly matching the requested schema, with no other text.";

pub fn render_exploitation_prompt(topic: &str, span: &str) -> String {
    // Substitute span last so a topic containing "{span}" is left alone.
    EXPLOITATION_PROMPT
        .replace(TOPIC_PLACEHOLDER, topic)
        .replace(SPAN_PLACEHOLDER, span)
}

pub fn render_baseline_prompt(topic: &str) -> String {
    BASELINE_PROMPT.replace(TOPIC_PLACEHOLDER, topic)
}

pub fn exploitation_fallback(span: &str, topic: &str) -> String {
    format!("Can you say more about why {span} matters for {topic}?")
}

pub fn baseline_fallback(topic: &str) -> String {
    format!("What else comes to mind when you think about {topic}?")
}

/// Trims whitespace and trailing sentence punctuation from a thought text so
/// it reads as a span inside a question.
pub fn normalize_span(span: &str) -> String {
    span.trim()
        .trim_end_matches(|c: char| matches!(c, '.' | '!' | '?' | ';' | ':' | ',') || c.is_whitespace())
        .to_string()
}

const CATEGORY_GUIDE: &str = "\
Categories:
- internal: the person's own feelings, wishes, fears, values or personal priorities.
- external: circumstances outside the person, such as money, work, logistics, rules, facts, or what other people want or do.
- experiential: things that happened before, to the person or to people they know, and what was learned from them.
- other: anything that does not clearly fit the three categories above.";

const OPTOUT_GUIDE: &str = "\
If the user explicitly says they do not want to consider one kind of aspect (for example \"please skip my feelings\" or \"I don't care about the financial side\"), list that category in \"deliberate_optouts\" and do not turn that statement into a thought.";

pub fn render_extraction_prompt(topic: &str, mode: ParseMode) -> String {
    match mode {
        ParseMode::Full => format!(
            "You analyze a user's written reflection about the decision: {topic}.\n\
Split the reflection into main thoughts. A main thought is one distinct consideration. \
An elaboration is a reason, justification or supporting detail that deepens a main thought instead of introducing a new one; attach it to the thought it supports.\n\
{CATEGORY_GUIDE}\n\
{OPTOUT_GUIDE}\n\
Use the user's own words for each text. Do not add, judge or summarize.\n\
Reply with JSON only, in exactly this shape:\n\
{{\"thoughts\": [{{\"text\": \"...\", \"category\": \"internal|external|experiential|other\", \"elaborations\": [\"...\"]}}], \"deliberate_optouts\": []}}"
        ),
        ParseMode::ElaborationsOnly => format!(
            "You analyze a user's answer to a follow-up question about one of their thoughts on the decision: {topic}.\n\
List every reason, justification or supporting detail the answer adds to that thought. \
Ignore filler such as \"I don't know\" or \"nothing else\"; if the answer adds nothing, return an empty list.\n\
{OPTOUT_GUIDE}\n\
Use the user's own words. Reply with JSON only, in exactly this shape:\n\
{{\"elaborations\": [\"...\"], \"deliberate_optouts\": []}}"
        ),
    }
}
