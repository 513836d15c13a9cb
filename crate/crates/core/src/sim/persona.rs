//! Template-driven simulated participants.
//!
//! Each persona writes sentences salted with lexicon stems of the mode it is
//! expressing, and with the mock extractor's category keywords so that the
//! agent files the sentence under the matching thought category
//! (emotional → internal, intuitive → experiential, cognitive → external).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonaKind {
    /// Low expression across all modes.
    Reserved,
    IntuitionDominant,
    EmotionDominant,
}

impl PersonaKind {
    pub const ALL: [PersonaKind; 3] = [PersonaKind::Reserved, PersonaKind::IntuitionDominant, PersonaKind::EmotionDominant];

    pub fn as_str(self) -> &'static str {
        match self {
            PersonaKind::Reserved => "reserved",
            PersonaKind::IntuitionDominant => "intuition_dominant",
            PersonaKind::EmotionDominant => "emotion_dominant",
        }
    }

    pub fn dominant(self) -> Option<Mode> {
        match self {
            PersonaKind::Reserved => None,
            PersonaKind::IntuitionDominant => Some(Mode::Intuitive),
            PersonaKind::EmotionDominant => Some(Mode::Emotional),
        }
    }
}

impl std::fmt::Display for PersonaKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A reflective-language mode; the index matches the composite order
/// (cognitive, emotional, intuitive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cognitive,
    Emotional,
    Intuitive,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Cognitive, Mode::Emotional, Mode::Intuitive];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Persona {
    pub kind: PersonaKind,
    /// Probability of elaborating when one of its thoughts is probed.
    pub elaboration_compliance: f64,
    /// Probability of answering in the mode a question asks about.
    pub breadth_compliance: f64,
    /// Probability of adding a sentence in the dominant mode to an answer given in another mode.
    pub dominant_bias: f64,
}

impl Persona {
    pub fn shipped(kind: PersonaKind) -> Self {
        match kind {
            PersonaKind::Reserved => Persona {
                kind,
                elaboration_compliance: 0.5,
                breadth_compliance: 0.6,
                dominant_bias: 0.0,
            },
            PersonaKind::IntuitionDominant | PersonaKind::EmotionDominant => Persona {
                kind,
                elaboration_compliance: 0.85,
                breadth_compliance: 0.8,
                dominant_bias: 0.5,
            },
        }
    }

    /// Always answers on-topic and always elaborates.
    pub fn compliant(kind: PersonaKind) -> Self {
        Persona { kind, elaboration_compliance: 1.0, breadth_compliance: 1.0, dominant_bias: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("elaboration_compliance", self.elaboration_compliance),
            ("breadth_compliance", self.breadth_compliance),
            ("dominant_bias", self.dominant_bias),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("{name} {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

const EMO_ADJ: &[&str] = &["scared", "nervous", "excited", "worried", "happy", "afraid", "anxious", "proud", "lonely", "sad"];
const EMO_NOUN: &[&str] = &["joy", "love", "fear", "worry"];
const EMO_OBJ: &[&str] = &["this big step", "leaving home", "the change", "a fresh start", "the people around me", "my family here"];

const INT_VERB: &[&str] = &["saw", "heard", "watched"];
const INT_OBJ: &[&str] = &[
    "the quiet streets",
    "the old harbor",
    "the bright lights of the station",
    "my friends talk about it",
    "the loud crowd at the square",
];

const EXT_NOUN: &[&str] = &["job", "cost", "rent", "visa", "salary", "budget", "commute", "mortgage", "contract", "career"];

const FILLER: &[&str] = &["Not really.", "Nothing else.", "Hmm."];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).copied().expect("non-empty pool")
}

fn two<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> (&'a str, &'a str) {
    let v: Vec<_> = pool.choose_multiple(rng, 2).copied().collect();
    (v[0], v[1])
}

/// A stateful participant: remembers its own thoughts so it can tell when
/// one of them is being probed.
#[derive(Debug, Clone)]
pub struct SimulatedParticipant {
    persona: Persona,
    rng: ChaCha8Rng,
    thoughts: Vec<(String, Mode)>,
}

impl SimulatedParticipant {
    pub fn new(persona: Persona, seed: u64) -> Self {
        Self { persona, rng: ChaCha8Rng::seed_from_u64(seed), thoughts: Vec::new() }
    }

    pub fn persona(&self) -> &Persona {
        &self.persona
    }

    fn thought(&mut self, mode: Mode) -> String {
        let r = &mut self.rng;
        let s = if self.persona.kind == PersonaKind::Reserved {
            match mode {
                Mode::Emotional => format!("I am a bit {} about all of this, to be honest with you here.", pick(r, EMO_ADJ)),
                Mode::Intuitive => format!("There was a trip there many years ago, {} to add on it.", pick(r, &["nothing much", "not a lot"])),
                Mode::Cognitive => format!("The {} here is what it is, not much to add on that one.", pick(r, EXT_NOUN)),
            }
        } else {
            match (mode, r.gen_range(0..3)) {
                (Mode::Emotional, 0) => format!("I am {} about {}.", pick(r, EMO_ADJ), pick(r, EMO_OBJ)),
                (Mode::Emotional, 1) => {
                    let (a, b) = two(r, EMO_NOUN);
                    format!("My heart is full of {a} and {b}.")
                }
                (Mode::Emotional, _) => {
                    let (a, b) = two(r, EMO_ADJ);
                    format!("I am {a} and {b} about {}.", pick(r, EMO_OBJ))
                }
                (Mode::Intuitive, 0) => format!("I remember when I {} {} years ago.", pick(r, INT_VERB), pick(r, INT_OBJ)),
                (Mode::Intuitive, 1) => format!("Years ago I went there once before and I saw {}.", pick(r, INT_OBJ)),
                (Mode::Intuitive, _) => format!("Before this, my brother moved away and I heard {}.", pick(r, INT_OBJ)),
                (Mode::Cognitive, 0) => format!("The {} matters, so I think I should consider it carefully.", pick(r, EXT_NOUN)),
                (Mode::Cognitive, 1) => {
                    let (a, b) = two(r, EXT_NOUN);
                    format!("I need to know if the {a} and the {b} could work out.")
                }
                (Mode::Cognitive, _) => format!("The {} would decide a lot, which means I must weigh the options.", pick(r, EXT_NOUN)),
            }
        };
        self.thoughts.push((s.trim_end_matches('.').to_lowercase(), mode));
        s
    }

    fn elaboration(&mut self, mode: Mode) -> String {
        let r = &mut self.rng;
        if self.persona.kind == PersonaKind::Reserved {
            return "It is just a small part of the whole thing for me.".to_string();
        }
        match mode {
            Mode::Emotional => {
                let (a, b) = two(r, EMO_ADJ);
                format!("Deep down I am {a} and {b}.")
            }
            Mode::Intuitive => {
                let (a, b) = two(r, INT_OBJ);
                format!("Back then I saw {a} and I heard {b}.")
            }
            Mode::Cognitive => format!("I believe the {} should be the deciding reason.", pick(r, EXT_NOUN)),
        }
    }

    fn filler(&mut self) -> String {
        pick(&mut self.rng, FILLER).to_string()
    }

    /// The free-written unaided reflection.
    pub fn unaided(&mut self) -> String {
        let mut parts = Vec::new();
        match self.persona.kind.dominant() {
            Some(d) => {
                parts.push(self.thought(d));
                parts.push(self.elaboration(d));
                parts.push(self.thought(d));
                parts.push(self.thought(Mode::Cognitive));
            }
            None => {
                parts.push(self.thought(Mode::Cognitive));
                parts.push(self.thought(Mode::Emotional));
                parts.push(self.elaboration(Mode::Cognitive));
            }
        }
        parts.join(" ")
    }

    /// Which mode a question is asking about, judged from its wording.
    pub fn classify_question(question: &str) -> Mode {
        let q = question.to_lowercase();
        let has = |words: &[&str]| words.iter().any(|w| q.contains(w));
        if has(&["gut", "feeling", "heart", "emotion"]) {
            Mode::Emotional
        } else if has(&["experience", "stories", "lessons", "past", "remember"]) {
            Mode::Intuitive
        } else {
            Mode::Cognitive
        }
    }

    /// Answers one question.
    pub fn respond(&mut self, question: &str) -> String {
        let q = question.to_lowercase();
        let probed = self.thoughts.iter().rev().find(|(t, _)| q.contains(t.as_str())).map(|(_, m)| *m);
        let dominant = self.persona.kind.dominant();
        let mut parts = Vec::new();
        let answered_in = match probed {
            Some(mode) => {
                if self.rng.gen_bool(self.persona.elaboration_compliance) {
                    parts.push(self.elaboration(mode));
                    Some(mode)
                } else {
                    None
                }
            }
            None => {
                let asked = Self::classify_question(question);
                if self.rng.gen_bool(self.persona.breadth_compliance) {
                    parts.push(self.thought(asked));
                    Some(asked)
                } else {
                    None
                }
            }
        };
        match (answered_in, dominant) {
            (None, Some(d)) => parts.push(self.thought(d)),
            (Some(m), Some(d)) if m != d && self.rng.gen_bool(self.persona.dominant_bias) => parts.push(self.thought(d)),
            _ => {}
        }
        if parts.is_empty() {
            parts.push(self.filler());
        }
        parts.join(" ")
    }
}
