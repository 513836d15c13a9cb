//! Batch A/B runs over the mock gateway.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analysis::{adjusted_rand_index, cohens_d, kmeans, mean, KMeans};
use super::persona::{Persona, PersonaKind, SimulatedParticipant};
use crate::agents::{self, TurnOutcome};
use crate::bank::ExplorationBank;
use crate::error::{Error, Result};
use crate::gateway::{ChatMessage, Gateway};
use crate::lexicon::{score, standardize_columns, CompositeScores, LexiconSet, Scaling};
use crate::policy::{ActionRecord, PolicyConfig};
use crate::profile::PatternModel;
use crate::session::{Condition, TopicCatalog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaWeight {
    pub persona: Persona,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_per_condition: usize,
    pub turns: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub personas: Vec<PersonaWeight>,
    /// Clusters for the unaided-profile k-means.
    pub k: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_per_condition: 64,
            turns: 10,
            epsilon: 0.5,
            seed: 42,
            personas: PersonaKind::ALL
                .iter()
                .map(|&k| PersonaWeight { persona: Persona::shipped(k), weight: 1.0 })
                .collect(),
            k: 3,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_condition == 0 {
            return Err(Error::validation("n must be at least 1"));
        }
        if self.turns == 0 {
            return Err(Error::validation("turns must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::validation("k must be at least 1"));
        }
        if self.personas.is_empty() {
            return Err(Error::validation("persona distribution is empty"));
        }
        for p in &self.personas {
            p.persona.validate()?;
            if !(p.weight.is_finite() && p.weight >= 0.0) {
                return Err(Error::validation(format!("weight {} must be finite and >= 0", p.weight)));
            }
        }
        if self.personas.iter().map(|p| p.weight).sum::<f64>() <= 0.0 {
            return Err(Error::validation("persona weights sum to zero"));
        }
        PolicyConfig { epsilon: self.epsilon, ..Default::default() }.validate()
    }

    /// Persona for each participant index, by largest-remainder allocation.
    pub fn allocate(&self) -> Vec<Persona> {
        let n = self.n_per_condition;
        let total: f64 = self.personas.iter().map(|p| p.weight).sum();
        let quotas: Vec<f64> = self.personas.iter().map(|p| n as f64 * p.weight / total).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
        let mut missing = n - counts.iter().sum::<usize>();
        for i in order.into_iter().cycle() {
            if missing == 0 {
                break;
            }
            counts[i] += 1;
            missing -= 1;
        }
        self.personas
            .iter()
            .zip(counts)
            .flat_map(|(p, c)| std::iter::repeat_n(p.persona, c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: usize,
    pub question: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionRecord>,
    pub scores: CompositeScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub participant: usize,
    pub condition: Condition,
    pub persona: PersonaKind,
    pub topic: String,
    pub unaided: String,
    pub unaided_scores: CompositeScores,
    pub turns: Vec<TurnRecord>,
    /// Scores of all assisted-phase responses taken together.
    pub assisted_scores: CompositeScores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_pattern: Option<PatternModel>,
    /// The agent ran out of actions before the last turn.
    pub ended_early: bool,
}

impl SessionRecord {
    pub fn assisted_text(&self) -> String {
        self.turns.iter().map(|t| t.response.as_str()).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub cluster: usize,
    pub condition: Condition,
    pub n: usize,
    pub unaided_mean_z: [f64; 3],
    pub assisted_mean_z: [f64; 3],
    pub delta: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaSummary {
    pub persona: PersonaKind,
    pub condition: Condition,
    pub n: usize,
    /// Raw composite percentages.
    pub unaided_mean: [f64; 3],
    pub assisted_mean: [f64; 3],
    pub unaided_mean_z: [f64; 3],
    pub assisted_mean_z: [f64; 3],
    /// Dominant dimension of the mean z-scores, as an index into
    /// cognitive, emotional, intuitive. Raw percentages are not compared
    /// across dimensions because each stem list has its own base rate.
    pub unaided_argmax: usize,
    pub assisted_argmax: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub assisted_mean_z: [f64; 3],
    /// max − min of `assisted_mean_z`.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    /// Per session, in report order: unaided then assisted z-scores, pooled over both phases.
    pub unaided_z: Vec<[f64; 3]>,
    pub assisted_z: Vec<[f64; 3]>,
    pub clusters: KMeans<3>,
    /// Agreement between k-means clusters and persona labels.
    pub cluster_persona_ari: f64,
    pub groups: Vec<GroupSummary>,
    pub personas: Vec<PersonaSummary>,
    pub conditions: Vec<ConditionSummary>,
    /// Experimental vs baseline on assisted z-scores; `None` when undefined.
    pub cohens_d: [Option<f64>; 3],
    /// Per cluster, experimental vs baseline on the unaided-to-assisted change.
    pub cluster_cohens_d: Vec<[Option<f64>; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub sessions: Vec<SessionRecord>,
    pub analysis: Analysis,
}

/// Stateless 64-bit mixer for deriving per-session seeds.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}

struct Spec {
    participant: usize,
    condition: Condition,
    persona: Persona,
    topic: String,
    participant_seed: u64,
    agent_seed: u64,
}

fn run_session(spec: &Spec, config: &ExperimentConfig, gateway: &Gateway, bank: &ExplorationBank, lexicon: &LexiconSet) -> Result<SessionRecord> {
    let mut person = SimulatedParticipant::new(spec.persona, spec.participant_seed);
    let unaided = person.unaided();
    let mut turns = Vec::with_capacity(config.turns);
    let mut final_pattern = None;
    let mut ended_early = false;
    match spec.condition {
        Condition::Experimental => {
            let policy = PolicyConfig { epsilon: config.epsilon, rng_seed: spec.agent_seed, ..Default::default() };
            let mut state = agents::experimental_init(gateway, &unaided, &spec.topic, &policy)?;
            let mut last_response: Option<String> = None;
            for turn in 1..=config.turns {
                let (outcome, next) = agents::experimental_turn(gateway, bank, state, last_response.as_deref(), &policy)?;
                state = next;
                let TurnOutcome::Question(q) = outcome else {
                    last_response = None;
                    ended_early = true;
                    break;
                };
                let response = person.respond(&q.question);
                turns.push(TurnRecord { turn, scores: score(&response, lexicon), question: q.question, response: response.clone(), action: q.record });
                last_response = Some(response);
            }
            if let Some(r) = last_response {
                agents::absorb_response(gateway, &mut state, &r, &policy)?;
            }
            final_pattern = Some(state.pattern.clone());
        }
        Condition::Baseline => {
            let mut history = vec![ChatMessage::user(unaided.clone())];
            for turn in 1..=config.turns {
                let q = agents::baseline_turn(gateway, &history, &spec.topic)?;
                let response = person.respond(&q.question);
                history.push(ChatMessage::assistant(q.question.clone()));
                history.push(ChatMessage::user(response.clone()));
                turns.push(TurnRecord { turn, scores: score(&response, lexicon), question: q.question, response, action: None });
            }
        }
    }
    let mut record = SessionRecord {
        participant: spec.participant,
        condition: spec.condition,
        persona: spec.persona.kind,
        topic: spec.topic.clone(),
        unaided_scores: score(&unaided, lexicon),
        unaided,
        turns,
        assisted_scores: CompositeScores::default(),
        final_pattern,
        ended_early,
    };
    record.assisted_scores = score(&record.assisted_text(), lexicon);
    Ok(record)
}

/// Simulates `n_per_condition` participants under each condition.
///
/// Participant `i` has the same persona, topic and unaided text in both
/// conditions; only the agent differs. Deterministic given the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    run_experiment_with(config, &Gateway::mock(), &ExplorationBank::embedded(), &LexiconSet::embedded())
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    gateway: &Gateway,
    bank: &ExplorationBank,
    lexicon: &LexiconSet,
) -> Result<RunReport> {
    config.validate()?;
    let catalog = TopicCatalog::default();
    let topics = catalog.entries();
    let personas = config.allocate();
    let mut specs = Vec::with_capacity(2 * personas.len());
    for (cond_ix, condition) in [Condition::Experimental, Condition::Baseline].into_iter().enumerate() {
        for (i, persona) in personas.iter().enumerate() {
            let topic_draw = derive(config.seed, &[1, i as u64]);
            specs.push(Spec {
                participant: i,
                condition,
                persona: *persona,
                topic: topics[(topic_draw % topics.len() as u64) as usize].topic.clone(),
                participant_seed: derive(config.seed, &[2, i as u64]),
                agent_seed: derive(config.seed, &[3, cond_ix as u64, i as u64]),
            });
        }
    }
    let sessions = specs
        .par_iter()
        .map(|s| run_session(s, config, gateway, bank, lexicon))
        .collect::<Result<Vec<_>>>()?;
    let analysis = analyze_sessions(&sessions, config.k, config.seed)?;
    Ok(RunReport { config: config.clone(), sessions, analysis })
}

/// Re-scores every transcript with `lexicon` and recomputes the analysis.
pub fn analyze(report: &RunReport, lexicon: &LexiconSet) -> Result<RunReport> {
    let sessions: Vec<SessionRecord> = report
        .sessions
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.unaided_scores = score(&s.unaided, lexicon);
            for t in &mut s.turns {
                t.scores = score(&t.response, lexicon);
            }
            s.assisted_scores = score(&s.assisted_text(), lexicon);
            s
        })
        .collect();
    let analysis = analyze_sessions(&sessions, report.config.k, report.config.seed)?;
    Ok(RunReport { config: report.config.clone(), sessions, analysis })
}

fn argmax(v: &[f64; 3]) -> usize {
    (0..3).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

fn column_mean(rows: &[[f64; 3]]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (d, o) in out.iter_mut().enumerate() {
        *o = mean(&rows.iter().map(|r| r[d]).collect::<Vec<_>>());
    }
    out
}

fn d_per_dimension(a: &[[f64; 3]], b: &[[f64; 3]]) -> [Option<f64>; 3] {
    let col = |rows: &[[f64; 3]], d: usize| rows.iter().map(|r| r[d]).collect::<Vec<_>>();
    [0, 1, 2].map(|d| cohens_d(&col(a, d), &col(b, d)).ok())
}

pub fn analyze_sessions(sessions: &[SessionRecord], k: usize, seed: u64) -> Result<Analysis> {
    let n = sessions.len();
    let mut pooled: Vec<[f64; 3]> = sessions.iter().map(|s| s.unaided_scores.as_array()).collect();
    pooled.extend(sessions.iter().map(|s| s.assisted_scores.as_array()));
    let z = standardize_columns(&pooled, Scaling::Population)?;
    let (unaided_z, assisted_z) = (z[..n].to_vec(), z[n..].to_vec());

    let clusters = kmeans(&unaided_z, k.min(n), seed)?;
    let persona_labels: Vec<usize> = sessions.iter().map(|s| s.persona as usize).collect();
    let cluster_persona_ari = adjusted_rand_index(&clusters.assignments, &persona_labels)?;

    let pick = |pred: &dyn Fn(usize) -> bool, rows: &[[f64; 3]]| -> Vec<[f64; 3]> {
        (0..n).filter(|&i| pred(i)).map(|i| rows[i]).collect()
    };
    let conditions = [Condition::Experimental, Condition::Baseline];

    let mut groups = Vec::new();
    let mut cluster_cohens_d = Vec::new();
    for c in 0..clusters.centroids.len() {
        let mut deltas = Vec::new();
        for condition in conditions {
            let sel = |i: usize| clusters.assignments[i] == c && sessions[i].condition == condition;
            let pre = pick(&sel, &unaided_z);
            if pre.is_empty() {
                deltas.push(Vec::new());
                continue;
            }
            let post = pick(&sel, &assisted_z);
            let (u, a) = (column_mean(&pre), column_mean(&post));
            groups.push(GroupSummary {
                cluster: c,
                condition,
                n: pre.len(),
                unaided_mean_z: u,
                assisted_mean_z: a,
                delta: [0, 1, 2].map(|d| a[d] - u[d]),
            });
            deltas.push(pre.iter().zip(&post).map(|(p, q)| [0, 1, 2].map(|d| q[d] - p[d])).collect());
        }
        cluster_cohens_d.push(d_per_dimension(&deltas[0], &deltas[1]));
    }

    let mut personas = Vec::new();
    for kind in PersonaKind::ALL {
        for condition in conditions {
            let sel = |i: usize| sessions[i].persona == kind && sessions[i].condition == condition;
            let idx: Vec<usize> = (0..n).filter(|&i| sel(i)).collect();
            if idx.is_empty() {
                continue;
            }
            let raw_pre: Vec<[f64; 3]> = idx.iter().map(|&i| sessions[i].unaided_scores.as_array()).collect();
            let raw_post: Vec<[f64; 3]> = idx.iter().map(|&i| sessions[i].assisted_scores.as_array()).collect();
            let (unaided_mean_z, assisted_mean_z) = (column_mean(&pick(&sel, &unaided_z)), column_mean(&pick(&sel, &assisted_z)));
            personas.push(PersonaSummary {
                persona: kind,
                condition,
                n: idx.len(),
                unaided_mean: column_mean(&raw_pre),
                assisted_mean: column_mean(&raw_post),
                unaided_mean_z,
                assisted_mean_z,
                unaided_argmax: argmax(&unaided_mean_z),
                assisted_argmax: argmax(&assisted_mean_z),
            });
        }
    }

    let mut condition_summaries = Vec::new();
    for condition in conditions {
        let rows = pick(&|i| sessions[i].condition == condition, &assisted_z);
        if rows.is_empty() {
            continue;
        }
        let m = column_mean(&rows);
        let spread = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - m.iter().cloned().fold(f64::INFINITY, f64::min);
        condition_summaries.push(ConditionSummary { condition, assisted_mean_z: m, spread });
    }

    let exp = pick(&|i| sessions[i].condition == Condition::Experimental, &assisted_z);
    let base = pick(&|i| sessions[i].condition == Condition::Baseline, &assisted_z);
    Ok(Analysis {
        unaided_z,
        assisted_z,
        clusters,
        cluster_persona_ari,
        groups,
        personas,
        conditions: condition_summaries,
        cohens_d: d_per_dimension(&exp, &base),
        cluster_cohens_d,
    })
}

impl Analysis {
    pub fn condition(&self, condition: Condition) -> Option<&ConditionSummary> {
        self.conditions.iter().find(|c| c.condition == condition)
    }

    pub fn persona(&self, persona: PersonaKind, condition: Condition) -> Option<&PersonaSummary> {
        self.personas.iter().find(|p| p.persona == persona && p.condition == condition)
    }
}
