//! Simulated participants and offline analysis.
//!
//! Personas emit template text salted with lexicon stems, so the lexicon
//! measures what each persona was built to express. Directional results
//! from these runs check the machinery end to end; they say nothing about
//! how people respond.

pub mod analysis;
pub mod experiment;
pub mod persona;
pub mod radar;

pub use analysis::{adjusted_rand_index, cohens_d, kmeans, KMeans};
pub use experiment::{
    analyze, run_experiment, run_experiment_with, Analysis, ExperimentConfig, PersonaWeight, RunReport, SessionRecord,
    TurnRecord,
};
pub use persona::{Mode, Persona, PersonaKind, SimulatedParticipant};
pub use radar::{export_radar, radar_rows, RadarRow};
