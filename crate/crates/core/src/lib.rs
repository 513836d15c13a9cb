//! Adaptive conversational reflection engine.
//!
//! A user's pre-decisional reflection is modeled as a [`profile::ReflectionProfile`]
//! of categorized thoughts with child elaborations. Breadth, depth and
//! fixation indicators drive an epsilon-greedy explore/exploit questioning
//! policy ([`policy`]). Language generation and extraction sit behind the
//! [`gateway`], which ships a deterministic mock backend. The [`session`]
//! module runs the two-phase study protocol with an append-only event log,
//! [`lexicon`] scores reflective language, and [`sim`] runs simulated A/B
//! experiments with descriptive analysis.

pub mod agents;
pub mod bank;
pub mod baseline;
pub mod config;
pub mod error;
pub mod gateway;
pub mod lexicon;
pub mod policy;
pub mod profile;
pub mod session;
pub mod sim;

pub use error::{Error, Result};
pub use profile::{ReflectionProfile, ThoughtCategory};
