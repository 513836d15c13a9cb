//! Service configuration, read from a TOML file.
//!
//! ```toml
//! epsilon = 0.5
//! discount_factor = 0.5
//! min_turns = 10
//! assignment_seed = 42
//! agent_seed = 7
//! backend = "mock"          # or "http"
//! data_dir = "sessions"
//! admin_token = "change-me"
//!
//! [llm]
//! endpoint_url = "http://127.0.0.1:11434/v1/chat/completions"
//! model_name = "phi-4"
//! temperature = 0.0
//! timeout = 60
//! max_retries = 2
//! max_in_flight = 4
//! ```
//!
//! Every key is optional; the values above are the defaults except for
//! `data_dir` and `admin_token`, which are unset by default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{BackendConfig, Gateway};
use crate::policy::PolicyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub epsilon: f64,
    pub discount_factor: f64,
    pub minimal_elaboration_threshold: usize,
    pub coherence_stickiness: f64,
    pub min_turns: usize,
    /// Seeds condition assignment and session ids.
    pub assignment_seed: u64,
    /// Base seed for per-session policy generators.
    pub agent_seed: u64,
    pub require_pre_questionnaire: bool,
    pub backend: BackendKind,
    pub llm: BackendConfig,
    pub data_dir: Option<PathBuf>,
    pub admin_token: Option<String>,
    pub bind: String,
    pub exploration_bank: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            discount_factor: 0.5,
            minimal_elaboration_threshold: 0,
            coherence_stickiness: 1.0,
            min_turns: 10,
            assignment_seed: 42,
            agent_seed: 7,
            require_pre_questionnaire: true,
            backend: BackendKind::Mock,
            llm: BackendConfig::default(),
            data_dir: None,
            admin_token: None,
            bind: "127.0.0.1:8080".to_string(),
            exploration_bank: None,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ServiceConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.policy(0).validate()?;
        self.llm.validate()
    }

    /// Policy settings for one session's generator seed.
    pub fn policy(&self, rng_seed: u64) -> PolicyConfig {
        PolicyConfig {
            epsilon: self.epsilon,
            discount_factor: self.discount_factor,
            minimal_elaboration_threshold: self.minimal_elaboration_threshold,
            coherence_stickiness: self.coherence_stickiness,
            rng_seed,
        }
    }

    pub fn gateway(&self) -> Result<Gateway> {
        match self.backend {
            BackendKind::Mock => Ok(Gateway::mock()),
            BackendKind::Http => Gateway::http(self.llm.clone().with_env_overrides()),
        }
    }
}
