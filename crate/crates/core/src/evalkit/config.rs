use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::agent::{AgentConfig, PromptTemplates};
use crate::llm::{HttpLlm, HttpLlmConfig, LlmClient, MockLlm, MockScript};
use crate::retrieval::Bm25Params;

/// Engine configuration file (TOML). Every section is optional.
///
/// ```toml
/// prompt_dir = "prompts"
///
/// [bm25]
/// k1 = 1.2
/// b = 0.75
///
/// [agent]
/// max_steps = 2
/// k = 10
///
/// [agent.hybrid]
/// kappa = 60.0
///
/// [agent.expansion]
/// beam_width = 4
/// max_depth = 2
///
/// [llm]
/// endpoint = "http://localhost:8000/v1"
/// model = "my-instruct-model"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub bm25: Bm25Params,
    pub agent: AgentConfig,
    pub llm: HttpLlmConfig,
    /// Directory with replacement prompt templates.
    pub prompt_dir: Option<PathBuf>,
    /// Questions evaluated concurrently by `batch`.
    pub batch_workers: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            bm25: Bm25Params::default(),
            agent: AgentConfig::default(),
            llm: HttpLlmConfig::default(),
            prompt_dir: None,
            batch_workers: 4,
        }
    }
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self, EvalError> {
        let cfg: Self = toml::from_str(text).map_err(|e| EvalError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvalError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, EvalError> {
        toml::to_string(self).map_err(|e| EvalError::Format(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        self.agent
            .validate()
            .map_err(|e| EvalError::Config(e.to_string()))?;
        if self.batch_workers == 0 {
            return Err(EvalError::Config("batch_workers must be at least 1".into()));
        }
        if !(self.bm25.k1 >= 0.0) || !(0.0..=1.0).contains(&self.bm25.b) {
            return Err(EvalError::Config("bm25 needs k1 >= 0 and 0 <= b <= 1".into()));
        }
        Ok(())
    }

    pub fn prompts(&self) -> Result<PromptTemplates, EvalError> {
        match &self.prompt_dir {
            Some(dir) => PromptTemplates::from_dir(dir).map_err(|e| EvalError::Config(e.to_string())),
            None => Ok(PromptTemplates::default()),
        }
    }

    /// The mock backend when a script is given, else the HTTP backend.
    pub fn build_llm(&self, mock_script: Option<&Path>) -> Result<Arc<dyn LlmClient>, EvalError> {
        let llm: Arc<dyn LlmClient> = match mock_script {
            Some(path) => Arc::new(MockLlm::new(
                MockScript::from_file(path).map_err(|e| EvalError::Config(e.to_string()))?,
            )),
            None => Arc::new(
                HttpLlm::new(self.llm.clone()).map_err(|e| EvalError::Config(e.to_string()))?,
            ),
        };
        Ok(llm)
    }
}
