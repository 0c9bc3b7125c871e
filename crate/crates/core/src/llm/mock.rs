use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LlmClient, LlmError, LlmRequest, LlmResponse};

/// Stable 16-hex-digit fingerprint of a request's system and user prompts.
pub fn fingerprint(req: &LlmRequest) -> String {
    let mut h = Sha256::new();
    h.update(req.system.as_deref().unwrap_or("").as_bytes());
    h.update([0x1f]);
    h.update(req.user.as_bytes());
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// One substring or a list of substrings that must all occur in the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubstringMatcher {
    One(String),
    All(Vec<String>),
}

impl SubstringMatcher {
    pub fn matches(&self, prompt: &str) -> bool {
        match self {
            Self::One(s) => prompt.contains(s.as_str()),
            Self::All(v) => v.iter().all(|s| prompt.contains(s.as_str())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    pub contains: SubstringMatcher,
    pub response: String,
}

/// Response script. Lookup order: exact fingerprint, then the first rule
/// whose matcher accepts the user prompt, then `default`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub fingerprints: BTreeMap<String, String>,
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default)]
    pub default: Option<String>,
}

impl MockScript {
    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        serde_json::from_str(text).map_err(|e| LlmError::Config(format!("mock script: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn rule(mut self, contains: impl Into<SubstringMatcherInput>, response: impl Into<String>) -> Self {
        self.rules.push(MockRule {
            contains: contains.into().0,
            response: response.into(),
        });
        self
    }

    pub fn with_default(mut self, response: impl Into<String>) -> Self {
        self.default = Some(response.into());
        self
    }

    pub fn with_fingerprint(mut self, fp: impl Into<String>, response: impl Into<String>) -> Self {
        self.fingerprints.insert(fp.into(), response.into());
        self
    }

    fn lookup(&self, req: &LlmRequest) -> Result<&str, LlmError> {
        let fp = fingerprint(req);
        if let Some(r) = self.fingerprints.get(&fp) {
            return Ok(r);
        }
        if let Some(rule) = self.rules.iter().find(|r| r.contains.matches(&req.user)) {
            return Ok(&rule.response);
        }
        self.default
            .as_deref()
            .ok_or(LlmError::Script { fingerprint: fp })
    }
}

/// Conversion helper so rules accept `&str` or a slice of `&str`.
pub struct SubstringMatcherInput(SubstringMatcher);

impl From<&str> for SubstringMatcherInput {
    fn from(s: &str) -> Self {
        Self(SubstringMatcher::One(s.to_string()))
    }
}

impl<const N: usize> From<[&str; N]> for SubstringMatcherInput {
    fn from(v: [&str; N]) -> Self {
        Self(SubstringMatcher::All(v.iter().map(|s| s.to_string()).collect()))
    }
}

/// Deterministic backend answering from a [`MockScript`]. Every request is
/// logged for inspection.
#[derive(Debug, Default)]
pub struct MockLlm {
    script: MockScript,
    log: Mutex<Vec<LlmRequest>>,
}

impl MockLlm {
    pub fn new(script: MockScript) -> Self {
        Self {
            script,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> Vec<LlmRequest> {
        self.log.lock().expect("mock log poisoned").clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().expect("mock log poisoned").len()
    }
}

impl LlmClient for MockLlm {
    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        req.validate()?;
        self.log.lock().expect("mock log poisoned").push(req.clone());
        let text = self.script.lookup(req)?.to_string();
        Ok(LlmResponse { text, usage: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_is_stable_and_prompt_sensitive() {
        let a = LlmRequest::new("P");
        assert_eq!(fingerprint(&a), fingerprint(&LlmRequest::new("P")));
        assert_eq!(fingerprint(&a).len(), 16);
        assert_ne!(fingerprint(&a), fingerprint(&LlmRequest::new("Q")));
        assert_ne!(fingerprint(&a), fingerprint(&a.clone().with_system("s")));
    }

    #[test]
    fn scripted_echo_by_fingerprint() {
        let req = LlmRequest::new("P");
        let mock = MockLlm::new(
            MockScript::default().with_fingerprint(fingerprint(&req), "Facts: (\"a\",\"b\",\"c\")"),
        );
        assert_eq!(mock.complete(&req).unwrap().text, "Facts: (\"a\",\"b\",\"c\")");
    }

    #[test]
    fn default_and_missing() {
        let mock = MockLlm::new(MockScript::default().with_default("{Yes}"));
        assert_eq!(mock.complete(&LlmRequest::new("unknown")).unwrap().text, "{Yes}");

        let bare = MockLlm::new(MockScript::default());
        let req = LlmRequest::new("unknown");
        match bare.complete(&req) {
            Err(LlmError::Script { fingerprint: fp }) => assert_eq!(fp, fingerprint(&req)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rules_match_in_order() {
        let mock = MockLlm::new(
            MockScript::default()
                .rule(["alpha", "beta"], "both")
                .rule("alpha", "one"),
        );
        assert_eq!(mock.complete(&LlmRequest::new("alpha beta")).unwrap().text, "both");
        assert_eq!(mock.complete(&LlmRequest::new("alpha")).unwrap().text, "one");
        assert_eq!(mock.call_count(), 2);
    }

    #[test]
    fn script_json_forms() {
        let s = MockScript::from_json(
            r#"{"rules":[{"contains":"x","response":"1"},{"contains":["y","z"],"response":"2"}],"default":"d"}"#,
        )
        .unwrap();
        assert_eq!(s.rules[1].contains, SubstringMatcher::All(vec!["y".into(), "z".into()]));
        assert_eq!(s.default.as_deref(), Some("d"));
    }
}
