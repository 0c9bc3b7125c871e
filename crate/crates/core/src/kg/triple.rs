use std::fmt;

use serde::{Deserialize, Serialize};

use super::KgError;

/// A (subject, predicate, object) fact. Fields are trimmed and non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTriple")]
pub struct Triple {
    subject: String,
    predicate: String,
    object: String,
}

#[derive(Deserialize)]
struct RawTriple {
    subject: String,
    predicate: String,
    object: String,
}

impl TryFrom<RawTriple> for Triple {
    type Error = KgError;

    fn try_from(raw: RawTriple) -> Result<Self, Self::Error> {
        Triple::new(raw.subject, raw.predicate, raw.object)
    }
}

impl Triple {
    pub fn new(
        subject: impl AsRef<str>,
        predicate: impl AsRef<str>,
        object: impl AsRef<str>,
    ) -> Result<Self, KgError> {
        let field = |name: &'static str, v: &str| {
            let v = v.trim();
            if v.is_empty() {
                Err(KgError::EmptyField(name))
            } else {
                Ok(v.to_string())
            }
        };
        Ok(Self {
            subject: field("subject", subject.as_ref())?,
            predicate: field("predicate", predicate.as_ref())?,
            object: field("object", object.as_ref())?,
        })
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn object(&self) -> &str {
        &self.object
    }

    /// The two entity positions (subject, object).
    pub fn entities(&self) -> [&str; 2] {
        [&self.subject, &self.object]
    }

    pub fn shares_entity(&self, other: &Triple) -> bool {
        self.entities()
            .iter()
            .any(|e| other.entities().contains(e))
    }

    /// Flat text used for sparse search: "subject predicate object".
    pub fn verbalize(&self) -> String {
        format!("{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// Renders as `(subject, predicate, object)`, the form used in prompts.
impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

pub fn verbalize_triple(t: &Triple) -> String {
    t.verbalize()
}
