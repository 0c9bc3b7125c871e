use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::RetrievalError;

/// One scored passage in a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub id: String,
    pub score: f64,
}

impl RankedEntry {
    pub fn new(id: impl Into<String>, score: f64) -> Self {
        Self {
            id: id.into(),
            score,
        }
    }
}

/// Ordered passage ids with non-increasing scores and no duplicate ids.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<RankedEntry>", into = "Vec<RankedEntry>")]
pub struct RankedList {
    entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn new(entries: Vec<RankedEntry>) -> Result<Self, RetrievalError> {
        let mut seen = HashSet::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if !seen.insert(e.id.as_str()) {
                return Err(RetrievalError::InvalidRanking(format!(
                    "duplicate passage id {:?}",
                    e.id
                )));
            }
            if e.score.is_nan() {
                return Err(RetrievalError::InvalidRanking(format!(
                    "NaN score for {:?}",
                    e.id
                )));
            }
            if i > 0 && entries[i - 1].score < e.score {
                return Err(RetrievalError::InvalidRanking(format!(
                    "score increases at position {i} ({:?})",
                    e.id
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Sorts by score descending, ties by ascending id. Ids must already be unique.
    pub(crate) fn from_unsorted(mut entries: Vec<RankedEntry>) -> Self {
        entries.sort_by(cmp_entries);
        debug_assert!({
            let mut seen = HashSet::new();
            entries.iter().all(|e| seen.insert(e.id.clone()))
        });
        Self { entries }
    }

    /// Rank-only list: the i-th distinct id (1-based) gets score `1 / i`.
    /// Repeated ids keep their first position.
    pub fn from_ranked_ids<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for id in ids {
            let id = id.into();
            if seen.insert(id.clone()) {
                let rank = entries.len() + 1;
                entries.push(RankedEntry::new(id, 1.0 / rank as f64));
            }
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RankedEntry> {
        self.entries.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncate(&mut self, k: usize) {
        self.entries.truncate(k);
    }

    pub fn into_entries(self) -> Vec<RankedEntry> {
        self.entries
    }
}

impl TryFrom<Vec<RankedEntry>> for RankedList {
    type Error = RetrievalError;

    fn try_from(entries: Vec<RankedEntry>) -> Result<Self, Self::Error> {
        Self::new(entries)
    }
}

impl From<RankedList> for Vec<RankedEntry> {
    fn from(list: RankedList) -> Self {
        list.entries
    }
}

impl<'a> IntoIterator for &'a RankedList {
    type Item = &'a RankedEntry;
    type IntoIter = std::slice::Iter<'a, RankedEntry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

pub(crate) fn cmp_entries(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id))
}
