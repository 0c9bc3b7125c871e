use std::collections::HashMap;

use super::{RankedEntry, RankedList};

pub const DEFAULT_RRF_KAPPA: f64 = 60.0;

/// Reciprocal Rank Fusion: each id scores Σ 1/(kappa + rank) over the lists
/// containing it, with 1-based ranks. Ties are broken by ascending id.
pub fn rrf_fuse(lists: &[RankedList], kappa: f64) -> RankedList {
    debug_assert!(kappa > 0.0);
    let mut scores: HashMap<&str, f64> = HashMap::new();
    for list in lists {
        for (i, e) in list.iter().enumerate() {
            *scores.entry(e.id.as_str()).or_default() += 1.0 / (kappa + (i + 1) as f64);
        }
    }
    RankedList::from_unsorted(
        scores
            .into_iter()
            .map(|(id, score)| RankedEntry::new(id, score))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(l: &RankedList) -> Vec<&str> {
        l.ids().collect()
    }

    #[test]
    fn single_list_keeps_order() {
        let l = RankedList::from_ranked_ids(["a", "b"]);
        let f = rrf_fuse(&[l], 60.0);
        assert_eq!(ids(&f), ["a", "b"]);
        assert_eq!(f.entries()[0].score, 1.0 / 61.0);
        assert_eq!(f.entries()[1].score, 1.0 / 62.0);
    }

    #[test]
    fn symmetric_lists_tie_by_id() {
        let f = rrf_fuse(
            &[
                RankedList::from_ranked_ids(["a", "b"]),
                RankedList::from_ranked_ids(["b", "a"]),
            ],
            60.0,
        );
        assert_eq!(ids(&f), ["a", "b"]);
        assert_eq!(f.entries()[0].score, f.entries()[1].score);
        assert!((f.entries()[0].score - (1.0 / 61.0 + 1.0 / 62.0)).abs() < 1e-15);
    }

    #[test]
    fn empty_inputs_contribute_nothing() {
        let f = rrf_fuse(&[RankedList::default(), RankedList::from_ranked_ids(["z"])], 60.0);
        assert_eq!(ids(&f), ["z"]);
        assert!(rrf_fuse(&[RankedList::default()], 60.0).is_empty());
    }
}
