//! Tokenization shared by every lexical component.
//!
//! Text is lowercased and split on any character that is not Unicode
//! alphanumeric. No stemming, no stopword removal.

/// Split `text` into lowercase alphanumeric tokens, in order of appearance.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Distinct tokens of `text` in first-occurrence order.
pub fn unique_tokens(text: &str) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    tokenize(text)
        .into_iter()
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowercases_and_splits_on_punctuation() {
        assert_eq!(
            tokenize("Edward L. Cahn (1899–1963)"),
            vec!["edward", "l", "cahn", "1899", "1963"]
        );
    }

    #[test]
    fn keeps_unicode_letters() {
        assert_eq!(tokenize("Zürich, São-Paulo"), vec!["zürich", "são", "paulo"]);
    }

    #[test]
    fn empty_and_symbol_only_inputs() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  --- ?! ").is_empty());
    }

    #[test]
    fn unique_preserves_first_occurrence() {
        assert_eq!(unique_tokens("b a B c a"), vec!["b", "a", "c"]);
    }
}
