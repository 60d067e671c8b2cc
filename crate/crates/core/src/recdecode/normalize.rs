use serde::{Deserialize, Serialize};

/// Text comparison policy applied before evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizePolicy {
    Keep,
    Lowercase,
    /// Alphanumeric characters only, lowercased.
    #[default]
    AlnumLower,
}

pub fn normalize_text(text: &str, policy: NormalizePolicy) -> String {
    match policy {
        NormalizePolicy::Keep => text.to_string(),
        NormalizePolicy::Lowercase => text.to_lowercase(),
        NormalizePolicy::AlnumLower => text.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alnum_lower() {
        assert_eq!(normalize_text("AbC-1", NormalizePolicy::AlnumLower), "abc1");
        assert_eq!(normalize_text("", NormalizePolicy::AlnumLower), "");
        assert_eq!(normalize_text("Straße!", NormalizePolicy::Lowercase), "straße!");
    }

    proptest! {
        #[test]
        fn keep_is_identity(s in ".*") {
            prop_assert_eq!(normalize_text(&s, NormalizePolicy::Keep), s);
        }
    }
}
