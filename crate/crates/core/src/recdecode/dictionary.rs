use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DecodeError;

/// Class indices reserved for special tokens. Characters fill the remaining
/// indices in file order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialTokens {
    pub blank: Option<usize>,
    pub padding: Option<usize>,
    pub start: Option<usize>,
    pub end: Option<usize>,
    pub unknown: Option<usize>,
}

impl SpecialTokens {
    /// CTC layout: blank at index 0.
    pub fn ctc() -> Self {
        Self { blank: Some(0), ..Default::default() }
    }

    fn named(&self) -> [(&'static str, Option<usize>); 5] {
        [
            ("blank", self.blank),
            ("padding", self.padding),
            ("start", self.start),
            ("end", self.end),
            ("unknown", self.unknown),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slot {
    Char(String),
    Special(&'static str),
}

/// Bijective mapping between class indices and symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    slots: Vec<Slot>,
    index: HashMap<String, usize>,
    specials: SpecialTokens,
    longest_symbol: usize,
}

impl Dictionary {
    pub fn new<S: Into<String>>(
        characters: impl IntoIterator<Item = S>,
        specials: SpecialTokens,
    ) -> Result<Self, DecodeError> {
        let chars: Vec<String> = characters.into_iter().map(Into::into).collect();
        let reserved: Vec<(&'static str, usize)> =
            specials.named().into_iter().filter_map(|(n, i)| i.map(|i| (n, i))).collect();
        let total = chars.len() + reserved.len();
        let mut slots: Vec<Option<Slot>> = vec![None; total];
        for &(name, idx) in &reserved {
            if idx >= total {
                return Err(DecodeError::Dictionary(format!(
                    "{name} index {idx} out of range for {total} classes"
                )));
            }
            if slots[idx].is_some() {
                return Err(DecodeError::Dictionary(format!("{name} index {idx} reused")));
            }
            slots[idx] = Some(Slot::Special(name));
        }
        let mut index = HashMap::with_capacity(chars.len());
        let mut free = (0..total).filter(|&i| slots[i].is_none()).collect::<Vec<_>>().into_iter();
        let mut longest_symbol = 0;
        for (line, ch) in chars.into_iter().enumerate() {
            if ch.is_empty() {
                return Err(DecodeError::Dictionary(format!("symbol {} is empty", line + 1)));
            }
            let idx = free.next().expect("one free slot per character");
            if index.insert(ch.clone(), idx).is_some() {
                return Err(DecodeError::Dictionary(format!("duplicate symbol {ch:?}")));
            }
            longest_symbol = longest_symbol.max(ch.chars().count());
            slots[idx] = Some(Slot::Char(ch));
        }
        Ok(Self {
            slots: slots.into_iter().map(|s| s.expect("all slots filled")).collect(),
            index,
            specials,
            longest_symbol,
        })
    }

    /// Parses a dictionary file body: one UTF-8 symbol per line, line order
    /// is index order among the characters.
    pub fn parse(text: &str, specials: SpecialTokens) -> Result<Self, DecodeError> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let body = text.strip_suffix('\n').unwrap_or(text);
        if body.is_empty() {
            return Self::new(Vec::<String>::new(), specials);
        }
        Self::new(body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()), specials)
    }

    pub fn from_file(path: &Path, specials: SpecialTokens) -> Result<Self, DecodeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DecodeError::Dictionary(format!("{}: {e}", path.display())))?;
        Self::parse(&text, specials)
    }

    /// Number of classes, specials included.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn specials(&self) -> &SpecialTokens {
        &self.specials
    }

    pub fn symbol(&self, idx: usize) -> Option<&str> {
        match self.slots.get(idx)? {
            Slot::Char(s) => Some(s),
            Slot::Special(_) => None,
        }
    }

    pub fn is_special(&self, idx: usize) -> bool {
        matches!(self.slots.get(idx), Some(Slot::Special(_)))
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    /// Encodes text by longest-match over symbols. Unknown characters map to
    /// the unknown index when one is configured.
    pub fn encode(&self, text: &str) -> Result<Vec<usize>, DecodeError> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut out = Vec::with_capacity(chars.len());
        let mut i = 0;
        while i < chars.len() {
            let max = self.longest_symbol.min(chars.len() - i).max(1);
            let mut matched = None;
            for len in (1..=max).rev() {
                let start = chars[i].0;
                let end = chars.get(i + len).map_or(text.len(), |c| c.0);
                if let Some(idx) = self.index_of(&text[start..end]) {
                    matched = Some((idx, len));
                    break;
                }
            }
            match (matched, self.specials.unknown) {
                (Some((idx, len)), _) => {
                    out.push(idx);
                    i += len;
                }
                (None, Some(unk)) => {
                    out.push(unk);
                    i += 1;
                }
                (None, None) => return Err(DecodeError::UnknownSymbol(chars[i].1.to_string())),
            }
        }
        Ok(out)
    }

    /// Concatenates the symbols of `indices`, skipping special tokens.
    pub fn decode(&self, indices: &[usize]) -> String {
        indices.iter().filter_map(|&i| self.symbol(i)).collect()
    }

    pub(crate) fn require(&self, name: &'static str, idx: Option<usize>) -> Result<usize, DecodeError> {
        idx.ok_or(DecodeError::MissingSpecial(name))
    }
}
