use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;

const RESERVED: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];

/// Bidirectional token/id map. Ids 0..4 are the reserved control tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Keeps the most frequent tokens, up to `max_size` entries including the
    /// reserved ones. Equal counts are ordered lexicographically.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], max_size: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(invalid("cannot build a vocabulary from an empty corpus"));
        }
        if max_size < RESERVED.len() {
            return Err(invalid(format!(
                "vocabulary size {max_size} cannot hold the {} reserved tokens",
                RESERVED.len()
            )));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for tok in corpus.iter().flatten() {
            let tok = tok.as_ref();
            if !RESERVED.contains(&tok) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let keep = max_size - RESERVED.len();
        let tokens = RESERVED
            .iter()
            .map(|s| s.to_string())
            .chain(ranked.into_iter().take(keep).map(|(t, _)| t.to_string()))
            .collect();
        Self::from_tokens(tokens)
    }

    /// Rebuilds a vocabulary from its id-ordered token list.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < RESERVED.len() || tokens.iter().zip(RESERVED).any(|(t, r)| t != r) {
            return Err(invalid("vocabulary must start with <pad> <s> </s> <unk>"));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(invalid(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Id of `token`, or `<unk>`.
    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode<S: AsRef<str>>(&self, sentence: &[S]) -> Vec<u32> {
        sentence.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Maps ids back to tokens; unknown ids render as `<unk>`.
    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .map(|&i| self.token(i).unwrap_or(RESERVED[UNK as usize]).to_string())
            .collect()
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = crate::Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::from_tokens(v)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}
