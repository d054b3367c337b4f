use std::collections::HashMap;

use super::Example;

pub const PAD: usize = 0;
pub const UNK: usize = 1;

/// Lower-cased token index. Index 0 is padding and 1 is unknown; the rest are
/// assigned in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::from_tokens(Vec::new())
    }
}

impl Vocabulary {
    pub fn build<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut v = Self::default();
        for s in sentences {
            for t in s {
                v.insert(t);
            }
        }
        v
    }

    /// Rebuilds from the word list (indices ≥ 2, in order).
    pub fn from_tokens(words: Vec<String>) -> Self {
        let mut v = Self { tokens: vec!["<pad>".into(), "<unk>".into()], index: HashMap::new() };
        for w in words {
            v.insert(&w);
        }
        v
    }

    fn insert(&mut self, token: &str) -> usize {
        let key = token.to_lowercase();
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.tokens.len();
        self.index.insert(key.clone(), i);
        self.tokens.push(key);
        i
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(&token.to_lowercase()).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Words with index ≥ 2.
    pub fn words(&self) -> &[String] {
        &self.tokens[2..]
    }

    pub fn encode(&self, examples: &mut [Example]) {
        for e in examples {
            e.token_ids = e.tokens.iter().map(|t| self.id(t)).collect();
        }
    }
}
