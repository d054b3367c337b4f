use std::fs;
use std::path::Path;

use super::{Example, Polarity, Span};
use crate::error::{Error, Result};

const MARKER: &str = "$T$";

/// One three-line record: sentence with `$T$` marker, aspect term, polarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRecord {
    pub sentence: String,
    pub aspect: String,
    pub polarity: Polarity,
    /// 1-based line of the sentence in the source file.
    pub line: usize,
}

impl RawRecord {
    /// Sentence with the marker replaced by the aspect term.
    pub fn text(&self) -> String {
        self.sentence.replacen(MARKER, &self.aspect, 1)
    }

    /// Whitespace tokenization with the aspect span located by marker position.
    /// Parses are not available on this path, so every head is `None`.
    pub fn to_whitespace_example(&self) -> Example {
        let (left, right) = self.sentence.split_once(MARKER).expect("validated at load");
        let mut tokens: Vec<String> = left.split_whitespace().map(str::to_owned).collect();
        let from = tokens.len();
        tokens.extend(self.aspect.split_whitespace().map(str::to_owned));
        let to = tokens.len();
        tokens.extend(right.split_whitespace().map(str::to_owned));
        let heads = vec![None; tokens.len()];
        Example { tokens, token_ids: Vec::new(), heads, aspect: Span::new(from, to), label: self.polarity }
    }
}

pub fn load_raw_dataset(path: &Path) -> Result<Vec<RawRecord>> {
    let text = fs::read_to_string(path)?;
    parse_raw(&text, &path.display().to_string())
}

pub(crate) fn parse_raw(text: &str, source: &str) -> Result<Vec<RawRecord>> {
    let mut lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    let err = |line: usize, msg: String| Error::Parse { path: source.to_owned(), line, msg };
    if !lines.len().is_multiple_of(3) {
        return Err(err(lines.len(), format!("{} lines is not a multiple of 3", lines.len())));
    }
    lines
        .chunks(3)
        .enumerate()
        .map(|(k, chunk)| {
            let line = 3 * k + 1;
            let sentence = chunk[0].trim();
            if sentence.matches(MARKER).count() != 1 {
                return Err(err(line, format!("sentence must contain exactly one `{MARKER}` marker")));
            }
            let aspect = chunk[1].trim();
            if aspect.is_empty() {
                return Err(err(line + 1, "empty aspect term".into()));
            }
            let code = chunk[2].trim();
            let polarity =
                Polarity::from_raw(code).ok_or_else(|| err(line + 2, format!("invalid polarity `{code}`")))?;
            Ok(RawRecord { sentence: sentence.to_owned(), aspect: aspect.to_owned(), polarity, line })
        })
        .collect()
}
