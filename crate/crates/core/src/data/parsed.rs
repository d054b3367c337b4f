use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Example, Polarity, Span};
use crate::error::{Error, Result};

/// Wire form of one parsed record (one JSON object per line).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParsedRecord {
    pub tokens: Vec<String>,
    pub heads: Vec<i64>,
    pub aspect_from: usize,
    pub aspect_to: usize,
    pub label: LabelField,
}

/// Labels are written as names; the raw integer encoding is accepted on read.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelField {
    Name(Polarity),
    Code(i64),
}

impl From<&Example> for ParsedRecord {
    fn from(e: &Example) -> Self {
        Self {
            tokens: e.tokens.clone(),
            heads: e.heads.iter().map(|h| h.map_or(-1, |h| h as i64)).collect(),
            aspect_from: e.aspect.from,
            aspect_to: e.aspect.to,
            label: LabelField::Name(e.label),
        }
    }
}

impl ParsedRecord {
    /// Validates the record against the example invariants.
    pub fn into_example(self, index: usize) -> Result<Example> {
        let bad = |field, msg: String| Error::Record { index, field, msg };
        let n = self.tokens.len();
        if n == 0 {
            return Err(bad("tokens", "empty sentence".into()));
        }
        if self.heads.len() != n {
            return Err(bad("heads", format!("{} heads for {n} tokens", self.heads.len())));
        }
        let mut heads = Vec::with_capacity(n);
        for (i, &h) in self.heads.iter().enumerate() {
            heads.push(match h {
                -1 => None,
                h if h < 0 || h as usize >= n => {
                    return Err(bad("heads", format!("head {h} of token {i} out of range")))
                }
                h if h as usize == i => return Err(bad("heads", format!("token {i} is its own head"))),
                h => Some(h as usize),
            });
        }
        if self.aspect_from >= self.aspect_to {
            return Err(bad("aspect_to", format!("empty aspect span {}..{}", self.aspect_from, self.aspect_to)));
        }
        if self.aspect_to > n {
            return Err(bad("aspect_to", format!("aspect end {} beyond {n} tokens", self.aspect_to)));
        }
        let label = match self.label {
            LabelField::Name(p) => p,
            LabelField::Code(c) => {
                Polarity::from_raw(&c.to_string()).ok_or_else(|| bad("label", format!("invalid polarity code {c}")))?
            }
        };
        Ok(Example {
            tokens: self.tokens,
            token_ids: Vec::new(),
            heads,
            aspect: Span::new(self.aspect_from, self.aspect_to),
            label,
        })
    }
}

pub fn load_parsed_dataset(path: &Path) -> Result<Vec<Example>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let index = out.len();
        let record: ParsedRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        out.push(record.into_example(index)?);
    }
    Ok(out)
}

pub fn write_parsed_dataset(path: &Path, examples: &[Example]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for e in examples {
        serde_json::to_writer(&mut w, &ParsedRecord::from(e))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
