use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;

use super::vocab::{Vocabulary, PAD};
use crate::autodiff::Array;
use crate::error::{Error, Result};

/// Out-of-vocabulary rows are drawn from U(−OOV_RANGE, OOV_RANGE).
pub const OOV_RANGE: f64 = 0.25;

#[derive(Clone, Debug)]
pub struct PretrainedEmbeddings {
    /// |V|×d, row 0 zero.
    pub matrix: Array,
    pub matched: usize,
    /// Rows copied from the file.
    pub found: Vec<bool>,
}

impl PretrainedEmbeddings {
    /// Matched fraction of the non-reserved vocabulary.
    pub fn coverage(&self) -> f64 {
        let words = self.matrix.shape()[0].saturating_sub(2);
        if words == 0 {
            0.0
        } else {
            self.matched as f64 / words as f64
        }
    }

    pub fn coverage_report(&self) -> String {
        let words = self.matrix.shape()[0].saturating_sub(2);
        format!("{}/{words} words ({:.2}%) found in the vector file", self.matched, 100.0 * self.coverage())
    }

    /// All rows random except the zero padding row.
    pub fn random<R: Rng>(vocab_len: usize, dim: usize, rng: &mut R) -> Self {
        let mut matrix = Array::zeros(&[vocab_len, dim]);
        for x in matrix.data_mut()[dim..].iter_mut() {
            *x = rng.random_range(-OOV_RANGE..OOV_RANGE);
        }
        Self { matrix, matched: 0, found: vec![false; vocab_len] }
    }

    /// Copies the matched rows into `table`, leaving every other row alone.
    pub fn overlay(&self, table: &mut Array) -> Result<()> {
        if table.shape() != self.matrix.shape() {
            return Err(Error::Shape(format!(
                "embedding table {:?} does not match {:?}",
                self.matrix.shape(),
                table.shape()
            )));
        }
        let dim = self.matrix.shape()[1];
        for (i, _) in self.found.iter().enumerate().filter(|(_, &f)| f) {
            table.data_mut()[i * dim..(i + 1) * dim].copy_from_slice(self.matrix.row(i));
        }
        Ok(())
    }
}

/// Reads a textual word-vector file: each line a word followed by `dim` reals.
/// The word may itself contain spaces, so the vector is taken from the right.
pub fn load_embeddings<R: Rng>(
    path: &Path,
    vocab: &Vocabulary,
    dim: usize,
    rng: &mut R,
) -> Result<PretrainedEmbeddings> {
    let mut table = PretrainedEmbeddings::random(vocab.len(), dim, rng);
    let reader = BufReader::new(File::open(path)?);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() < dim + 1 {
            return Err(Error::Shape(format!(
                "{}:{}: expected {dim} components, found {}",
                path.display(),
                lineno + 1,
                fields.len().saturating_sub(1)
            )));
        }
        let split = fields.len() - dim;
        if split > 1 && fields[1].parse::<f64>().is_ok() {
            return Err(Error::Shape(format!(
                "{}:{}: expected {dim} components, found {}",
                path.display(),
                lineno + 1,
                fields.len() - 1
            )));
        }
        let word = fields[..split].join(" ");
        let id = vocab.id(&word);
        if id < 2 || table.found[id] {
            continue;
        }
        let row = &mut table.matrix.data_mut()[id * dim..(id + 1) * dim];
        for (dst, src) in row.iter_mut().zip(&fields[split..]) {
            *dst = src.parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("`{src}` is not a number"),
            })?;
        }
        table.found[id] = true;
        table.matched += 1;
    }
    debug_assert!(table.matrix.row(PAD).iter().all(|&x| x == 0.0));
    Ok(table)
}
