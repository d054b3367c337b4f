use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::vocab::PAD;
use super::{AdjacencyMatrix, Example, Flavor, Polarity, Span};
use crate::autodiff::Array;
use crate::error::{Error, Result};
use crate::layers::position_weights;

/// Padded stack of examples.
#[derive(Clone, Debug)]
pub struct Batch {
    /// Position of each row in the source slice.
    pub indices: Vec<usize>,
    /// B×n_max, padded with the padding id.
    pub token_ids: Vec<Vec<usize>>,
    pub lengths: Vec<usize>,
    /// B matrices of n_max×n_max, zero outside the true n×n block.
    pub adjacency: Option<Vec<Array>>,
    pub aspects: Vec<Span>,
    /// B×n_max position weights from true lengths, zero on padding.
    pub position_weights: Vec<Vec<f64>>,
    pub labels: Vec<Polarity>,
    pub heads: Vec<Vec<Option<usize>>>,
}

/// One row of a batch with padding stripped.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchedExample {
    pub index: usize,
    pub token_ids: Vec<usize>,
    pub heads: Vec<Option<usize>>,
    pub aspect: Span,
    pub label: Polarity,
}

impl Batch {
    pub fn from_examples(examples: &[Example], indices: &[usize], flavor: Option<Flavor>) -> Result<Self> {
        let max_len = indices.iter().map(|&i| examples[i].len()).max().unwrap_or(0);
        let mut b = Batch {
            indices: indices.to_vec(),
            token_ids: Vec::with_capacity(indices.len()),
            lengths: Vec::with_capacity(indices.len()),
            adjacency: flavor.map(|_| Vec::with_capacity(indices.len())),
            aspects: Vec::with_capacity(indices.len()),
            position_weights: Vec::with_capacity(indices.len()),
            labels: Vec::with_capacity(indices.len()),
            heads: Vec::with_capacity(indices.len()),
        };
        for &i in indices {
            let e = &examples[i];
            let n = e.len();
            if e.token_ids.len() != n {
                return Err(Error::Config(format!("example {i} has not been encoded against a vocabulary")));
            }
            e.aspect.check(n)?;
            let mut ids = e.token_ids.clone();
            ids.resize(max_len, PAD);
            let mut q = position_weights(n, e.aspect)?;
            q.resize(max_len, 0.0);
            if let (Some(stack), Some(flavor)) = (b.adjacency.as_mut(), flavor) {
                stack.push(AdjacencyMatrix::build(&e.heads, flavor)?.padded(max_len));
            }
            b.token_ids.push(ids);
            b.lengths.push(n);
            b.aspects.push(e.aspect);
            b.position_weights.push(q);
            b.labels.push(e.label);
            b.heads.push(e.heads.clone());
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.token_ids.first().map_or(0, Vec::len)
    }

    pub fn unpad(&self, k: usize) -> BatchedExample {
        let n = self.lengths[k];
        BatchedExample {
            index: self.indices[k],
            token_ids: self.token_ids[k][..n].to_vec(),
            heads: self.heads[k].clone(),
            aspect: self.aspects[k],
            label: self.labels[k],
        }
    }
}

/// Splits `examples` into padded batches. With a seed the order is a
/// deterministic shuffle; without one the input order is kept.
pub fn make_batches(
    examples: &[Example],
    batch_size: usize,
    shuffle_seed: Option<u64>,
    flavor: Option<Flavor>,
) -> Result<Vec<Batch>> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let mut order: Vec<usize> = (0..examples.len()).collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    order.chunks(batch_size).map(|idx| Batch::from_examples(examples, idx, flavor)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(n: usize, from: usize, to: usize, label: Polarity) -> Example {
        Example {
            tokens: (0..n).map(|i| format!("w{i}")).collect(),
            token_ids: (0..n).map(|i| i + 2).collect(),
            heads: (0..n).map(|i| if i == 0 { None } else { Some(i - 1) }).collect(),
            aspect: Span::new(from, to),
            label,
        }
    }

    fn corpus(count: usize) -> Vec<Example> {
        (0..count).map(|i| example(1 + i % 7, 0, 1, Polarity::from_index(i % 3).unwrap())).collect()
    }

    #[test]
    fn seventy_examples_into_32_32_6() {
        let b = make_batches(&corpus(70), 32, Some(1), None).unwrap();
        assert_eq!(b.iter().map(Batch::len).collect::<Vec<_>>(), vec![32, 32, 6]);
    }

    #[test]
    fn same_seed_same_composition() {
        let c = corpus(70);
        let a = make_batches(&c, 32, Some(9), None).unwrap();
        let b = make_batches(&c, 32, Some(9), None).unwrap();
        let other = make_batches(&c, 32, Some(10), None).unwrap();
        let idx = |v: &[Batch]| v.iter().map(|b| b.indices.clone()).collect::<Vec<_>>();
        assert_eq!(idx(&a), idx(&b));
        assert_ne!(idx(&a), idx(&other));
    }

    #[test]
    fn padding_positions_are_zero() {
        let c = vec![example(2, 0, 1, Polarity::Neutral), example(5, 1, 3, Polarity::Positive)];
        let b = make_batches(&c, 8, None, Some(Flavor::Dg)).unwrap().remove(0);
        assert_eq!(b.max_len(), 5);
        assert_eq!(b.token_ids[0], vec![2, 3, PAD, PAD, PAD]);
        assert_eq!(&b.position_weights[0][2..], &[0.0, 0.0, 0.0]);
        let adj = &b.adjacency.as_ref().unwrap()[0];
        for i in 0..5 {
            for j in 0..5 {
                if i >= 2 || j >= 2 {
                    assert_eq!(adj.get2(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn unbatching_recovers_examples() {
        let c = corpus(45);
        for batch in make_batches(&c, 16, Some(3), Some(Flavor::Dt)).unwrap() {
            for k in 0..batch.len() {
                let u = batch.unpad(k);
                let e = &c[u.index];
                assert_eq!(u.token_ids, e.token_ids);
                assert_eq!(u.heads, e.heads);
                assert_eq!(u.aspect, e.aspect);
                assert_eq!(u.label, e.label);
            }
        }
    }
}
