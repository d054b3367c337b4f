//! Reverse-mode automatic differentiation on a dynamic tape.
//!
//! A [`Graph`] is rebuilt for every forward pass. Each operation appends a
//! node holding its value and a record of how it was produced; node ids are
//! therefore already in topological order and [`Graph::backward`] simply walks
//! them in reverse, accumulating into the inputs' gradient buffers.
//!
//! ```
//! use asgcn::autodiff::{Array, Graph};
//!
//! let mut g = Graph::new();
//! let w = g.variable(Array::vector(vec![3.0]));
//! let sq = g.mul(w, w).unwrap();
//! let loss = g.sum(sq);
//! g.backward(loss).unwrap();
//! assert_eq!(g.grad(w).unwrap(), &[6.0]);
//! ```

mod array;
mod ops;

pub use array::Array;
pub use ops::Activation;

use crate::error::{Error, Result};

/// Handle to a node of a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tensor {
    id: usize,
}

impl Tensor {
    pub fn node_id(self) -> usize {
        self.id
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Op {
    Leaf,
    MatMul(Tensor, Tensor),
    Add(Tensor, Tensor),
    Sub(Tensor, Tensor),
    Mul(Tensor, Tensor),
    Activation(Tensor, Activation),
    Softmax(Tensor),
    Sum { input: Tensor, axis: Option<usize> },
    Mean { input: Tensor, axis: Option<usize> },
    Max { input: Tensor, argmax: Vec<usize> },
    Concat { parts: Vec<Tensor>, axis: usize },
    Slice { input: Tensor, axis: usize, start: usize },
    ScaleRows { input: Tensor, factors: Vec<f64> },
    Scale(Tensor, f64),
    GatherRows { table: Tensor, ids: Vec<usize> },
    Reshape(Tensor),
    CrossEntropy { logits: Tensor, labels: Vec<usize>, probs: Vec<f64> },
}

struct Node {
    value: Array,
    requires_grad: bool,
    op: Op,
}

/// The recorded computation. Leaf gradients persist across `backward` calls
/// until [`Graph::zero_grad`].
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable leaf.
    pub fn variable(&mut self, value: Array) -> Tensor {
        self.push(value, true, Op::Leaf)
    }

    /// Leaf that never receives gradient.
    pub fn constant(&mut self, value: Array) -> Tensor {
        self.push(value, false, Op::Leaf)
    }

    pub fn value(&self, t: Tensor) -> &Array {
        &self.nodes[t.id].value
    }

    pub fn shape(&self, t: Tensor) -> &[usize] {
        self.nodes[t.id].value.shape()
    }

    pub fn requires_grad(&self, t: Tensor) -> bool {
        self.nodes[t.id].requires_grad
    }

    /// Accumulated gradient of a leaf, if any reached it.
    pub fn grad(&self, t: Tensor) -> Option<&[f64]> {
        self.grads.get(t.id).and_then(|g| g.as_deref())
    }

    pub fn zero_grad(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = None);
    }

    fn push(&mut self, value: Array, requires_grad: bool, op: Op) -> Tensor {
        let id = self.nodes.len();
        self.nodes.push(Node { value, requires_grad, op });
        self.grads.push(None);
        Tensor { id }
    }

    fn record(&mut self, value: Array, inputs: &[Tensor], op: Op) -> Tensor {
        let requires_grad = inputs.iter().any(|t| self.nodes[t.id].requires_grad);
        self.push(value, requires_grad, op)
    }

    /// Propagates d`loss`/d(node) to every reachable trainable leaf.
    ///
    /// Intermediate gradients live only for the duration of the call, so
    /// repeated calls add exactly one more copy of each leaf gradient.
    pub fn backward(&mut self, loss: Tensor) -> Result<()> {
        let shape = self.shape(loss);
        if shape.iter().product::<usize>() != 1 {
            return Err(Error::NonScalarLoss(shape.to_vec()));
        }
        if !self.nodes[loss.id].requires_grad {
            return Ok(());
        }
        let mut scratch: Vec<Option<Vec<f64>>> = vec![None; loss.id + 1];
        scratch[loss.id] = Some(vec![1.0]);

        for id in (0..=loss.id).rev() {
            let Some(upstream) = scratch[id].take() else { continue };
            let node = &self.nodes[id];
            if let Op::Leaf = node.op {
                match &mut self.grads[id] {
                    Some(acc) => acc.iter_mut().zip(&upstream).for_each(|(a, g)| *a += g),
                    slot @ None => *slot = Some(upstream),
                }
                continue;
            }
            let mut sink = GradSink { nodes: &self.nodes, scratch: &mut scratch };
            ops::propagate(&node.op, &node.value, &upstream, &mut sink);
        }
        Ok(())
    }
}

/// Lazily allocated per-node gradient buffers for one backward sweep.
pub(crate) struct GradSink<'a> {
    nodes: &'a [Node],
    scratch: &'a mut [Option<Vec<f64>>],
}

impl GradSink<'_> {
    /// Mutable gradient buffer for `t`, or `None` if `t` needs no gradient.
    pub(crate) fn buffer(&mut self, t: Tensor) -> Option<&mut [f64]> {
        let node = &self.nodes[t.id];
        if !node.requires_grad {
            return None;
        }
        let len = node.value.len();
        Some(self.scratch[t.id].get_or_insert_with(|| vec![0.0; len]))
    }
}
