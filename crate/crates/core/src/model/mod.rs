//! The four classifiers (ASGCN-DG, ASGCN-DT, ASCNN, BiLSTM+Attn) and their
//! ablations, assembled from [`crate::layers`] behind one [`ModelConfig`].

mod checkpoint;
mod config;

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{ModelConfig, Variant};

use crate::autodiff::{Array, Graph, Tensor};
use crate::data::{Batch, Example, Polarity, PretrainedEmbeddings};
use crate::error::{Error, Result};
use crate::layers::{
    aspect_attention, aspect_mask, bilstm, conv1d, embed, gcn_layer, position_transform, Conv1d, GcnLayer, LstmCell,
};

pub const EMBEDDING: &str = "embedding.weight";

/// Named parameters in a fixed (lexicographic) order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParameterStore {
    params: BTreeMap<String, Array>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Array) {
        self.params.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Array> {
        self.params.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Array> {
        self.params.get_mut(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Array)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Array)> {
        self.params.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total number of scalars.
    pub fn num_scalars(&self) -> usize {
        self.params.values().map(Array::len).sum()
    }

    /// Scalars outside the embedding table.
    pub fn num_scalars_excluding_embedding(&self) -> usize {
        self.iter().filter(|(n, _)| *n != EMBEDDING).map(|(_, a)| a.len()).sum()
    }

    /// Copies pretrained rows into the embedding table; unmatched words keep
    /// their seeded random rows.
    pub fn overlay_embeddings(&mut self, pretrained: &PretrainedEmbeddings) -> Result<()> {
        let table = self.get_mut(EMBEDDING).ok_or_else(|| Error::Config("store has no embedding table".into()))?;
        pretrained.overlay(table)
    }

    pub fn map_values(&mut self, mut f: impl FnMut(&str, &mut [f64])) {
        for (name, a) in self.params.iter_mut() {
            f(name, a.data_mut());
        }
    }
}

/// Expected (name, shape) list for `cfg`; the single source of the layout.
pub fn parameter_layout(cfg: &ModelConfig, vocab_size: usize) -> Vec<(String, Vec<usize>)> {
    let (de, dh, d2) = (cfg.embed_dim, cfg.hidden, 2 * cfg.hidden);
    let mut out = vec![(EMBEDDING.to_owned(), vec![vocab_size, de])];
    let mut lstm = |prefix: &str| {
        for dir in ["fwd", "bwd"] {
            out.push((format!("{prefix}.{dir}.weight"), vec![de + dh, 4 * dh]));
            out.push((format!("{prefix}.{dir}.bias"), vec![4 * dh]));
        }
    };
    lstm("bilstm");
    if cfg.variant == Variant::BilstmAttn {
        lstm("aspect_bilstm");
    }
    if cfg.has_graph_layers() {
        for l in 0..cfg.num_layers {
            if cfg.variant == Variant::Ascnn {
                out.push((format!("conv.{l}.kernel"), vec![3, d2, d2]));
                out.push((format!("conv.{l}.bias"), vec![d2]));
            } else {
                out.push((format!("gcn.{l}.weight"), vec![d2, d2]));
                out.push((format!("gcn.{l}.bias"), vec![d2]));
            }
        }
    }
    out.push(("dense.weight".to_owned(), vec![d2, cfg.num_classes]));
    out.push(("dense.bias".to_owned(), vec![cfg.num_classes]));
    out
}

/// Allocates and initializes every parameter from `cfg.seed`.
///
/// Matrices draw from U(−1/√fan_in, 1/√fan_in), biases start at zero and the
/// embedding table is U(−0.25, 0.25) with a zero padding row.
pub fn build_model(cfg: &ModelConfig, vocab_size: usize) -> Result<ParameterStore> {
    cfg.validate()?;
    if vocab_size < 2 {
        return Err(Error::Config("vocabulary must contain at least the two reserved entries".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut store = ParameterStore::new();
    for (name, shape) in parameter_layout(cfg, vocab_size) {
        let value = if name == EMBEDDING {
            PretrainedEmbeddings::random(vocab_size, cfg.embed_dim, &mut rng).matrix
        } else if shape.len() == 1 {
            Array::zeros(&shape)
        } else {
            let fan_in: usize = shape[..shape.len() - 1].iter().product();
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut a = Array::zeros(&shape);
            a.data_mut().iter_mut().for_each(|x| *x = rng.random_range(-bound..bound));
            a
        };
        store.insert(name, value);
    }
    Ok(store)
}

/// Checks that `store` has exactly the layout `cfg` calls for.
pub fn check_layout(cfg: &ModelConfig, store: &ParameterStore) -> Result<()> {
    let vocab = store.get(EMBEDDING).map_or(0, |a| a.shape()[0]);
    let layout = parameter_layout(cfg, vocab);
    if layout.len() != store.len() {
        return Err(Error::Config(format!("expected {} parameters, store has {}", layout.len(), store.len())));
    }
    for (name, shape) in layout {
        match store.get(&name) {
            Some(a) if a.shape() == shape.as_slice() => {}
            Some(a) => return Err(Error::Shape(format!("{name}: expected {shape:?}, found {:?}", a.shape()))),
            None => return Err(Error::Config(format!("missing parameter {name}"))),
        }
    }
    Ok(())
}

/// Parameters placed into a graph for one forward pass.
pub struct BoundParams {
    tensors: BTreeMap<String, Tensor>,
}

impl BoundParams {
    /// Trainable parameters become variables; a frozen embedding table is a constant.
    pub fn bind(g: &mut Graph, store: &ParameterStore, cfg: &ModelConfig) -> Self {
        let tensors = store
            .iter()
            .map(|(name, a)| {
                let t = if name == EMBEDDING && cfg.freeze_embeddings {
                    g.constant(a.clone())
                } else {
                    g.variable(a.clone())
                };
                (name.to_owned(), t)
            })
            .collect();
        Self { tensors }
    }

    /// Binds everything as constants, for inference.
    pub fn bind_frozen(g: &mut Graph, store: &ParameterStore) -> Self {
        let tensors = store.iter().map(|(name, a)| (name.to_owned(), g.constant(a.clone()))).collect();
        Self { tensors }
    }

    /// Wraps already-bound tensors, e.g. leaves created by a gradient check.
    pub fn from_tensors(tensors: impl IntoIterator<Item = (String, Tensor)>) -> Self {
        Self { tensors: tensors.into_iter().collect() }
    }

    pub fn get(&self, name: &str) -> Result<Tensor> {
        self.tensors.get(name).copied().ok_or_else(|| Error::Config(format!("missing parameter {name}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Tensor)> {
        self.tensors.iter().map(|(k, &t)| (k.as_str(), t))
    }

    fn lstm(&self, prefix: &str, cfg: &ModelConfig) -> Result<(LstmCell, LstmCell)> {
        let cell = |dir: &str| -> Result<LstmCell> {
            Ok(LstmCell {
                weight: self.get(&format!("{prefix}.{dir}.weight"))?,
                bias: self.get(&format!("{prefix}.{dir}.bias"))?,
                input: cfg.embed_dim,
                hidden: cfg.hidden,
            })
        };
        Ok((cell("fwd")?, cell("bwd")?))
    }
}

/// Result of a batched forward pass.
pub struct ForwardOutput {
    /// B × num_classes, before softmax.
    pub logits: Tensor,
    /// Attention weights per sample over its true length.
    pub alpha: Vec<Vec<f64>>,
}

impl ForwardOutput {
    /// B × n_max attention matrix, zero on padding.
    pub fn alpha_padded(&self, n_max: usize) -> Array {
        let mut a = Array::zeros(&[self.alpha.len().max(1), n_max.max(1)]);
        let w = n_max.max(1);
        for (k, row) in self.alpha.iter().enumerate() {
            a.data_mut()[k * w..k * w + row.len()].copy_from_slice(row);
        }
        a
    }
}

/// Runs every sample of `batch` through the configured model.
///
/// `dropout_rng` enables embedding dropout (training mode) when the
/// configured rate is positive.
pub fn forward(
    g: &mut Graph,
    params: &BoundParams,
    cfg: &ModelConfig,
    batch: &Batch,
    mut dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<ForwardOutput> {
    if batch.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    let uses_adjacency = cfg.has_graph_layers() && cfg.variant != Variant::Ascnn;
    if uses_adjacency && batch.adjacency.is_none() {
        return Err(Error::Config(format!("{} needs adjacency matrices in the batch", cfg.variant)));
    }
    let table = params.get(EMBEDDING)?;
    let (fwd, bwd) = params.lstm("bilstm", cfg)?;
    let dense_w = params.get("dense.weight")?;
    let dense_b = params.get("dense.bias")?;

    let mut rows = Vec::with_capacity(batch.len());
    let mut alphas = Vec::with_capacity(batch.len());
    for k in 0..batch.len() {
        let n = batch.lengths[k];
        let span = batch.aspects[k];
        let ids = &batch.token_ids[k][..n];
        let mut x = embed(g, table, ids)?;
        if let Some(rng) = dropout_rng.as_deref_mut() {
            x = dropout(g, x, cfg.dropout, rng)?;
        }
        let hc = bilstm(g, x, &fwd, &bwd, n)?;

        let (r, alpha) = match cfg.variant {
            Variant::BilstmAttn => {
                let (afwd, abwd) = params.lstm("aspect_bilstm", cfg)?;
                let aspect_ids = &ids[span.from..span.to];
                let xa = embed(g, table, aspect_ids)?;
                let ha = bilstm(g, xa, &afwd, &abwd, span.len())?;
                // mean-pooled aspect as the single key row
                let pooled = g.mean_axis(ha, 0)?;
                let key = g.reshape(pooled, &[1, 2 * cfg.hidden])?;
                let keys = broadcast_key(g, key, n)?;
                aspect_attention(g, hc, keys, n)?
            }
            _ if cfg.has_graph_layers() => {
                let mut h = hc;
                for l in 0..cfg.num_layers {
                    let input = if cfg.use_position_weights { position_transform(g, h, span, n)? } else { h };
                    h = if cfg.variant == Variant::Ascnn {
                        let conv = Conv1d {
                            kernel: params.get(&format!("conv.{l}.kernel"))?,
                            bias: params.get(&format!("conv.{l}.bias"))?,
                        };
                        let y = conv1d(g, input, &conv)?;
                        g.relu(y)
                    } else {
                        let layer = GcnLayer {
                            weight: params.get(&format!("gcn.{l}.weight"))?,
                            bias: params.get(&format!("gcn.{l}.bias"))?,
                        };
                        let full = &batch.adjacency.as_ref().expect("checked above")[k];
                        let adj = g.constant(top_left(full, n));
                        gcn_layer(g, input, adj, &layer)?
                    };
                }
                let keys = if cfg.use_aspect_mask { aspect_mask(g, h, span)? } else { h };
                aspect_attention(g, hc, keys, n)?
            }
            _ => {
                // No graph layers: keys come from the aspect rows of H^c, and
                // position weights act on the attended context.
                let keys = if cfg.use_aspect_mask { aspect_mask(g, hc, span)? } else { hc };
                let context = if cfg.use_position_weights { position_transform(g, hc, span, n)? } else { hc };
                aspect_attention(g, context, keys, n)?
            }
        };
        let logits = g.matmul(r, dense_w)?;
        rows.push(g.add(logits, dense_b)?);
        alphas.push(g.value(alpha).data().to_vec());
    }
    let logits = g.concat(&rows, 0)?;
    Ok(ForwardOutput { logits, alpha: alphas })
}

fn broadcast_key(g: &mut Graph, key: Tensor, n: usize) -> Result<Tensor> {
    // one key row plus zero rows sums to the key itself
    let d = g.shape(key)[1];
    if n == 1 {
        return Ok(key);
    }
    let zeros = g.constant(Array::zeros(&[n - 1, d]));
    g.concat(&[key, zeros], 0)
}

fn top_left(a: &Array, n: usize) -> Array {
    let size = a.shape()[0];
    if size == n {
        return a.clone();
    }
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        data.extend_from_slice(&a.row(i)[..n]);
    }
    Array::new(vec![n, n], data).expect("square block")
}

fn dropout(g: &mut Graph, x: Tensor, rate: f64, rng: &mut ChaCha8Rng) -> Result<Tensor> {
    if rate <= 0.0 {
        return Ok(x);
    }
    let keep = 1.0 - rate;
    let shape = g.shape(x).to_vec();
    let mut mask = Array::zeros(&shape);
    for m in mask.data_mut() {
        if rng.random::<f64>() < keep {
            *m = 1.0 / keep;
        }
    }
    let mask = g.constant(mask);
    g.mul(x, mask)
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax of a logit row.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub label: Polarity,
    pub probabilities: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Prediction {
    pub fn from_logits(logits: &[f64], alpha: Vec<f64>) -> Self {
        let label = Polarity::from_index(argmax(logits)).unwrap_or(Polarity::Negative);
        Self { label, probabilities: softmax(logits), alpha }
    }
}

/// Predictions for every row of `batch`, in batch order.
pub fn predict_batch(store: &ParameterStore, cfg: &ModelConfig, batch: &Batch) -> Result<Vec<Prediction>> {
    let mut g = Graph::new();
    let bound = BoundParams::bind_frozen(&mut g, store);
    let out = forward(&mut g, &bound, cfg, batch, None)?;
    let c = cfg.num_classes;
    let logits = g.value(out.logits).data();
    Ok(out
        .alpha
        .into_iter()
        .enumerate()
        .map(|(k, a)| Prediction::from_logits(&logits[k * c..(k + 1) * c], a))
        .collect())
}

/// Classifies one encoded example.
pub fn predict(store: &ParameterStore, cfg: &ModelConfig, example: &Example) -> Result<Prediction> {
    let batch = Batch::from_examples(std::slice::from_ref(example), &[0], cfg.flavor())?;
    Ok(predict_batch(store, cfg, &batch)?.remove(0))
}
