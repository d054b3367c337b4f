//! Network building blocks, expressed as graph operations over parameter
//! tensors already bound into a [`Graph`].
//!
//! All layers work on a single sentence: row `i` of a feature matrix is token
//! `i`. Inputs may carry trailing padding rows; `length` marks the true
//! sentence length where that matters.

use crate::autodiff::{Array, Graph, Tensor};
use crate::data::{Span, PAD};
use crate::error::{Error, Result};

/// Stacked-input LSTM cell. `weight` is (d_in + d_h) × 4d_h with column blocks
/// for the input, forget, candidate and output gates; the first d_in rows act
/// on x_t and the remaining d_h rows on h_{t−1}.
#[derive(Clone, Copy, Debug)]
pub struct LstmCell {
    pub weight: Tensor,
    pub bias: Tensor,
    pub input: usize,
    pub hidden: usize,
}

/// Graph convolution weight (in × out, applied as `g · W`) and bias.
#[derive(Clone, Copy, Debug)]
pub struct GcnLayer {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// Width-3 convolution: `kernel` is 3 × f × f_out, tap 0 reads the previous token.
#[derive(Clone, Copy, Debug)]
pub struct Conv1d {
    pub kernel: Tensor,
    pub bias: Tensor,
}

/// Row lookup into the embedding matrix. Padding ids yield zero rows and
/// pass no gradient to the padding row.
pub fn embed(g: &mut Graph, table: Tensor, ids: &[usize]) -> Result<Tensor> {
    let rows = g.gather_rows(table, ids)?;
    if ids.contains(&PAD) {
        let keep: Vec<f64> = ids.iter().map(|&i| if i == PAD { 0.0 } else { 1.0 }).collect();
        return g.scale_rows(rows, &keep);
    }
    Ok(rows)
}

fn lstm_direction(g: &mut Graph, x: Tensor, cell: &LstmCell, order: &[usize]) -> Result<Vec<Tensor>> {
    let (d_in, d_h) = (cell.input, cell.hidden);
    let w_x = g.slice(cell.weight, 0..d_in, 0)?;
    let w_h = g.slice(cell.weight, d_in..d_in + d_h, 0)?;
    let proj = g.matmul(x, w_x)?;
    let proj = g.add(proj, cell.bias)?;

    let mut states = vec![None; order.len()];
    let mut prev: Option<(Tensor, Tensor)> = None;
    for &t in order {
        let mut z = g.slice(proj, t..t + 1, 0)?;
        if let Some((h, _)) = prev {
            let rec = g.matmul(h, w_h)?;
            z = g.add(z, rec)?;
        }
        let zi = g.slice(z, 0..d_h, 1)?;
        let zf = g.slice(z, d_h..2 * d_h, 1)?;
        let zg = g.slice(z, 2 * d_h..3 * d_h, 1)?;
        let zo = g.slice(z, 3 * d_h..4 * d_h, 1)?;
        let i = g.sigmoid(zi);
        let f = g.sigmoid(zf);
        let cand = g.tanh(zg);
        let o = g.sigmoid(zo);
        let mut c = g.mul(i, cand)?;
        if let Some((_, c_prev)) = prev {
            let keep = g.mul(f, c_prev)?;
            c = g.add(keep, c)?;
        }
        let tc = g.tanh(c);
        let h = g.mul(o, tc)?;
        states[t] = Some(h);
        prev = Some((h, c));
    }
    Ok(states.into_iter().map(|s| s.expect("every position visited")).collect())
}

/// Bidirectional LSTM over the first `length` rows of `x` (n × d_in).
/// Row t of the n × 2d_h result is [forward h_t ; backward h_t]; padding
/// rows are zero.
pub fn bilstm(g: &mut Graph, x: Tensor, fwd: &LstmCell, bwd: &LstmCell, length: usize) -> Result<Tensor> {
    let (rows, d_in) = g.value(x).dims2()?;
    if length == 0 {
        return Err(Error::Shape("bilstm over an empty sequence".into()));
    }
    if length > rows {
        return Err(Error::Bounds(format!("length {length} exceeds {rows} input rows")));
    }
    if d_in != fwd.input || d_in != bwd.input || fwd.hidden != bwd.hidden {
        return Err(Error::Shape(format!("input width {d_in} does not match cells ({}, {})", fwd.input, bwd.input)));
    }
    let xs = if length < rows { g.slice(x, 0..length, 0)? } else { x };
    let forward_order: Vec<usize> = (0..length).collect();
    let backward_order: Vec<usize> = (0..length).rev().collect();
    let hf = lstm_direction(g, xs, fwd, &forward_order)?;
    let hb = lstm_direction(g, xs, bwd, &backward_order)?;
    let hf = g.concat(&hf, 0)?;
    let hb = g.concat(&hb, 0)?;
    let h = g.concat(&[hf, hb], 1)?;
    pad_rows(g, h, rows)
}

/// Appends zero rows up to `rows`.
pub fn pad_rows(g: &mut Graph, h: Tensor, rows: usize) -> Result<Tensor> {
    let (n, d) = g.value(h).dims2()?;
    if n == rows {
        return Ok(h);
    }
    let zeros = g.constant(Array::zeros(&[rows - n, d]));
    g.concat(&[h, zeros], 0)
}

/// One graph convolution: h_i = ReLU( (Σ_j A_ij g_j W) / (d_i + 1) + b ),
/// with d_i the row sum of A (self-loop included).
pub fn gcn_layer(g: &mut Graph, prev: Tensor, adj: Tensor, layer: &GcnLayer) -> Result<Tensor> {
    let (n, n2) = g.value(adj).dims2()?;
    let rows = g.value(prev).dims2()?.0;
    if n != n2 || rows != n {
        return Err(Error::Shape(format!(
            "adjacency {:?} does not match features {:?}",
            g.value(adj).shape(),
            g.value(prev).shape()
        )));
    }
    let norm: Vec<f64> = g.value(adj).data().chunks(n).map(|r| 1.0 / (r.iter().sum::<f64>() + 1.0)).collect();
    let transformed = g.matmul(prev, layer.weight)?;
    let aggregated = g.matmul(adj, transformed)?;
    let scaled = g.scale_rows(aggregated, &norm)?;
    let biased = g.add(scaled, layer.bias)?;
    Ok(g.relu(biased))
}

/// Position weight q_i for each of `n` tokens: linear decay with distance
/// from the aspect, 0 on the aspect itself.
pub fn position_weights(n: usize, aspect: Span) -> Result<Vec<f64>> {
    aspect.check(n)?;
    // (n - distance) / n keeps the weights exact ratios of integers
    let nf = n as f64;
    Ok((0..n)
        .map(|j| {
            if j < aspect.from {
                (n - (aspect.from - j)) as f64 / nf
            } else if j < aspect.to {
                0.0
            } else {
                (n - (j + 1 - aspect.to)) as f64 / nf
            }
        })
        .collect())
}

/// Scales row i of `h` by q_i; rows at or beyond `length` are zeroed.
pub fn position_transform(g: &mut Graph, h: Tensor, aspect: Span, length: usize) -> Result<Tensor> {
    let rows = g.shape(h)[0];
    if length > rows {
        return Err(Error::Bounds(format!("length {length} exceeds {rows} rows")));
    }
    let mut q = position_weights(length, aspect)?;
    q.resize(rows, 0.0);
    g.scale_rows(h, &q)
}

/// Zeroes every row outside the aspect span.
pub fn aspect_mask(g: &mut Graph, h: Tensor, aspect: Span) -> Result<Tensor> {
    let rows = g.shape(h)[0];
    aspect.check(rows)?;
    let keep: Vec<f64> = (0..rows).map(|i| if aspect.contains(i) { 1.0 } else { 0.0 }).collect();
    g.scale_rows(h, &keep)
}

/// Retrieval attention. β_t = h_t^c · Σ_i h_i^mask over the first `length`
/// rows, α = softmax(β), r = Σ_t α_t h_t^c. Returns (r as a 1 × D row, α).
pub fn aspect_attention(g: &mut Graph, context: Tensor, keys: Tensor, length: usize) -> Result<(Tensor, Tensor)> {
    let (rows, d) = g.value(context).dims2()?;
    if g.shape(keys) != g.shape(context) {
        return Err(Error::Shape(format!(
            "context {:?} and masked features {:?} differ",
            g.shape(context),
            g.shape(keys)
        )));
    }
    if length == 0 || length > rows {
        return Err(Error::Bounds(format!("attention length {length} for {rows} rows")));
    }
    let (hc, hm) =
        if length < rows { (g.slice(context, 0..length, 0)?, g.slice(keys, 0..length, 0)?) } else { (context, keys) };
    let summed = g.sum_axis(hm, 0)?;
    let column = g.reshape(summed, &[d, 1])?;
    let beta = g.matmul(hc, column)?;
    let beta = g.reshape(beta, &[length])?;
    let alpha = g.softmax(beta)?;
    let weights = g.reshape(alpha, &[1, length])?;
    let r = g.matmul(weights, hc)?;
    Ok((r, alpha))
}

/// Same-length convolution with kernel 3 and one zero row of padding on each side.
pub fn conv1d(g: &mut Graph, x: Tensor, conv: &Conv1d) -> Result<Tensor> {
    let (n, f) = g.value(x).dims2()?;
    let kshape = g.shape(conv.kernel).to_vec();
    if kshape.len() != 3 || kshape[0] != 3 || kshape[1] != f {
        return Err(Error::Shape(format!("kernel {kshape:?} for input width {f}")));
    }
    let f_out = kshape[2];
    let pad = g.constant(Array::zeros(&[1, f]));
    let padded = g.concat(&[pad, x, pad], 0)?;
    let mut acc: Option<Tensor> = None;
    for tap in 0..3 {
        let window = g.slice(padded, tap..tap + n, 0)?;
        let k = g.slice(conv.kernel, tap..tap + 1, 0)?;
        let k = g.reshape(k, &[f, f_out])?;
        let y = g.matmul(window, k)?;
        acc = Some(match acc {
            Some(a) => g.add(a, y)?,
            None => y,
        });
    }
    g.add(acc.expect("three taps"), conv.bias)
}
