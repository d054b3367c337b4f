use std::ops::Range;

use super::{Array, GradSink, Graph, Op, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Splits `shape` around `axis` into (outer, axis extent, inner).
fn around_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

fn reduced_shape(shape: &[usize], axis: usize) -> Vec<usize> {
    let mut out: Vec<usize> = shape.to_vec();
    out.remove(axis);
    if out.is_empty() {
        out.push(1);
    }
    out
}

/// C += op(A) * op(B) for row-major buffers; `ta`/`tb` read the operand transposed.
#[allow(clippy::too_many_arguments)]
fn gemm_acc(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool, c: &mut [f64]) {
    // Vector-matrix products and outer products dominate the recurrence; packing
    // the whole weight for each of them costs more than the arithmetic.
    if m == 1 {
        if tb {
            for (cj, bj) in c.iter_mut().zip(b.chunks_exact(k)) {
                *cj += a.iter().zip(bj).map(|(x, y)| x * y).sum::<f64>();
            }
        } else {
            for (&ap, bp) in a.iter().zip(b.chunks_exact(n)) {
                c.iter_mut().zip(bp).for_each(|(cj, bj)| *cj += ap * bj);
            }
        }
        return;
    }
    if k == 1 {
        for (&ai, ci) in a.iter().zip(c.chunks_exact_mut(n)) {
            ci.iter_mut().zip(b).for_each(|(cj, bj)| *cj += ai * bj);
        }
        return;
    }
    let (rsa, csa) = if ta { (1, m) } else { (k, 1) };
    let (rsb, csb) = if tb { (1, k) } else { (n, 1) };
    // SAFETY: the strides above describe in-bounds views of `a` (m×k), `b` (k×n)
    // and `c` (m×n); callers pass buffers of exactly those lengths.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            1.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Broadcast {
    Same,
    /// `b` is a vector matching the trailing extent of `a`.
    Trailing,
}

impl Graph {
    fn broadcast_kind(&self, a: Tensor, b: Tensor) -> Result<Broadcast> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa == sb {
            Ok(Broadcast::Same)
        } else if sb.len() == 1 && sa.last() == sb.first() {
            Ok(Broadcast::Trailing)
        } else {
            Err(Error::Shape(format!("incompatible elementwise shapes {sa:?} and {sb:?}")))
        }
    }

    fn elementwise(&mut self, a: Tensor, b: Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Array> {
        self.broadcast_kind(a, b)?;
        let va = self.value(a);
        let vb = self.value(b).data();
        let width = vb.len();
        let data = va.data().iter().enumerate().map(|(i, &x)| f(x, vb[i % width])).collect();
        Array::new(va.shape().to_vec(), data)
    }

    pub fn add(&mut self, a: Tensor, b: Tensor) -> Result<Tensor> {
        let v = self.elementwise(a, b, |x, y| x + y)?;
        Ok(self.record(v, &[a, b], Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Tensor, b: Tensor) -> Result<Tensor> {
        let v = self.elementwise(a, b, |x, y| x - y)?;
        Ok(self.record(v, &[a, b], Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Tensor, b: Tensor) -> Result<Tensor> {
        let v = self.elementwise(a, b, |x, y| x * y)?;
        Ok(self.record(v, &[a, b], Op::Mul(a, b)))
    }

    pub fn matmul(&mut self, a: Tensor, b: Tensor) -> Result<Tensor> {
        let (va, vb) = (self.value(a), self.value(b));
        let (r, k) = va.dims2()?;
        let (k2, c) = vb.dims2()?;
        if k != k2 {
            return Err(Error::Shape(format!("matmul inner dimensions differ: {:?} · {:?}", va.shape(), vb.shape())));
        }
        let mut out = vec![0.0; r * c];
        gemm_acc(r, k, c, va.data(), false, vb.data(), false, &mut out);
        let v = Array::new(vec![r, c], out)?;
        Ok(self.record(v, &[a, b], Op::MatMul(a, b)))
    }

    pub fn activation(&mut self, a: Tensor, kind: Activation) -> Tensor {
        let va = self.value(a);
        let data = va.data().iter().map(|&x| kind.apply(x)).collect();
        let v = Array::new(va.shape().to_vec(), data).expect("same shape");
        self.record(v, &[a], Op::Activation(a, kind))
    }

    pub fn relu(&mut self, a: Tensor) -> Tensor {
        self.activation(a, Activation::Relu)
    }

    pub fn tanh(&mut self, a: Tensor) -> Tensor {
        self.activation(a, Activation::Tanh)
    }

    pub fn sigmoid(&mut self, a: Tensor) -> Tensor {
        self.activation(a, Activation::Sigmoid)
    }

    /// Softmax along the last axis, with max subtraction.
    pub fn softmax(&mut self, a: Tensor) -> Result<Tensor> {
        let va = self.value(a);
        if va.data().iter().any(|x| x.is_nan()) {
            return Err(Error::NonFinite("softmax input contains NaN".into()));
        }
        let width = *va.shape().last().unwrap();
        let mut data = va.data().to_vec();
        for row in data.chunks_mut(width) {
            softmax_in_place(row);
        }
        let v = Array::new(va.shape().to_vec(), data)?;
        Ok(self.record(v, &[a], Op::Softmax(a)))
    }

    /// Sum of every element, as a 1-element tensor.
    pub fn sum(&mut self, a: Tensor) -> Tensor {
        let s = self.value(a).data().iter().sum();
        self.record(Array::scalar(s), &[a], Op::Sum { input: a, axis: None })
    }

    pub fn mean(&mut self, a: Tensor) -> Tensor {
        let va = self.value(a);
        let m = va.data().iter().sum::<f64>() / va.len() as f64;
        self.record(Array::scalar(m), &[a], Op::Mean { input: a, axis: None })
    }

    pub fn sum_axis(&mut self, a: Tensor, axis: usize) -> Result<Tensor> {
        let v = self.reduce_axis(a, axis, |xs| xs.iter().sum())?;
        Ok(self.record(v, &[a], Op::Sum { input: a, axis: Some(axis) }))
    }

    pub fn mean_axis(&mut self, a: Tensor, axis: usize) -> Result<Tensor> {
        let v = self.reduce_axis(a, axis, |xs| xs.iter().sum::<f64>() / xs.len() as f64)?;
        Ok(self.record(v, &[a], Op::Mean { input: a, axis: Some(axis) }))
    }

    /// Maximum over `axis` (or over everything when `None`). The gradient goes
    /// to the first maximal element.
    pub fn max(&mut self, a: Tensor, axis: Option<usize>) -> Result<Tensor> {
        let va = self.value(a);
        let (shape, outer, len, inner) = match axis {
            None => (vec![1], 1, va.len(), 1),
            Some(ax) => {
                self.check_axis(a, ax)?;
                let (o, l, i) = around_axis(va.shape(), ax);
                (reduced_shape(va.shape(), ax), o, l, i)
            }
        };
        let d = va.data();
        let mut values = Vec::with_capacity(outer * inner);
        let mut argmax = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            for i in 0..inner {
                let base = o * len * inner + i;
                let mut best = base;
                for k in 1..len {
                    let idx = base + k * inner;
                    if d[idx] > d[best] {
                        best = idx;
                    }
                }
                values.push(d[best]);
                argmax.push(best);
            }
        }
        let v = Array::new(shape, values)?;
        Ok(self.record(v, &[a], Op::Max { input: a, argmax }))
    }

    fn check_axis(&self, a: Tensor, axis: usize) -> Result<()> {
        let rank = self.shape(a).len();
        if axis >= rank {
            return Err(Error::InvalidAxis { axis, rank });
        }
        Ok(())
    }

    fn reduce_axis(&self, a: Tensor, axis: usize, f: impl Fn(&[f64]) -> f64) -> Result<Array> {
        self.check_axis(a, axis)?;
        let va = self.value(a);
        let (outer, len, inner) = around_axis(va.shape(), axis);
        let d = va.data();
        let mut out = Vec::with_capacity(outer * inner);
        let mut lane = vec![0.0; len];
        for o in 0..outer {
            for i in 0..inner {
                for (k, x) in lane.iter_mut().enumerate() {
                    *x = d[o * len * inner + k * inner + i];
                }
                out.push(f(&lane));
            }
        }
        Array::new(reduced_shape(va.shape(), axis), out)
    }

    pub fn concat(&mut self, parts: &[Tensor], axis: usize) -> Result<Tensor> {
        let first = *parts.first().ok_or_else(|| Error::Shape("concat of zero tensors".into()))?;
        self.check_axis(first, axis)?;
        let base = self.shape(first).to_vec();
        let mut total = 0;
        for &p in parts {
            let s = self.shape(p);
            let conforming =
                s.len() == base.len() && s.iter().zip(&base).enumerate().all(|(d, (x, y))| d == axis || x == y);
            if !conforming {
                return Err(Error::Shape(format!("cannot concatenate {s:?} with {base:?} along axis {axis}")));
            }
            total += s[axis];
        }
        let (outer, _, inner) = around_axis(&base, axis);
        let mut data = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for &p in parts {
                let vp = self.value(p);
                let block = vp.shape()[axis] * inner;
                data.extend_from_slice(&vp.data()[o * block..(o + 1) * block]);
            }
        }
        let mut shape = base;
        shape[axis] = total;
        let v = Array::new(shape, data)?;
        Ok(self.record(v, parts, Op::Concat { parts: parts.to_vec(), axis }))
    }

    pub fn slice(&mut self, a: Tensor, range: Range<usize>, axis: usize) -> Result<Tensor> {
        self.check_axis(a, axis)?;
        let va = self.value(a);
        let (outer, len, inner) = around_axis(va.shape(), axis);
        if range.start >= range.end || range.end > len {
            return Err(Error::Bounds(format!("slice {range:?} on axis {axis} of extent {len}")));
        }
        let width = (range.end - range.start) * inner;
        let mut data = Vec::with_capacity(outer * width);
        for o in 0..outer {
            let start = o * len * inner + range.start * inner;
            data.extend_from_slice(&va.data()[start..start + width]);
        }
        let mut shape = va.shape().to_vec();
        shape[axis] = range.end - range.start;
        let v = Array::new(shape, data)?;
        Ok(self.record(v, &[a], Op::Slice { input: a, axis, start: range.start }))
    }

    /// Multiplies every slice along the leading axis by a constant factor.
    pub fn scale_rows(&mut self, a: Tensor, factors: &[f64]) -> Result<Tensor> {
        let va = self.value(a);
        if va.shape()[0] != factors.len() {
            return Err(Error::Shape(format!("{} row factors for tensor of shape {:?}", factors.len(), va.shape())));
        }
        let inner = va.len() / factors.len();
        let data = va.data().iter().enumerate().map(|(i, &x)| x * factors[i / inner]).collect();
        let v = Array::new(va.shape().to_vec(), data)?;
        Ok(self.record(v, &[a], Op::ScaleRows { input: a, factors: factors.to_vec() }))
    }

    pub fn scale(&mut self, a: Tensor, c: f64) -> Tensor {
        let va = self.value(a);
        let data = va.data().iter().map(|&x| x * c).collect();
        let v = Array::new(va.shape().to_vec(), data).expect("same shape");
        self.record(v, &[a], Op::Scale(a, c))
    }

    /// Row lookup into a matrix; gradients scatter-add back into the table.
    pub fn gather_rows(&mut self, table: Tensor, ids: &[usize]) -> Result<Tensor> {
        let vt = self.value(table);
        let (rows, cols) = vt.dims2()?;
        if ids.is_empty() {
            return Err(Error::Shape("gather of zero rows".into()));
        }
        let mut data = Vec::with_capacity(ids.len() * cols);
        for &id in ids {
            if id >= rows {
                return Err(Error::Bounds(format!("row id {id} for table of {rows} rows")));
            }
            data.extend_from_slice(vt.row(id));
        }
        let v = Array::new(vec![ids.len(), cols], data)?;
        Ok(self.record(v, &[table], Op::GatherRows { table, ids: ids.to_vec() }))
    }

    pub fn reshape(&mut self, a: Tensor, shape: &[usize]) -> Result<Tensor> {
        let v = self.value(a).clone().reshaped(shape.to_vec())?;
        Ok(self.record(v, &[a], Op::Reshape(a)))
    }

    /// Mean negative log-likelihood of `labels` under row-wise softmax of
    /// `logits` (B×C), computed through log-sum-exp.
    pub fn cross_entropy(&mut self, logits: Tensor, labels: &[usize]) -> Result<Tensor> {
        let vl = self.value(logits);
        let (b, c) = vl.dims2()?;
        if labels.len() != b {
            return Err(Error::Shape(format!("{} labels for {b} logit rows", labels.len())));
        }
        let mut probs = vl.data().to_vec();
        let mut nll = 0.0;
        for (row, (chunk, &y)) in vl.data().chunks(c).zip(labels).enumerate() {
            if y >= c {
                return Err(Error::Bounds(format!("label {y} with {c} classes")));
            }
            let m = chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + chunk.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
            nll += lse - chunk[y];
            softmax_in_place(&mut probs[row * c..(row + 1) * c]);
        }
        let v = Array::scalar(nll / b as f64);
        Ok(self.record(v, &[logits], Op::CrossEntropy { logits, labels: labels.to_vec(), probs }))
    }
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for x in row.iter_mut() {
        *x = (*x - m).exp();
        z += *x;
    }
    row.iter_mut().for_each(|x| *x /= z);
}

fn add_into(dst: &mut [f64], src: impl IntoIterator<Item = f64>) {
    dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
}

/// Accumulates `upstream` (shaped like `a`) into `b`'s buffer, summing over
/// the broadcast axes when `b` is a trailing vector.
fn reduce_broadcast(dst: &mut [f64], upstream: &[f64], sign: f64) {
    let width = dst.len();
    for (i, g) in upstream.iter().enumerate() {
        dst[i % width] += sign * g;
    }
}

pub(super) fn propagate(op: &Op, out: &Array, up: &[f64], sink: &mut GradSink<'_>) {
    let nodes = sink.nodes;
    let val = |t: Tensor| &nodes[t.id].value;
    match op {
        Op::Leaf => unreachable!("leaves are handled by the caller"),
        Op::MatMul(a, b) => {
            let (r, k) = val(*a).dims2().unwrap();
            let c = val(*b).shape()[1];
            if let Some(ga) = sink.buffer(*a) {
                gemm_acc(r, c, k, up, false, val(*b).data(), true, ga);
            }
            if let Some(gb) = sink.buffer(*b) {
                gemm_acc(k, r, c, val(*a).data(), true, up, false, gb);
            }
        }
        Op::Add(a, b) | Op::Sub(a, b) => {
            let sign = if matches!(op, Op::Sub(..)) { -1.0 } else { 1.0 };
            if let Some(ga) = sink.buffer(*a) {
                add_into(ga, up.iter().copied());
            }
            if let Some(gb) = sink.buffer(*b) {
                reduce_broadcast(gb, up, sign);
            }
        }
        Op::Mul(a, b) => {
            let (va, vb) = (val(*a).data(), val(*b).data());
            let width = vb.len();
            if let Some(ga) = sink.buffer(*a) {
                add_into(ga, up.iter().enumerate().map(|(i, g)| g * vb[i % width]));
            }
            if let Some(gb) = sink.buffer(*b) {
                for (i, g) in up.iter().enumerate() {
                    gb[i % width] += g * va[i];
                }
            }
        }
        Op::Activation(a, kind) => {
            let x = val(*a).data();
            let y = out.data();
            if let Some(ga) = sink.buffer(*a) {
                for i in 0..ga.len() {
                    let d = match kind {
                        Activation::Relu => {
                            if x[i] > 0.0 {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        Activation::Tanh => 1.0 - y[i] * y[i],
                        Activation::Sigmoid => y[i] * (1.0 - y[i]),
                    };
                    ga[i] += up[i] * d;
                }
            }
        }
        Op::Softmax(a) => {
            let width = *out.shape().last().unwrap();
            if let Some(ga) = sink.buffer(*a) {
                for ((gr, yr), ur) in ga.chunks_mut(width).zip(out.data().chunks(width)).zip(up.chunks(width)) {
                    let dot: f64 = yr.iter().zip(ur).map(|(y, u)| y * u).sum();
                    for j in 0..width {
                        gr[j] += yr[j] * (ur[j] - dot);
                    }
                }
            }
        }
        Op::Sum { input, axis } | Op::Mean { input, axis } => {
            let shape = val(*input).shape().to_vec();
            let is_mean = matches!(op, Op::Mean { .. });
            if let Some(ga) = sink.buffer(*input) {
                match axis {
                    None => {
                        let g = if is_mean { up[0] / ga.len() as f64 } else { up[0] };
                        ga.iter_mut().for_each(|x| *x += g);
                    }
                    Some(ax) => {
                        let (outer, len, inner) = around_axis(&shape, *ax);
                        let norm = if is_mean { len as f64 } else { 1.0 };
                        for o in 0..outer {
                            for k in 0..len {
                                for i in 0..inner {
                                    ga[o * len * inner + k * inner + i] += up[o * inner + i] / norm;
                                }
                            }
                        }
                    }
                }
            }
        }
        Op::Max { input, argmax } => {
            if let Some(ga) = sink.buffer(*input) {
                for (g, &idx) in up.iter().zip(argmax) {
                    ga[idx] += g;
                }
            }
        }
        Op::Concat { parts, axis } => {
            let (outer, total, inner) = around_axis(out.shape(), *axis);
            let mut offset = 0;
            for &p in parts {
                let len = val(p).shape()[*axis];
                if let Some(gp) = sink.buffer(p) {
                    let block = len * inner;
                    for o in 0..outer {
                        let src = o * total * inner + offset * inner;
                        add_into(&mut gp[o * block..(o + 1) * block], up[src..src + block].iter().copied());
                    }
                }
                offset += len;
            }
        }
        Op::Slice { input, axis, start } => {
            let in_shape = val(*input).shape().to_vec();
            let (outer, len, inner) = around_axis(&in_shape, *axis);
            let width = out.shape()[*axis] * inner;
            if let Some(ga) = sink.buffer(*input) {
                for o in 0..outer {
                    let dst = o * len * inner + start * inner;
                    add_into(&mut ga[dst..dst + width], up[o * width..(o + 1) * width].iter().copied());
                }
            }
        }
        Op::ScaleRows { input, factors } => {
            let inner = out.len() / factors.len();
            if let Some(ga) = sink.buffer(*input) {
                add_into(ga, up.iter().enumerate().map(|(i, g)| g * factors[i / inner]));
            }
        }
        Op::Scale(a, c) => {
            if let Some(ga) = sink.buffer(*a) {
                add_into(ga, up.iter().map(|g| g * c));
            }
        }
        Op::GatherRows { table, ids } => {
            let cols = out.shape()[1];
            if let Some(gt) = sink.buffer(*table) {
                for (r, &id) in ids.iter().enumerate() {
                    add_into(&mut gt[id * cols..(id + 1) * cols], up[r * cols..(r + 1) * cols].iter().copied());
                }
            }
        }
        Op::Reshape(a) => {
            if let Some(ga) = sink.buffer(*a) {
                add_into(ga, up.iter().copied());
            }
        }
        Op::CrossEntropy { logits, labels, probs } => {
            let b = labels.len();
            let c = probs.len() / b;
            let scale = up[0] / b as f64;
            if let Some(gl) = sink.buffer(*logits) {
                for (row, &y) in labels.iter().enumerate() {
                    for j in 0..c {
                        let onehot = if j == y { 1.0 } else { 0.0 };
                        gl[row * c + j] += scale * (probs[row * c + j] - onehot);
                    }
                }
            }
        }
    }
}
