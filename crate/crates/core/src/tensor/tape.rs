use std::fmt::Write as _;
use std::sync::Arc;

use super::{gemm_acc, gemm_nt_acc, gemm_tn_acc, SparseMatrix, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRow(Var, Var),
    AddScalar(Var),
    Scale(Var, f64),
    Hadamard(Var, Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    Relu(Var),
    Sigmoid(Var),
    Tanh(Var),
    Softplus(Var),
    Abs(Var),
    Sum(Var),
    Mean(Var),
    Max(Var, usize),
    SliceRows(Var, usize),
    GatherRows(Var, Vec<Option<usize>>),
    SpMM(Arc<SparseMatrix>, Var),
    Reshape(Var),
    Transpose(Var),
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::MatMul(..) => "matmul",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::AddRow(..) => "add_row",
            Op::AddScalar(..) => "add_scalar",
            Op::Scale(..) => "scale",
            Op::Hadamard(..) => "hadamard",
            Op::ConcatCols(..) => "concat_cols",
            Op::ConcatRows(..) => "concat_rows",
            Op::Relu(..) => "relu",
            Op::Sigmoid(..) => "sigmoid",
            Op::Tanh(..) => "tanh",
            Op::Softplus(..) => "softplus",
            Op::Abs(..) => "abs",
            Op::Sum(..) => "reduce_sum",
            Op::Mean(..) => "reduce_mean",
            Op::Max(..) => "reduce_max",
            Op::SliceRows(..) => "slice_rows",
            Op::GatherRows(..) => "gather_rows",
            Op::SpMM(..) => "spmm",
            Op::Reshape(..) => "reshape",
            Op::Transpose(..) => "transpose",
        }
    }
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    requires_grad: bool,
    op: Op,
}

/// Records operations in execution order; inputs always precede outputs.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    first_non_finite: Option<(usize, &'static str)>,
}

/// Result of [`Tape::backward`]. Tensors that did not participate in the
/// loss have zero gradient.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Tensor {
        let shape = self.shapes[v.0].clone();
        match &self.grads[v.0] {
            Some(g) => Tensor::new(shape, g.clone()).expect("gradient shape"),
            None => Tensor::zeros(&shape),
        }
    }

    /// Borrowed gradient data, `None` when the variable was not reached.
    pub fn raw(&self, v: Var) -> Option<&[f64]> {
        self.grads[v.0].as_deref()
    }
}

fn softplus(x: f64) -> f64 {
    // log(1 + e^x) without overflow.
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
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

pub(crate) fn stable_softplus(x: f64) -> f64 {
    softplus(x)
}

pub(crate) fn stable_sigmoid(x: f64) -> f64 {
    sigmoid(x)
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        let id = self.nodes.len();
        if self.first_non_finite.is_none() && !value.is_finite() {
            log::warn!("non-finite value produced by {} (node {id})", op.name());
            self.first_non_finite = Some((id, op.name()));
        }
        self.nodes.push(Node {
            value,
            requires_grad,
            op,
        });
        Var(id)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    /// First operation (node index, op name) that produced NaN or ±Inf.
    pub fn non_finite(&self) -> Option<(usize, &'static str)> {
        self.first_non_finite
    }

    /// Trainable leaf.
    pub fn param(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, true)
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    pub fn leaf(&mut self, t: Tensor, requires_grad: bool) -> Var {
        self.push(t, Op::Leaf, requires_grad)
    }

    fn dims2(&self, v: Var, op: &'static str) -> Result<(usize, usize)> {
        let s = self.shape(v);
        if s.len() != 2 {
            return Err(Error::shape(op, s, &[0, 0]));
        }
        Ok((s[0], s[1]))
    }

    fn same_shape(&self, a: Var, b: Var, op: &'static str) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(op, self.shape(a), self.shape(b)));
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.dims2(a, "matmul")?;
        let (k2, n) = self.dims2(b, "matmul")?;
        if k != k2 {
            return Err(Error::shape("matmul", self.shape(a), self.shape(b)));
        }
        let mut out = vec![0.0; m * n];
        gemm_acc(
            self.value(a).data(),
            self.value(b).data(),
            &mut out,
            m,
            k,
            n,
        );
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(Tensor::matrix(m, n, out)?, Op::MatMul(a, b), rg))
    }

    fn zip_with(&mut self, a: Var, b: Var, op: Op, f: impl Fn(f64, f64) -> f64) -> Result<Var> {
        let name = op.name();
        self.same_shape(a, b, name)?;
        let va = self.value(a);
        let data = va
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let t = Tensor::new(va.shape().to_vec(), data)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(t, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with(a, b, Op::Hadamard(a, b), |x, y| x * y)
    }

    /// Adds a length-`n` row (shape `[n]` or `[1, n]`) to every row of an
    /// `m×n` matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (m, n) = self.dims2(a, "add_row")?;
        if self.value(row).len() != n {
            return Err(Error::shape("add_row", self.shape(a), self.shape(row)));
        }
        let r = self.value(row).data();
        let mut data = self.value(a).data().to_vec();
        for i in 0..m {
            for (x, &b) in data[i * n..(i + 1) * n].iter_mut().zip(r) {
                *x += b;
            }
        }
        let rg = self.rg(a) || self.rg(row);
        Ok(self.push(Tensor::matrix(m, n, data)?, Op::AddRow(a, row), rg))
    }

    fn map(&mut self, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let va = self.value(a);
        let t = Tensor::new(
            va.shape().to_vec(),
            va.data().iter().map(|&x| f(x)).collect(),
        )
        .expect("same shape");
        let rg = self.rg(a);
        self.push(t, op, rg)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        self.map(a, Op::AddScalar(a), |x| x + c)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.map(a, Op::Scale(a, c), |x| x * c)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.map(a, Op::Relu(a), |x| if x > 0.0 { x } else { 0.0 })
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, Op::Sigmoid(a), sigmoid)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, Op::Tanh(a), f64::tanh)
    }

    pub fn softplus(&mut self, a: Var) -> Var {
        self.map(a, Op::Softplus(a), softplus)
    }

    pub fn abs(&mut self, a: Var) -> Var {
        self.map(a, Op::Abs(a), f64::abs)
    }

    /// Identity activation; records nothing.
    pub fn linear(&mut self, a: Var) -> Var {
        a
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::Contract("concat_cols of nothing".into()))?;
        let (m, _) = self.dims2(first, "concat_cols")?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (pm, pn) = self.dims2(p, "concat_cols")?;
            if pm != m {
                return Err(Error::shape(
                    "concat_cols",
                    self.shape(first),
                    self.shape(p),
                ));
            }
            widths.push(pn);
        }
        let n: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            for (&p, &w) in parts.iter().zip(&widths) {
                data.extend_from_slice(&self.value(p).data()[i * w..(i + 1) * w]);
            }
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(
            Tensor::matrix(m, n, data)?,
            Op::ConcatCols(parts.to_vec()),
            rg,
        ))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::Contract("concat_rows of nothing".into()))?;
        let (_, n) = self.dims2(first, "concat_rows")?;
        let mut m = 0;
        for &p in parts {
            let (pm, pn) = self.dims2(p, "concat_rows")?;
            if pn != n {
                return Err(Error::shape(
                    "concat_rows",
                    self.shape(first),
                    self.shape(p),
                ));
            }
            m += pm;
        }
        let mut data = Vec::with_capacity(m * n);
        for &p in parts {
            data.extend_from_slice(self.value(p).data());
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        Ok(self.push(
            Tensor::matrix(m, n, data)?,
            Op::ConcatRows(parts.to_vec()),
            rg,
        ))
    }

    pub fn reduce_sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        let rg = self.rg(a);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    pub fn reduce_mean(&mut self, a: Var) -> Result<Var> {
        let v = self.value(a);
        if v.is_empty() {
            return Err(Error::Contract("reduce_mean of an empty tensor".into()));
        }
        let s = v.data().iter().sum::<f64>() / v.len() as f64;
        let rg = self.rg(a);
        Ok(self.push(Tensor::scalar(s), Op::Mean(a), rg))
    }

    /// Maximum element; the gradient goes to the first maximizer.
    pub fn reduce_max(&mut self, a: Var) -> Result<Var> {
        let v = self.value(a);
        let (idx, &m) = v
            .data()
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, &f64)>, (i, x)| match best {
                Some((_, b)) if *b >= *x => best,
                _ => Some((i, x)),
            })
            .ok_or_else(|| Error::Contract("reduce_max of an empty tensor".into()))?;
        let rg = self.rg(a);
        Ok(self.push(Tensor::scalar(m), Op::Max(a, idx), rg))
    }

    /// Rows `start..end` of a matrix.
    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let (m, n) = self.dims2(a, "slice_rows")?;
        if start > end || end > m {
            return Err(Error::shape("slice_rows", &[m, n], &[start, end]));
        }
        let data = self.value(a).data()[start * n..end * n].to_vec();
        let rg = self.rg(a);
        Ok(self.push(
            Tensor::matrix(end - start, n, data)?,
            Op::SliceRows(a, start),
            rg,
        ))
    }

    /// Selects rows by index; `None` yields a zero row.
    pub fn gather_rows(&mut self, a: Var, idx: &[Option<usize>]) -> Result<Var> {
        let (m, n) = self.dims2(a, "gather_rows")?;
        let mut data = vec![0.0; idx.len() * n];
        for (r, i) in idx.iter().enumerate() {
            if let Some(i) = *i {
                if i >= m {
                    return Err(Error::shape("gather_rows", &[m, n], &[i]));
                }
                data[r * n..(r + 1) * n].copy_from_slice(&self.value(a).data()[i * n..(i + 1) * n]);
            }
        }
        let rg = self.rg(a);
        Ok(self.push(
            Tensor::matrix(idx.len(), n, data)?,
            Op::GatherRows(a, idx.to_vec()),
            rg,
        ))
    }

    /// Row lookup into an embedding table.
    pub fn embedding_lookup(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let idx: Vec<Option<usize>> = ids.iter().map(|&i| Some(i)).collect();
        self.gather_rows(table, &idx)
    }

    /// Sparse-times-dense product with a constant sparse left operand.
    pub fn spmm(&mut self, s: &Arc<SparseMatrix>, x: Var) -> Result<Var> {
        let (m, n) = self.dims2(x, "spmm")?;
        if s.cols() != m {
            return Err(Error::shape("spmm", &[s.rows(), s.cols()], &[m, n]));
        }
        let data = s.mul_dense(self.value(x).data(), n);
        let rg = self.rg(x);
        Ok(self.push(
            Tensor::matrix(s.rows(), n, data)?,
            Op::SpMM(Arc::clone(s), x),
            rg,
        ))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let t = self.value(a).clone().reshaped(shape.to_vec())?;
        let rg = self.rg(a);
        Ok(self.push(t, Op::Reshape(a), rg))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        self.dims2(a, "transpose")?;
        let t = self.value(a).transpose();
        let rg = self.rg(a);
        Ok(self.push(t, Op::Transpose(a), rg))
    }

    /// Reverse sweep from a one-element `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.value(loss).len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[id].take() else {
                continue;
            };
            self.propagate(node, &g, &mut grads);
            grads[id] = Some(g);
        }
        grads.resize(self.nodes.len(), None);
        Ok(Gradients {
            grads,
            shapes: self
                .nodes
                .iter()
                .map(|n| n.value.shape().to_vec())
                .collect(),
        })
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let val = |v: Var| self.nodes[v.0].value.data();
        let wants = |v: Var| self.nodes[v.0].requires_grad;
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if !self.nodes[v.0].requires_grad {
                return;
            }
            let slot = grads[v.0].get_or_insert_with(|| vec![0.0; self.nodes[v.0].value.len()]);
            f(slot);
        };
        let out = node.value.data();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = (self.value(*a).rows(), self.value(*a).cols());
                let n = self.value(*b).cols();
                if wants(*a) {
                    acc(*a, &mut |s| gemm_nt_acc(g, val(*b), s, m, n, k));
                }
                if wants(*b) {
                    acc(*b, &mut |s| gemm_tn_acc(val(*a), g, s, m, k, n));
                }
            }
            Op::Add(a, b) => {
                acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x += y));
                acc(*b, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x += y));
            }
            Op::Sub(a, b) => {
                acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x += y));
                acc(*b, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x -= y));
            }
            Op::AddRow(a, row) => {
                acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x += y));
                let n = self.value(*row).len();
                acc(*row, &mut |s| {
                    for chunk in g.chunks(n) {
                        s.iter_mut().zip(chunk).for_each(|(x, y)| *x += y);
                    }
                });
            }
            Op::AddScalar(a) => {
                acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x += y));
            }
            Op::Scale(a, c) => {
                acc(*a, &mut |s| {
                    s.iter_mut().zip(g).for_each(|(x, y)| *x += c * y)
                });
            }
            Op::Hadamard(a, b) => {
                let (va, vb) = (val(*a), val(*b));
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        s[i] += g[i] * vb[i];
                    }
                });
                acc(*b, &mut |s| {
                    for i in 0..s.len() {
                        s[i] += g[i] * va[i];
                    }
                });
            }
            Op::ConcatCols(parts) => {
                let m = node.value.rows();
                let n = node.value.cols();
                let mut offset = 0;
                for &p in parts {
                    let w = self.value(p).cols();
                    acc(p, &mut |s| {
                        for i in 0..m {
                            for j in 0..w {
                                s[i * w + j] += g[i * n + offset + j];
                            }
                        }
                    });
                    offset += w;
                }
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    acc(p, &mut |s| {
                        s.iter_mut()
                            .zip(&g[offset..offset + len])
                            .for_each(|(x, y)| *x += y)
                    });
                    offset += len;
                }
            }
            Op::Relu(a) => {
                let va = val(*a);
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        if va[i] > 0.0 {
                            s[i] += g[i];
                        }
                    }
                });
            }
            Op::Sigmoid(a) => {
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        s[i] += g[i] * out[i] * (1.0 - out[i]);
                    }
                });
            }
            Op::Tanh(a) => {
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        s[i] += g[i] * (1.0 - out[i] * out[i]);
                    }
                });
            }
            Op::Softplus(a) => {
                let va = val(*a);
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        s[i] += g[i] * sigmoid(va[i]);
                    }
                });
            }
            Op::Abs(a) => {
                let va = val(*a);
                acc(*a, &mut |s| {
                    for i in 0..s.len() {
                        if va[i] > 0.0 {
                            s[i] += g[i];
                        } else if va[i] < 0.0 {
                            s[i] -= g[i];
                        }
                    }
                });
            }
            Op::Sum(a) => {
                acc(*a, &mut |s| s.iter_mut().for_each(|x| *x += g[0]));
            }
            Op::Mean(a) => {
                let n = self.value(*a).len() as f64;
                acc(*a, &mut |s| s.iter_mut().for_each(|x| *x += g[0] / n));
            }
            Op::Max(a, idx) => {
                acc(*a, &mut |s| s[*idx] += g[0]);
            }
            Op::SliceRows(a, start) => {
                let n = self.value(*a).cols();
                let base = start * n;
                acc(*a, &mut |s| {
                    s[base..base + g.len()]
                        .iter_mut()
                        .zip(g)
                        .for_each(|(x, y)| *x += y)
                });
            }
            Op::GatherRows(a, idx) => {
                let n = self.value(*a).cols();
                acc(*a, &mut |s| {
                    for (r, i) in idx.iter().enumerate() {
                        if let Some(i) = *i {
                            for j in 0..n {
                                s[i * n + j] += g[r * n + j];
                            }
                        }
                    }
                });
            }
            Op::SpMM(sp, x) => {
                let n = self.value(*x).cols();
                acc(*x, &mut |s| sp.mul_transpose_acc(g, n, s));
            }
            Op::Reshape(a) => {
                acc(*a, &mut |s| s.iter_mut().zip(g).for_each(|(x, y)| *x += y));
            }
            Op::Transpose(a) => {
                let (r, c) = (self.value(*a).rows(), self.value(*a).cols());
                acc(*a, &mut |s| {
                    for i in 0..r {
                        for j in 0..c {
                            s[i * c + j] += g[j * r + i];
                        }
                    }
                });
            }
        }
    }

    /// Text listing of the recorded operations, one per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "%{i} = {}{:?} shape={:?}{}",
                node.op.name(),
                inputs(&node.op),
                node.value.shape(),
                if node.requires_grad { " grad" } else { "" }
            );
        }
        out
    }
}

fn inputs(op: &Op) -> Vec<usize> {
    match op {
        Op::Leaf => vec![],
        Op::MatMul(a, b)
        | Op::Add(a, b)
        | Op::Sub(a, b)
        | Op::AddRow(a, b)
        | Op::Hadamard(a, b) => {
            vec![a.0, b.0]
        }
        Op::ConcatCols(ps) | Op::ConcatRows(ps) => ps.iter().map(|p| p.0).collect(),
        Op::AddScalar(a)
        | Op::Scale(a, _)
        | Op::Relu(a)
        | Op::Sigmoid(a)
        | Op::Tanh(a)
        | Op::Softplus(a)
        | Op::Abs(a)
        | Op::Sum(a)
        | Op::Mean(a)
        | Op::Max(a, _)
        | Op::SliceRows(a, _)
        | Op::GatherRows(a, _)
        | Op::SpMM(_, a)
        | Op::Reshape(a)
        | Op::Transpose(a) => vec![a.0],
    }
}
