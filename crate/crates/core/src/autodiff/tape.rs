use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::minkowski::{psi, psi_derivative};
use crate::qsim::{grad_ansatz, run_ansatz, vjp_ansatz, AnsatzConfig};
use crate::scalar::Real;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// How a quantum node differentiates its circuit in the backward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantumGrad {
    /// Full Jacobians from the parameter-shift rule, contracted with the upstream gradient.
    #[default]
    ParameterShift,
    /// Adjoint sweep computing the vector-Jacobian product directly.
    Adjoint,
}

#[derive(Debug, Clone)]
enum Op<T> {
    Leaf,
    Linear { x: Var, w: Var, b: Option<Var> },
    Relu(Var),
    Sigmoid(Var),
    Tanh(Var),
    Psi(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Scale(Var, T),
    MulScalar { s: Var, x: Var },
    Concat(Vec<Var>),
    Sum(Vec<Var>),
    SumElements(Var),
    MinkowskiInner(Var, Var),
    Quantum { enc: Var, theta: Var, cfg: Arc<AnsatzConfig> },
    SoftmaxCrossEntropy { logits: Var, label: usize },
}

#[derive(Debug, Clone)]
struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
}

/// Append-only record of a forward computation. Nodes are stored in creation order, which is
/// a topological order, so the backward pass is a single reverse sweep.
#[derive(Debug, Clone, Default)]
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
    quantum_grad: QuantumGrad,
}

fn mismatch(op: &'static str, expected: impl std::fmt::Debug, found: impl std::fmt::Debug) -> Error {
    Error::ShapeMismatch { op, expected: format!("{expected:?}"), found: format!("{found:?}") }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), quantum_grad: QuantumGrad::default() }
    }

    pub fn with_quantum_grad(quantum_grad: QuantumGrad) -> Self {
        Self { nodes: Vec::new(), quantum_grad }
    }

    pub fn quantum_grad(&self) -> QuantumGrad {
        self.quantum_grad
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn data(&self, v: Var) -> &[T] {
        self.nodes[v.0].value.data()
    }

    fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].value.requires_grad()
    }

    fn push(&mut self, shape: Vec<usize>, data: Vec<T>, inputs: &[Var], op: Op<T>) -> Var {
        let rg = inputs.iter().any(|&v| self.requires_grad(v));
        self.nodes.push(Node { value: Tensor::from_parts(shape, data, rg), op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, t: Tensor<T>) -> Var {
        self.nodes.push(Node { value: t, op: Op::Leaf });
        Var(self.nodes.len() - 1)
    }

    /// Trainable leaf.
    pub fn param(&mut self, shape: Vec<usize>, data: Vec<T>) -> Result<Var> {
        Ok(self.leaf(Tensor::new(shape, data)?.with_requires_grad(true)))
    }

    pub fn constant(&mut self, shape: Vec<usize>, data: Vec<T>) -> Result<Var> {
        Ok(self.leaf(Tensor::new(shape, data)?))
    }

    pub fn constant_vector(&mut self, data: Vec<T>) -> Var {
        self.leaf(Tensor::vector(data))
    }

    /// `W x + b` with `W: [n_out, n_in]`, `x: [n_in]`, `b: [n_out]`.
    pub fn linear(&mut self, x: Var, w: Var, b: Option<Var>) -> Result<Var> {
        let (xs, ws) = (self.value(x).shape(), self.value(w).shape());
        if ws.len() != 2 || xs.len() != 1 || ws[1] != xs[0] {
            return Err(mismatch("linear", format!("W [n_out, {}]", xs.first().copied().unwrap_or(0)), ws));
        }
        let (n_out, n_in) = (ws[0], ws[1]);
        if let Some(b) = b {
            if self.value(b).shape() != [n_out] {
                return Err(mismatch("linear bias", [n_out], self.value(b).shape()));
            }
        }
        let (xd, wd) = (self.data(x), self.data(w));
        let mut out: Vec<T> = match b {
            Some(b) => self.data(b).to_vec(),
            None => vec![T::zero(); n_out],
        };
        for (o, acc) in out.iter_mut().enumerate() {
            let row = &wd[o * n_in..(o + 1) * n_in];
            for (wv, xv) in row.iter().zip(xd) {
                *acc += *wv * *xv;
            }
        }
        let inputs: Vec<Var> = [x, w].into_iter().chain(b).collect();
        Ok(self.push(vec![n_out], out, &inputs, Op::Linear { x, w, b }))
    }

    fn unary(&mut self, x: Var, f: impl Fn(T) -> T, op: Op<T>) -> Var {
        let shape = self.value(x).shape().to_vec();
        let data = self.data(x).iter().map(|&v| f(v)).collect();
        self.push(shape, data, &[x], op)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.unary(x, |v| if v > T::zero() { v } else { T::zero() }, Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.unary(x, sigmoid, Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.unary(x, |v| v.tanh(), Op::Tanh(x))
    }

    /// Elementwise `sgn(z)·ln(1 + |z|)`.
    pub fn psi(&mut self, x: Var) -> Var {
        self.unary(x, psi, Op::Psi(x))
    }

    pub fn scale(&mut self, x: Var, c: T) -> Var {
        self.unary(x, |v| v * c, Op::Scale(x, c))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(mismatch(op, self.value(a).shape(), self.value(b).shape()));
        }
        Ok(())
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let data = self.data(a).iter().zip(self.data(b)).map(|(&x, &y)| x + y).collect();
        Ok(self.push(self.value(a).shape().to_vec(), data, &[a, b], Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        let data = self.data(a).iter().zip(self.data(b)).map(|(&x, &y)| x - y).collect();
        Ok(self.push(self.value(a).shape().to_vec(), data, &[a, b], Op::Sub(a, b)))
    }

    /// `s · x` for a one-element `s`.
    pub fn mul_scalar(&mut self, s: Var, x: Var) -> Result<Var> {
        let sv = self.value(s).item().ok_or_else(|| mismatch("mul_scalar", "one element", self.value(s).shape()))?;
        let data = self.data(x).iter().map(|&v| sv * v).collect();
        Ok(self.push(self.value(x).shape().to_vec(), data, &[s, x], Op::MulScalar { s, x }))
    }

    /// Concatenation of flattened inputs into one vector.
    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let data: Vec<T> = parts.iter().flat_map(|&p| self.data(p).iter().copied()).collect();
        self.push(vec![data.len()], data, parts, Op::Concat(parts.to_vec()))
    }

    /// Elementwise sum of equally shaped tensors.
    pub fn sum(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or_else(|| Error::InvalidArgument("sum of zero tensors".into()))?;
        for &p in &parts[1..] {
            self.same_shape("sum", first, p)?;
        }
        let mut data = self.data(first).to_vec();
        for &p in &parts[1..] {
            for (acc, &v) in data.iter_mut().zip(self.data(p)) {
                *acc += v;
            }
        }
        Ok(self.push(self.value(first).shape().to_vec(), data, parts, Op::Sum(parts.to_vec())))
    }

    pub fn mean(&mut self, parts: &[Var]) -> Result<Var> {
        let s = self.sum(parts)?;
        Ok(self.scale(s, T::one() / T::from_usize(parts.len()).expect("count fits")))
    }

    pub fn sum_elements(&mut self, x: Var) -> Var {
        let total = self.data(x).iter().copied().sum();
        self.push(Vec::new(), vec![total], &[x], Op::SumElements(x))
    }

    /// `aᵀ η b` for two length-4 vectors in `(e, px, py, pz)` order.
    pub fn minkowski_inner(&mut self, a: Var, b: Var) -> Result<Var> {
        for v in [a, b] {
            if self.value(v).len() != 4 {
                return Err(mismatch("minkowski_inner", [4], self.value(v).shape()));
            }
        }
        let (x, y) = (self.data(a), self.data(b));
        let out = -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
        Ok(self.push(Vec::new(), vec![out], &[a, b], Op::MinkowskiInner(a, b)))
    }

    /// Circuit expectations `⟨Z_q⟩` as a differentiable node.
    pub fn quantum(&mut self, enc: Var, theta: Var, cfg: Arc<AnsatzConfig>) -> Result<Var> {
        if self.value(enc).len() != cfg.n_qubits() {
            return Err(mismatch("quantum encoding", [cfg.n_qubits()], self.value(enc).shape()));
        }
        if self.value(theta).len() != cfg.n_params() {
            return Err(mismatch("quantum theta", [cfg.n_params()], self.value(theta).shape()));
        }
        let out = run_ansatz(&cfg, self.data(enc), self.data(theta))?;
        Ok(self.push(vec![out.len()], out, &[enc, theta], Op::Quantum { enc, theta, cfg }))
    }

    /// `−log softmax(logits)[label]` for two-class logits.
    pub fn softmax_cross_entropy(&mut self, logits: Var, label: usize) -> Result<Var> {
        if self.value(logits).shape() != [2] {
            return Err(mismatch("softmax_cross_entropy", [2], self.value(logits).shape()));
        }
        if label > 1 {
            return Err(Error::InvalidLabel(label));
        }
        let loss = cross_entropy(self.data(logits), label);
        Ok(self.push(Vec::new(), vec![loss], &[logits], Op::SoftmaxCrossEntropy { logits, label }))
    }

    pub fn backward(&self, root: Var) -> Result<Gradients<T>> {
        self.backward_with_seed(root, T::one())
    }

    /// Reverse sweep from a scalar `root` seeded with `d root = seed`.
    pub fn backward_with_seed(&self, root: Var, seed: T) -> Result<Gradients<T>> {
        let rv = self.value(root);
        if rv.len() != 1 {
            return Err(Error::NonScalarRoot(rv.len()));
        }
        let mut grads: Vec<Option<Vec<T>>> = vec![None; root.0 + 1];
        if rv.requires_grad() {
            grads[root.0] = Some(vec![seed]);
        }
        for i in (0..=root.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads)?;
            grads[i] = Some(g);
        }
        let requires: Vec<bool> = self.nodes[..=root.0].iter().map(|n| n.value.requires_grad()).collect();
        Ok(Gradients { grads, requires, lens: self.nodes[..=root.0].iter().map(|n| n.value.len()).collect() })
    }

    fn propagate(&self, i: usize, g: &[T], grads: &mut [Option<Vec<T>>]) -> Result<()> {
        let node = &self.nodes[i];
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [T])| {
            if self.requires_grad(v) {
                let len = self.value(v).len();
                let slot = grads[v.0].get_or_insert_with(|| vec![T::zero(); len]);
                f(slot);
            }
        };
        match &node.op {
            Op::Leaf => {}
            &Op::Linear { x, w, b } => {
                let n_in = self.value(x).len();
                let (xd, wd) = (self.data(x), self.data(w));
                acc(x, &mut |gx| {
                    for (o, &go) in g.iter().enumerate() {
                        for (k, gk) in gx.iter_mut().enumerate() {
                            *gk += wd[o * n_in + k] * go;
                        }
                    }
                });
                acc(w, &mut |gw| {
                    for (o, &go) in g.iter().enumerate() {
                        for (k, &xk) in xd.iter().enumerate() {
                            gw[o * n_in + k] += go * xk;
                        }
                    }
                });
                if let Some(b) = b {
                    acc(b, &mut |gb| add_into(gb, g));
                }
            }
            &Op::Relu(x) => {
                let xd = self.data(x);
                acc(x, &mut |gx| {
                    for ((gk, &xk), &gi) in gx.iter_mut().zip(xd).zip(g) {
                        if xk > T::zero() {
                            *gk += gi;
                        }
                    }
                });
            }
            &Op::Sigmoid(x) => {
                let y = node.value.data();
                acc(x, &mut |gx| {
                    for ((gk, &yk), &gi) in gx.iter_mut().zip(y).zip(g) {
                        *gk += gi * yk * (T::one() - yk);
                    }
                });
            }
            &Op::Tanh(x) => {
                let y = node.value.data();
                acc(x, &mut |gx| {
                    for ((gk, &yk), &gi) in gx.iter_mut().zip(y).zip(g) {
                        *gk += gi * (T::one() - yk * yk);
                    }
                });
            }
            &Op::Psi(x) => {
                let xd = self.data(x);
                acc(x, &mut |gx| {
                    for ((gk, &xk), &gi) in gx.iter_mut().zip(xd).zip(g) {
                        *gk += gi * psi_derivative(xk);
                    }
                });
            }
            &Op::Add(a, b) => {
                acc(a, &mut |ga| add_into(ga, g));
                acc(b, &mut |gb| add_into(gb, g));
            }
            &Op::Sub(a, b) => {
                acc(a, &mut |ga| add_into(ga, g));
                acc(b, &mut |gb| {
                    for (gk, &gi) in gb.iter_mut().zip(g) {
                        *gk -= gi;
                    }
                });
            }
            &Op::Scale(x, c) => {
                acc(x, &mut |gx| {
                    for (gk, &gi) in gx.iter_mut().zip(g) {
                        *gk += c * gi;
                    }
                });
            }
            &Op::MulScalar { s, x } => {
                let sv = self.data(s)[0];
                let xd = self.data(x);
                acc(s, &mut |gs| gs[0] += xd.iter().zip(g).map(|(&a, &b)| a * b).sum());
                acc(x, &mut |gx| {
                    for (gk, &gi) in gx.iter_mut().zip(g) {
                        *gk += sv * gi;
                    }
                });
            }
            Op::Concat(parts) => {
                let mut off = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    acc(p, &mut |gp| add_into(gp, &g[off..off + len]));
                    off += len;
                }
            }
            Op::Sum(parts) => {
                for &p in parts {
                    acc(p, &mut |gp| add_into(gp, g));
                }
            }
            &Op::SumElements(x) => {
                acc(x, &mut |gx| {
                    for gk in gx.iter_mut() {
                        *gk += g[0];
                    }
                });
            }
            &Op::MinkowskiInner(a, b) => {
                let (ad, bd) = (self.data(a), self.data(b));
                // d(aᵀηb)/da = ηb, d/db = ηa
                acc(a, &mut |ga| {
                    ga[0] -= g[0] * bd[0];
                    for k in 1..4 {
                        ga[k] += g[0] * bd[k];
                    }
                });
                acc(b, &mut |gb| {
                    gb[0] -= g[0] * ad[0];
                    for k in 1..4 {
                        gb[k] += g[0] * ad[k];
                    }
                });
            }
            Op::Quantum { enc, theta, cfg } => {
                let (enc, theta) = (*enc, *theta);
                if !(self.requires_grad(enc) || self.requires_grad(theta)) {
                    return Ok(());
                }
                let (ge, gt) = match self.quantum_grad {
                    QuantumGrad::ParameterShift => grad_ansatz(cfg, self.data(enc), self.data(theta))?.contract(g),
                    QuantumGrad::Adjoint => {
                        let vjp = vjp_ansatz(cfg, self.data(enc), self.data(theta), g)?;
                        (vjp.grad_encoding, vjp.grad_theta)
                    }
                };
                acc(enc, &mut |gx| add_into(gx, &ge));
                acc(theta, &mut |gx| add_into(gx, &gt));
            }
            &Op::SoftmaxCrossEntropy { logits, label } => {
                let l = self.data(logits);
                let lse = log_sum_exp(l);
                acc(logits, &mut |gl| {
                    for (k, gk) in gl.iter_mut().enumerate() {
                        let p = (l[k] - lse).exp();
                        let onehot = if k == label { T::one() } else { T::zero() };
                        *gk += g[0] * (p - onehot);
                    }
                });
            }
        }
        Ok(())
    }
}

#[inline]
fn sigmoid<T: Real>(v: T) -> T {
    if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    }
}

/// `(m − l[label]) + ln(1 + Σ_{k≠argmax} e^{l_k − m})` with `m = max l`, which keeps full
/// relative precision when the label is the confident class.
fn cross_entropy<T: Real>(l: &[T], label: usize) -> T {
    let (arg, m) =
        l.iter().copied().enumerate().fold((0, T::neg_infinity()), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    let rest: T = l.iter().enumerate().filter(|&(k, _)| k != arg).map(|(_, &v)| (v - m).exp()).sum();
    (m - l[label]) + rest.ln_1p()
}

fn log_sum_exp<T: Real>(l: &[T]) -> T {
    let m = l.iter().copied().fold(T::neg_infinity(), T::max);
    m + l.iter().map(|&v| (v - m).exp()).sum::<T>().ln()
}

#[inline]
fn add_into<T: Real>(dst: &mut [T], src: &[T]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Result of a backward pass.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    grads: Vec<Option<Vec<T>>>,
    requires: Vec<bool>,
    lens: Vec<usize>,
}

impl<T: Real> Gradients<T> {
    /// Gradient of the root with respect to `v`: `None` when `v` does not require gradients,
    /// zeros when it does but the root does not depend on it.
    pub fn get(&self, v: Var) -> Option<Vec<T>> {
        match self.requires.get(v.0) {
            Some(true) => Some(self.grads[v.0].clone().unwrap_or_else(|| vec![T::zero(); self.lens[v.0]])),
            _ => None,
        }
    }

    /// Borrowing accessor; `None` both for non-differentiable and for untouched nodes.
    pub fn get_ref(&self, v: Var) -> Option<&[T]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }
}
