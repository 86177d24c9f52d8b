//! Brute-force reference: every gate is lifted to a full `2^n × 2^n` matrix with Kronecker
//! products and the circuit unitary is formed by explicit matrix multiplication.
//!
//! Nothing here shares code with the statevector kernels; it exists to check them.

use num_complex::Complex;

use super::ansatz::AnsatzConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const ORACLE_MAX_QUBITS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_real(dim: usize, entries: &[T]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self { dim, data: entries.iter().map(|&e| Complex::new(e, T::zero())).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.dim + c]
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] = out.data[r * n + c] + a * rhs.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (n, m) = (self.dim, rhs.dim);
        let mut out = Self::zeros(n * m);
        for a in 0..n {
            for b in 0..n {
                for c in 0..m {
                    for d in 0..m {
                        out.data[(a * m + c) * (n * m) + (b * m + d)] = self.get(a, b) * rhs.get(c, d);
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|r| self.get(r, c)).collect()
    }
}

/// A gate as the oracle understands it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleGate<T> {
    H(usize),
    Ry(usize, T),
    Cnot(usize, usize),
}

fn hadamard<T: Real>() -> DenseMatrix<T> {
    let r = T::FRAC_1_SQRT_2();
    DenseMatrix::from_real(2, &[r, r, r, -r])
}

fn ry<T: Real>(angle: T) -> DenseMatrix<T> {
    let (s, c) = (angle / T::lit(2.0)).sin_cos();
    DenseMatrix::from_real(2, &[c, -s, s, c])
}

fn pauli_x<T: Real>() -> DenseMatrix<T> {
    DenseMatrix::from_real(2, &[T::zero(), T::one(), T::one(), T::zero()])
}

fn pauli_z<T: Real>() -> DenseMatrix<T> {
    DenseMatrix::from_real(2, &[T::one(), T::zero(), T::zero(), -T::one()])
}

fn projector<T: Real>(bit: usize) -> DenseMatrix<T> {
    let (p0, p1) = if bit == 0 { (T::one(), T::zero()) } else { (T::zero(), T::one()) };
    DenseMatrix::from_real(2, &[p0, T::zero(), T::zero(), p1])
}

/// `⊗_{q = n−1 … 0}` of the given per-qubit factors (identity where absent). Qubit `q` is
/// bit `q` of the basis index, so the highest qubit is the leftmost Kronecker factor.
pub fn embed<T: Real>(n_qubits: usize, factors: &[(usize, DenseMatrix<T>)]) -> DenseMatrix<T> {
    let mut out = DenseMatrix::identity(1);
    for q in (0..n_qubits).rev() {
        let f =
            factors.iter().find(|(fq, _)| *fq == q).map(|(_, m)| m.clone()).unwrap_or_else(|| DenseMatrix::identity(2));
        out = out.kron(&f);
    }
    out
}

/// Full-register matrix of one gate.
pub fn gate_matrix<T: Real>(n_qubits: usize, gate: &OracleGate<T>) -> DenseMatrix<T> {
    match *gate {
        OracleGate::H(q) => embed(n_qubits, &[(q, hadamard())]),
        OracleGate::Ry(q, a) => embed(n_qubits, &[(q, ry(a))]),
        OracleGate::Cnot(c, t) => {
            embed(n_qubits, &[(c, projector(0))]).add(&embed(n_qubits, &[(c, projector(1)), (t, pauli_x())]))
        }
    }
}

/// Product of the gate matrices, first gate rightmost.
pub fn dense_unitary<T: Real>(n_qubits: usize, gates: &[OracleGate<T>]) -> Result<DenseMatrix<T>> {
    if n_qubits == 0 || n_qubits > ORACLE_MAX_QUBITS {
        return Err(Error::QubitCount { n: n_qubits, min: 1, max: ORACLE_MAX_QUBITS });
    }
    let mut u = DenseMatrix::identity(1 << n_qubits);
    for g in gates {
        u = gate_matrix(n_qubits, g).matmul(&u);
    }
    Ok(u)
}

/// Ansatz unitary and the `⟨Z_q⟩` it produces from `|0…0⟩`.
#[derive(Debug, Clone)]
pub struct DenseCircuit<T> {
    pub unitary: DenseMatrix<T>,
    pub expectations: Vec<T>,
}

pub fn dense_unitary_oracle<T: Real>(cfg: &AnsatzConfig, encoding: &[T], theta: &[T]) -> Result<DenseCircuit<T>> {
    let n = cfg.n_qubits();
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::QubitCount { n, min: 1, max: ORACLE_MAX_QUBITS });
    }
    if encoding.len() != n {
        return Err(Error::LengthMismatch { what: "encoding angles", expected: n, found: encoding.len() });
    }
    if theta.len() != cfg.n_params() {
        return Err(Error::LengthMismatch { what: "circuit parameters", expected: cfg.n_params(), found: theta.len() });
    }
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(OracleGate::H(q));
    }
    for (q, &x) in encoding.iter().enumerate() {
        gates.push(OracleGate::Ry(q, x));
    }
    for (layer, pairs) in cfg.entanglers().iter().enumerate() {
        for &(c, t) in pairs {
            gates.push(OracleGate::Cnot(c, t));
        }
        for q in 0..n {
            gates.push(OracleGate::Ry(q, theta[layer * n + q]));
        }
    }
    let unitary = dense_unitary(n, &gates)?;
    let psi = unitary.column(0);
    let expectations = (0..n)
        .map(|q| {
            let z = embed(n, &[(q, pauli_z())]);
            let mut acc = Complex::new(T::zero(), T::zero());
            for r in 0..psi.len() {
                for c in 0..psi.len() {
                    acc = acc + psi[r].conj() * z.get(r, c) * psi[c];
                }
            }
            acc.re
        })
        .collect();
    Ok(DenseCircuit { unitary, expectations })
}
