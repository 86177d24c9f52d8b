//! Lorentz-equivariant block, expressed as tape operations.
//!
//! Per block, for every ordered pair `i ≠ j`:
//!
//! ```text
//! m_ij   = φ_e([h_i, h_j, ψ(‖x_i − x_j‖²), ψ(⟨x_i, x_j⟩)])
//! x_i'   = x_i + c · Σ_{j≠i} φ_x(m_ij) · x_j
//! w_ij   = sigmoid(φ_m(m_ij))
//! h_i'   = h_i + φ_h([h_i, c · Σ_{j≠i} w_ij · h_j])
//! ```
//!
//! Four-momenta enter only through the two Minkowski invariants, so every `φ` output is
//! Lorentz invariant and `x'` is a linear combination of the input four-vectors.

use std::sync::Arc;

use super::layout::{Affine, PhiModule};
use crate::autodiff::{Tape, Var};
use crate::error::Result;
use crate::qsim::AnsatzConfig;
use crate::scalar::Real;

/// A learnable function recorded on a tape.
pub trait Phi<T: Real> {
    fn forward(&self, tape: &mut Tape<T>, input: Var) -> Result<Var>;
}

impl<T: Real, F> Phi<T> for F
where
    F: Fn(&mut Tape<T>, Var) -> Result<Var>,
{
    fn forward(&self, tape: &mut Tape<T>, input: Var) -> Result<Var> {
        self(tape, input)
    }
}

/// A [`PhiModule`] bound to the tape variables holding its parameters.
pub struct BoundPhi<'a> {
    pub module: PhiModule,
    pub params: &'a [Var],
    pub circuit: &'a Arc<AnsatzConfig>,
}

fn affine<T: Real>(tape: &mut Tape<T>, params: &[Var], a: &Affine, x: Var) -> Result<Var> {
    tape.linear(x, params[a.weight], Some(params[a.bias]))
}

impl<T: Real> Phi<T> for BoundPhi<'_> {
    fn forward(&self, tape: &mut Tape<T>, input: Var) -> Result<Var> {
        match &self.module {
            PhiModule::Classical { hidden, output } => {
                let z = affine(tape, self.params, hidden, input)?;
                let a = tape.relu(z);
                affine(tape, self.params, output, a)
            }
            PhiModule::Quantum { input: proj, theta, output } => {
                let enc = affine(tape, self.params, proj, input)?;
                let z = tape.quantum(enc, self.params[*theta], Arc::clone(self.circuit))?;
                affine(tape, self.params, output, z)
            }
        }
    }
}

/// Per-node tape variables: four-momenta (length 4) and scalars (length `n_h`).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub x: Vec<Var>,
    pub h: Vec<Var>,
}

impl NodeState {
    pub fn n_nodes(&self) -> usize {
        self.h.len()
    }
}

/// Square `n × n` table of edge values with an empty diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTable {
    n: usize,
    cells: Vec<Option<Var>>,
}

impl EdgeTable {
    fn build(n: usize, mut f: impl FnMut(usize, usize) -> Result<Var>) -> Result<Self> {
        let mut cells = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                cells.push(if i == j { None } else { Some(f(i, j)?) });
            }
        }
        Ok(Self { n, cells })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<Var> {
        self.cells[i * self.n + j]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn map(&self, mut f: impl FnMut(Var) -> Result<Var>) -> Result<Self> {
        let cells = self.cells.iter().map(|c| c.map(&mut f).transpose()).collect::<Result<_>>()?;
        Ok(Self { n: self.n, cells })
    }
}

/// `m_ij = φ_e([h_i, h_j, ψ(‖x_i − x_j‖²), ψ(⟨x_i, x_j⟩)])`.
pub fn compute_message<T: Real>(
    tape: &mut Tape<T>,
    h_i: Var,
    h_j: Var,
    x_i: Var,
    x_j: Var,
    phi_e: &dyn Phi<T>,
) -> Result<Var> {
    let input = message_input(tape, h_i, h_j, x_i, x_j)?;
    phi_e.forward(tape, input)
}

/// The `2·n_h + 2` wide input of `φ_e`.
pub fn message_input<T: Real>(tape: &mut Tape<T>, h_i: Var, h_j: Var, x_i: Var, x_j: Var) -> Result<Var> {
    let diff = tape.sub(x_i, x_j)?;
    let sq = tape.minkowski_inner(diff, diff)?;
    let dot = tape.minkowski_inner(x_i, x_j)?;
    let psi_sq = tape.psi(sq);
    let psi_dot = tape.psi(dot);
    Ok(tape.concat(&[h_i, h_j, psi_sq, psi_dot]))
}

pub fn compute_messages<T: Real>(tape: &mut Tape<T>, state: &NodeState, phi_e: &dyn Phi<T>) -> Result<EdgeTable> {
    EdgeTable::build(state.n_nodes(), |i, j| {
        compute_message(tape, state.h[i], state.h[j], state.x[i], state.x[j], phi_e)
    })
}

/// `c · Σ_{j≠i} weight(i, j) · values[j]` for every `i`.
fn weighted_aggregate<T: Real>(tape: &mut Tape<T>, values: &[Var], weights: &EdgeTable, c: T) -> Result<Vec<Var>> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let mut terms = Vec::with_capacity(n.saturating_sub(1));
            for (j, &v) in values.iter().enumerate() {
                if let Some(w) = weights.get(i, j) {
                    terms.push(tape.mul_scalar(w, v)?);
                }
            }
            let total = if terms.is_empty() {
                let len = tape.value(values[i]).len();
                tape.constant_vector(vec![T::zero(); len])
            } else {
                tape.sum(&terms)?
            };
            Ok(tape.scale(total, c))
        })
        .collect()
}

/// `x_i' = x_i + c · Σ_{j≠i} φ_x(m_ij) · x_j`.
pub fn coordinate_update<T: Real>(
    tape: &mut Tape<T>,
    x: &[Var],
    messages: &EdgeTable,
    phi_x: &dyn Phi<T>,
    c: T,
) -> Result<Vec<Var>> {
    let coeffs = messages.map(|m| phi_x.forward(tape, m))?;
    let agg = weighted_aggregate(tape, x, &coeffs, c)?;
    x.iter().zip(agg).map(|(&xi, a)| tape.add(xi, a)).collect()
}

/// `w_ij = sigmoid(φ_m(m_ij))`, each in `(0, 1)`.
pub fn edge_weights<T: Real>(tape: &mut Tape<T>, messages: &EdgeTable, phi_m: &dyn Phi<T>) -> Result<EdgeTable> {
    messages.map(|m| {
        let logit = phi_m.forward(tape, m)?;
        Ok(tape.sigmoid(logit))
    })
}

/// `h_i' = h_i + φ_h([h_i, c · Σ_{j≠i} w_ij · h_j])`.
pub fn scalar_update<T: Real>(
    tape: &mut Tape<T>,
    h: &[Var],
    weights: &EdgeTable,
    phi_h: &dyn Phi<T>,
    c: T,
) -> Result<Vec<Var>> {
    let agg = weighted_aggregate(tape, h, weights, c)?;
    h.iter()
        .zip(agg)
        .map(|(&hi, a)| {
            let input = tape.concat(&[hi, a]);
            let delta = phi_h.forward(tape, input)?;
            tape.add(hi, delta)
        })
        .collect()
}

/// The four networks of one block. `phi_x = None` leaves coordinates unchanged.
pub struct BlockPhis<'a, T: Real> {
    pub phi_e: &'a dyn Phi<T>,
    pub phi_x: Option<&'a dyn Phi<T>>,
    pub phi_h: &'a dyn Phi<T>,
    pub phi_m: &'a dyn Phi<T>,
}

/// One block: messages from the current `(x, h)`, then both residual updates.
pub fn leqb_forward<T: Real>(
    tape: &mut Tape<T>,
    state: &NodeState,
    phis: &BlockPhis<'_, T>,
    c: T,
) -> Result<NodeState> {
    let messages = compute_messages(tape, state, phis.phi_e)?;
    let x = match phis.phi_x {
        Some(phi_x) => coordinate_update(tape, &state.x, &messages, phi_x, c)?,
        None => state.x.clone(),
    };
    let weights = edge_weights(tape, &messages, phis.phi_m)?;
    let h = scalar_update(tape, &state.h, &weights, phis.phi_h, c)?;
    Ok(NodeState { x, h })
}

/// Mean-pool node scalars, then an affine map to two logits.
pub fn decode<T: Real>(tape: &mut Tape<T>, h: &[Var], weight: Var, bias: Var) -> Result<Var> {
    let pooled = tape.mean(h)?;
    tape.linear(pooled, weight, Some(bias))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::{random_lorentz, FourVector};

    fn zero_phi(width: usize) -> impl Fn(&mut Tape<f64>, Var) -> Result<Var> {
        move |t: &mut Tape<f64>, _| Ok(t.constant_vector(vec![0.0; width]))
    }

    fn const_phi(v: f64) -> impl Fn(&mut Tape<f64>, Var) -> Result<Var> {
        move |t: &mut Tape<f64>, _| Ok(t.constant_vector(vec![v]))
    }

    /// Nonlinear invariant test function: tanh of a fixed mix of the input.
    fn mix_phi(width_out: usize) -> impl Fn(&mut Tape<f64>, Var) -> Result<Var> {
        move |t: &mut Tape<f64>, x: Var| {
            let n_in = t.value(x).len();
            let w: Vec<f64> = (0..width_out * n_in).map(|k| ((k * 7 % 11) as f64 - 5.0) * 0.05).collect();
            let w = t.constant(vec![width_out, n_in], w)?;
            let y = t.linear(x, w, None)?;
            Ok(t.tanh(y))
        }
    }

    fn state(t: &mut Tape<f64>, xs: &[FourVector<f64>], hs: &[Vec<f64>]) -> NodeState {
        NodeState {
            x: xs.iter().map(|v| t.constant_vector(v.to_array().to_vec())).collect(),
            h: hs.iter().map(|h| t.constant_vector(h.clone())).collect(),
        }
    }

    fn sample_nodes() -> (Vec<FourVector<f64>>, Vec<Vec<f64>>) {
        let xs = vec![
            FourVector::new(50.0, 30.0, 20.0, 33.0),
            FourVector::new(20.0, 12.0, 5.0, -15.0),
            FourVector::new(75.0, -40.0, 10.0, 62.0),
            FourVector::new(10.0, 3.0, -9.0, 2.0),
        ];
        let hs = (0..4).map(|i| (0..3).map(|k| ((i * 3 + k) as f64 * 0.37).sin()).collect()).collect();
        (xs, hs)
    }

    fn to_fv(t: &Tape<f64>, v: Var) -> FourVector<f64> {
        let d = t.data(v);
        FourVector::new(d[0], d[1], d[2], d[3])
    }

    #[test]
    fn zero_distance_slot() {
        let mut t = Tape::new();
        let x = t.constant_vector(vec![5.0, 1.0, 2.0, 3.0]);
        let h = t.constant_vector(vec![0.1, 0.2]);
        let input = message_input(&mut t, h, h, x, x).unwrap();
        let d = t.data(input);
        assert_eq!(d.len(), 6);
        assert_eq!(d[4], 0.0);
        assert_eq!(d[5], crate::minkowski::psi(-25.0 + 14.0));
    }

    #[test]
    fn message_swap_changes_only_h_order() {
        let mut t = Tape::new();
        let (xs, hs) = sample_nodes();
        let s = state(&mut t, &xs, &hs);
        let a = message_input(&mut t, s.h[0], s.h[1], s.x[0], s.x[1]).unwrap();
        let b = message_input(&mut t, s.h[1], s.h[0], s.x[1], s.x[0]).unwrap();
        let (a, b) = (t.data(a).to_vec(), t.data(b).to_vec());
        assert_eq!(&a[..3], &b[3..6]);
        assert_eq!(&a[6..], &b[6..]);
    }

    #[test]
    fn message_is_lorentz_invariant() {
        let (xs, hs) = sample_nodes();
        for seed in 0..20 {
            let l = random_lorentz(seed, 1.0).unwrap();
            let mut t = Tape::new();
            let s = state(&mut t, &xs, &hs);
            let lx: Vec<_> = xs.iter().map(|v| l.apply(v)).collect();
            let sl = state(&mut t, &lx, &hs);
            let phi = mix_phi(3);
            let m = compute_message(&mut t, s.h[0], s.h[2], s.x[0], s.x[2], &phi).unwrap();
            let ml = compute_message(&mut t, sl.h[0], sl.h[2], sl.x[0], sl.x[2], &phi).unwrap();
            for (a, b) in t.data(m).iter().zip(t.data(ml)) {
                assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_phi_x_is_identity() {
        let mut t = Tape::new();
        let (xs, hs) = sample_nodes();
        let s = state(&mut t, &xs, &hs);
        let msgs = compute_messages(&mut t, &s, &mix_phi(3)).unwrap();
        let out = coordinate_update(&mut t, &s.x, &msgs, &zero_phi(1), 1e-3).unwrap();
        for (o, x) in out.iter().zip(&xs) {
            assert_eq!(to_fv(&t, *o), *x);
        }
    }

    #[test]
    fn identical_nodes_scale_by_one_plus_cw() {
        let mut t = Tape::new();
        let x = FourVector::new(4.0, 1.0, 2.0, 3.0);
        let s = state(&mut t, &[x, x], &[vec![0.5], vec![0.5]]);
        let msgs = compute_messages(&mut t, &s, &mix_phi(1)).unwrap();
        let (c, w) = (1e-3, 0.7);
        let out = coordinate_update(&mut t, &s.x, &msgs, &const_phi(w), c).unwrap();
        for o in out {
            let got = to_fv(&t, o);
            let want = x * (1.0 + c * w);
            for (a, b) in got.to_array().iter().zip(want.to_array()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coordinate_update_is_equivariant() {
        let (xs, hs) = sample_nodes();
        for seed in 0..50 {
            let l = random_lorentz(seed, 1.0).unwrap();
            let mut t = Tape::new();
            let s = state(&mut t, &xs, &hs);
            let lx: Vec<_> = xs.iter().map(|v| l.apply(v)).collect();
            let sl = state(&mut t, &lx, &hs);
            let phi_e = mix_phi(3);
            let phi_x = mix_phi(1);
            let m = compute_messages(&mut t, &s, &phi_e).unwrap();
            let ml = compute_messages(&mut t, &sl, &phi_e).unwrap();
            let out = coordinate_update(&mut t, &s.x, &m, &phi_x, 0.5).unwrap();
            let outl = coordinate_update(&mut t, &sl.x, &ml, &phi_x, 0.5).unwrap();
            for (a, b) in out.iter().zip(&outl) {
                let want = l.apply(&to_fv(&t, *a));
                let got = to_fv(&t, *b);
                let scale = want.to_array().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                for (p, q) in got.to_array().iter().zip(want.to_array()) {
                    assert!((p - q).abs() <= 1e-8 * scale, "{p} vs {q}");
                }
            }
        }
    }

    #[test]
    fn zero_phi_h_is_identity_and_weights_in_unit_interval() {
        let mut t = Tape::new();
        let (xs, hs) = sample_nodes();
        let s = state(&mut t, &xs, &hs);
        let msgs = compute_messages(&mut t, &s, &mix_phi(3)).unwrap();
        let big = |t: &mut Tape<f64>, x: Var| {
            let y = mix_phi(1)(t, x)?;
            Ok(t.scale(y, 40.0))
        };
        let w = edge_weights(&mut t, &msgs, &big).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if let Some(v) = w.get(i, j) {
                    let v = t.data(v)[0];
                    assert!(v > 0.0 && v < 1.0);
                } else {
                    assert_eq!(i, j);
                }
            }
        }
        let out = scalar_update(&mut t, &s.h, &w, &zero_phi(3), 1e-3).unwrap();
        for (o, h) in out.iter().zip(&hs) {
            assert_eq!(t.data(*o), h.as_slice());
        }
    }

    #[test]
    fn decode_mean_pool_properties() {
        let mut t = Tape::<f64>::new();
        let w = t.constant(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = t.constant_vector(vec![0.0, 0.0]);
        let hs: Vec<Var> = (0..3).map(|_| t.constant_vector(vec![0.3, -0.2])).collect();
        let l = decode(&mut t, &hs, w, b).unwrap();
        assert!((t.data(l)[0] - 0.3).abs() < 1e-15 && (t.data(l)[1] + 0.2).abs() < 1e-15);

        let distinct: Vec<Var> = (0..3).map(|k| t.constant_vector(vec![k as f64, (k * k) as f64])).collect();
        let base = decode(&mut t, &distinct, w, b).unwrap();
        let perm = [distinct[2], distinct[0], distinct[1]];
        let permuted = decode(&mut t, &perm, w, b).unwrap();
        let dup: Vec<Var> = distinct.iter().chain(distinct.iter()).copied().collect();
        let doubled = decode(&mut t, &dup, w, b).unwrap();
        for k in 0..2 {
            assert!((t.data(base)[k] - t.data(permuted)[k]).abs() <= 1e-12);
            assert!((t.data(base)[k] - t.data(doubled)[k]).abs() <= 1e-12);
        }
        assert!(decode(&mut t, &[], w, b).is_err());
    }
}
