//! The layered angle-encoding ansatz and its gradients.
//!
//! Circuit, starting from `|0…0⟩`:
//!
//! ```text
//! H on every wire
//! RY(encoding_q) on every wire
//! repeat n_layers:
//!     CNOT entanglers of the layer, in order
//!     RY(theta[layer * n_qubits + q]) on every wire
//! measure ⟨Z_q⟩ on every wire
//! ```

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Brick entangler layout: `(0→1), (2→3), …` then `(1→2), (3→4), …`.
pub fn brick_layout(n_qubits: usize) -> Vec<(usize, usize)> {
    let even = (0..n_qubits.saturating_sub(1)).step_by(2).map(|q| (q, q + 1));
    let odd = (1..n_qubits.saturating_sub(1)).step_by(2).map(|q| (q, q + 1));
    even.chain(odd).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsatzConfig {
    n_qubits: usize,
    n_layers: usize,
    entanglers: Vec<Vec<(usize, usize)>>,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self::new(6, 2).expect("default ansatz is valid")
    }
}

impl AnsatzConfig {
    /// Brick layout repeated identically in each of `n_layers` layers.
    pub fn new(n_qubits: usize, n_layers: usize) -> Result<Self> {
        Self::with_layout(n_qubits, vec![brick_layout(n_qubits); n_layers])
    }

    /// Explicit CNOT `(control, target)` list per layer; an empty list means no entanglers.
    pub fn with_layout(n_qubits: usize, entanglers: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if !(super::state::MIN_QUBITS..=super::state::MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::QubitCount {
                n: n_qubits,
                min: super::state::MIN_QUBITS,
                max: super::state::MAX_QUBITS,
            });
        }
        for &(c, t) in entanglers.iter().flatten() {
            for q in [c, t] {
                if q >= n_qubits {
                    return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
                }
            }
            if c == t {
                return Err(Error::SameQubit(c));
            }
        }
        Ok(Self { n_qubits, n_layers: entanglers.len(), entanglers })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn entanglers(&self) -> &[Vec<(usize, usize)>] {
        &self.entanglers
    }

    /// Trainable angle count, `n_layers · n_qubits`.
    pub fn n_params(&self) -> usize {
        self.n_layers * self.n_qubits
    }

    fn check_inputs<T>(&self, encoding: &[T], theta: &[T]) -> Result<()> {
        if encoding.len() != self.n_qubits {
            return Err(Error::LengthMismatch {
                what: "encoding angles",
                expected: self.n_qubits,
                found: encoding.len(),
            });
        }
        if theta.len() != self.n_params() {
            return Err(Error::LengthMismatch {
                what: "circuit parameters",
                expected: self.n_params(),
                found: theta.len(),
            });
        }
        Ok(())
    }
}

/// Trainable circuit angles in layer-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitParams<T> {
    theta: Vec<T>,
}

impl<T: Real> CircuitParams<T> {
    pub fn new(cfg: &AnsatzConfig, theta: Vec<T>) -> Result<Self> {
        if theta.len() != cfg.n_params() {
            return Err(Error::LengthMismatch {
                what: "circuit parameters",
                expected: cfg.n_params(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("circuit parameters".into()));
        }
        Ok(Self { theta })
    }

    pub fn zeros(cfg: &AnsatzConfig) -> Self {
        Self { theta: vec![T::zero(); cfg.n_params()] }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.theta
    }
}

/// Which input an RY angle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleSource {
    Encoding(usize),
    Theta(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T> {
    H(usize),
    Ry { qubit: usize, angle: T, source: AngleSource },
    Cnot { ctrl: usize, tgt: usize },
}

/// Flattened gate sequence of the ansatz for the given angles.
pub fn ansatz_gates<T: Real>(cfg: &AnsatzConfig, encoding: &[T], theta: &[T]) -> Result<Vec<Gate<T>>> {
    cfg.check_inputs(encoding, theta)?;
    let n = cfg.n_qubits;
    let mut gates = Vec::with_capacity(2 * n + cfg.n_layers * (n + n));
    gates.extend((0..n).map(Gate::H));
    gates.extend((0..n).map(|q| Gate::Ry { qubit: q, angle: encoding[q], source: AngleSource::Encoding(q) }));
    for (layer, pairs) in cfg.entanglers.iter().enumerate() {
        gates.extend(pairs.iter().map(|&(ctrl, tgt)| Gate::Cnot { ctrl, tgt }));
        for q in 0..n {
            let k = layer * n + q;
            gates.push(Gate::Ry { qubit: q, angle: theta[k], source: AngleSource::Theta(k) });
        }
    }
    Ok(gates)
}

impl<T: Real> StateVector<T> {
    pub fn apply_gate(&mut self, gate: &Gate<T>) -> Result<&mut Self> {
        match *gate {
            Gate::H(q) => self.apply_h(q),
            Gate::Ry { qubit, angle, .. } => self.apply_ry(qubit, angle),
            Gate::Cnot { ctrl, tgt } => self.apply_cnot(ctrl, tgt),
        }
    }

    fn apply_gate_inverse(&mut self, gate: &Gate<T>) -> Result<&mut Self> {
        match *gate {
            Gate::H(q) => self.apply_h(q),
            Gate::Ry { qubit, angle, .. } => self.apply_ry(qubit, -angle),
            Gate::Cnot { ctrl, tgt } => self.apply_cnot(ctrl, tgt),
        }
    }
}

/// Final state of the ansatz.
pub fn ansatz_state<T: Real>(cfg: &AnsatzConfig, encoding: &[T], theta: &[T]) -> Result<StateVector<T>> {
    let gates = ansatz_gates(cfg, encoding, theta)?;
    let mut state = StateVector::zero(cfg.n_qubits)?;
    for g in &gates {
        state.apply_gate(g)?;
    }
    Ok(state)
}

/// Exact `⟨Z_q⟩` for every wire.
pub fn run_ansatz<T: Real>(cfg: &AnsatzConfig, encoding: &[T], theta: &[T]) -> Result<Vec<T>> {
    Ok(ansatz_state(cfg, encoding, theta)?.expectations_z())
}

/// Jacobians of the expectation vector, row-major with one row per measured qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzJacobian<T> {
    pub values: Vec<T>,
    /// `n_qubits × n_params`.
    pub d_theta: Vec<T>,
    /// `n_qubits × n_qubits`.
    pub d_encoding: Vec<T>,
    n_qubits: usize,
    n_params: usize,
}

impl<T: Real> AnsatzJacobian<T> {
    pub fn d_theta_at(&self, qubit: usize, param: usize) -> T {
        self.d_theta[qubit * self.n_params + param]
    }

    pub fn d_encoding_at(&self, qubit: usize, angle: usize) -> T {
        self.d_encoding[qubit * self.n_qubits + angle]
    }

    /// `upstreamᵀ · J` for both Jacobians: `(d/d encoding, d/d theta)`.
    pub fn contract(&self, upstream: &[T]) -> (Vec<T>, Vec<T>) {
        let mut g_enc = vec![T::zero(); self.n_qubits];
        let mut g_theta = vec![T::zero(); self.n_params];
        for (q, &u) in upstream.iter().enumerate() {
            for (k, g) in g_enc.iter_mut().enumerate() {
                *g += u * self.d_encoding_at(q, k);
            }
            for (k, g) in g_theta.iter_mut().enumerate() {
                *g += u * self.d_theta_at(q, k);
            }
        }
        (g_enc, g_theta)
    }
}

/// Parameter-shift gradients: `∂⟨Z_q⟩/∂φ = [⟨Z_q⟩(φ + π/2) − ⟨Z_q⟩(φ − π/2)] / 2`,
/// exact for every RY angle (trainable and encoding alike).
pub fn grad_ansatz<T: Real>(cfg: &AnsatzConfig, encoding: &[T], theta: &[T]) -> Result<AnsatzJacobian<T>> {
    cfg.check_inputs(encoding, theta)?;
    let n = cfg.n_qubits;
    let p = cfg.n_params();
    let shift = T::lit(FRAC_PI_2);
    let half = T::lit(0.5);
    let values = run_ansatz(cfg, encoding, theta)?;

    let mut enc = encoding.to_vec();
    let mut d_encoding = vec![T::zero(); n * n];
    for k in 0..n {
        let orig = enc[k];
        enc[k] = orig + shift;
        let plus = run_ansatz(cfg, &enc, theta)?;
        enc[k] = orig - shift;
        let minus = run_ansatz(cfg, &enc, theta)?;
        enc[k] = orig;
        for q in 0..n {
            d_encoding[q * n + k] = (plus[q] - minus[q]) * half;
        }
    }

    let mut th = theta.to_vec();
    let mut d_theta = vec![T::zero(); n * p];
    for k in 0..p {
        let orig = th[k];
        th[k] = orig + shift;
        let plus = run_ansatz(cfg, encoding, &th)?;
        th[k] = orig - shift;
        let minus = run_ansatz(cfg, encoding, &th)?;
        th[k] = orig;
        for q in 0..n {
            d_theta[q * p + k] = (plus[q] - minus[q]) * half;
        }
    }

    Ok(AnsatzJacobian { values, d_theta, d_encoding, n_qubits: n, n_params: p })
}

/// Vector-Jacobian product computed by adjoint differentiation.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzVjp<T> {
    pub values: Vec<T>,
    pub grad_encoding: Vec<T>,
    pub grad_theta: Vec<T>,
}

/// Adjoint-method `upstreamᵀ · J` for the observable `Σ_q upstream_q Z_q`.
///
/// One forward pass plus one reverse sweep, against `2·(n + n_params)` circuit runs for the
/// parameter-shift rule. Agrees with [`grad_ansatz`] to rounding.
pub fn vjp_ansatz<T: Real>(cfg: &AnsatzConfig, encoding: &[T], theta: &[T], upstream: &[T]) -> Result<AnsatzVjp<T>> {
    if upstream.len() != cfg.n_qubits {
        return Err(Error::LengthMismatch { what: "upstream gradient", expected: cfg.n_qubits, found: upstream.len() });
    }
    let gates = ansatz_gates(cfg, encoding, theta)?;
    let mut psi = StateVector::zero(cfg.n_qubits)?;
    for g in &gates {
        psi.apply_gate(g)?;
    }
    let values = psi.expectations_z();

    let mut lambda = psi.clone();
    for (i, a) in lambda.amplitudes_mut().iter_mut().enumerate() {
        let w: T = upstream.iter().enumerate().map(|(q, &u)| if i >> q & 1 == 0 { u } else { -u }).sum();
        *a = *a * w;
    }

    let mut grad_encoding = vec![T::zero(); cfg.n_qubits];
    let mut grad_theta = vec![T::zero(); cfg.n_params()];
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    for gate in gates.iter().rev() {
        psi.apply_gate_inverse(gate)?;
        if let Gate::Ry { qubit, angle, source } = *gate {
            // d RY/dφ = ½ [[−s, −c], [c, −s]] with (s, c) = sin/cos(φ/2).
            let (s, c) = (angle * half).sin_cos();
            let stride = 1usize << qubit;
            let (pa, la) = (psi.amplitudes(), lambda.amplitudes());
            let mut acc = Complex::new(T::zero(), T::zero());
            let mut base = 0;
            while base < pa.len() {
                for i in base..base + stride {
                    let (a0, a1) = (pa[i], pa[i + stride]);
                    let mu0 = (a0 * s + a1 * c) * (-half);
                    let mu1 = (a0 * c - a1 * s) * half;
                    acc = acc + la[i].conj() * mu0 + la[i + stride].conj() * mu1;
                }
                base += stride << 1;
            }
            let g = two * acc.re;
            match source {
                AngleSource::Encoding(k) => grad_encoding[k] += g,
                AngleSource::Theta(k) => grad_theta[k] += g,
            }
        }
        lambda.apply_gate_inverse(gate)?;
    }
    Ok(AnsatzVjp { values, grad_encoding, grad_theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_layout_matches_circuit_columns() {
        let cfg = AnsatzConfig::default();
        assert_eq!(cfg.n_qubits(), 6);
        assert_eq!(cfg.n_layers(), 2);
        assert_eq!(cfg.n_params(), 12);
        for layer in cfg.entanglers() {
            assert_eq!(layer, &vec![(0, 1), (2, 3), (4, 5), (1, 2), (3, 4)]);
        }
    }

    #[test]
    fn zero_inputs_give_zero_expectations() {
        let cfg = AnsatzConfig::default();
        let z = run_ansatz(&cfg, &[0.0_f64; 6], &[0.0; 12]).unwrap();
        for v in z {
            assert!(v.abs() <= 1e-12);
        }
    }

    #[test]
    fn length_mismatches_are_rejected() {
        let cfg = AnsatzConfig::default();
        assert!(matches!(run_ansatz(&cfg, &[0.0; 5], &[0.0; 12]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(run_ansatz(&cfg, &[0.0; 6], &[0.0; 11]), Err(Error::LengthMismatch { .. })));
        assert!(grad_ansatz(&cfg, &[0.0; 6], &[0.0; 13]).is_err());
        assert!(vjp_ansatz(&cfg, &[0.0; 6], &[0.0; 12], &[1.0; 2]).is_err());
        assert!(CircuitParams::new(&cfg, vec![f64::NAN; 12]).is_err());
        assert!(AnsatzConfig::with_layout(3, vec![vec![(0, 3)]]).is_err());
        assert!(AnsatzConfig::with_layout(3, vec![vec![(1, 1)]]).is_err());
    }

    #[test]
    fn single_qubit_encoding_derivative() {
        // H then RY(x) leaves RY(x + π/2)|0⟩, so ⟨Z⟩ = −sin x and d⟨Z⟩/dx = −cos x.
        let cfg = AnsatzConfig::with_layout(1, vec![]).unwrap();
        for x in [-1.2_f64, 0.0, 0.9, 2.5] {
            let jac = grad_ansatz(&cfg, &[x], &[]).unwrap();
            assert!((jac.values[0] + x.sin()).abs() < 1e-12);
            assert!((jac.d_encoding_at(0, 0) + x.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn ry_angle_derivative_is_minus_sine() {
        // An encoding of −π/2 cancels the H layer, leaving RY(θ)|0⟩ with ⟨Z⟩ = cos θ.
        let cfg = AnsatzConfig::with_layout(1, vec![vec![]]).unwrap();
        let enc = [-FRAC_PI_2];
        for theta in [0.3_f64, 1.1, 2.7] {
            let jac = grad_ansatz(&cfg, &enc, &[theta]).unwrap();
            assert!((jac.values[0] - theta.cos()).abs() < 1e-12);
            assert!((jac.d_theta_at(0, 0) + theta.sin()).abs() < 1e-12);
        }
        let at_quarter = grad_ansatz(&cfg, &enc, &[FRAC_PI_2]).unwrap();
        assert!((at_quarter.d_theta_at(0, 0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_wire_has_zero_gradient() {
        let cfg = AnsatzConfig::with_layout(2, vec![vec![]]).unwrap();
        let jac = grad_ansatz(&cfg, &[0.3_f64, -0.4], &[0.7, 1.9]).unwrap();
        assert!(jac.d_theta_at(0, 1).abs() < 1e-15);
        assert!(jac.d_theta_at(1, 0).abs() < 1e-15);
        assert!(jac.d_encoding_at(0, 1).abs() < 1e-15);
        assert!(jac.d_theta_at(0, 0).abs() > 1e-3);
    }

    #[test]
    fn adjoint_matches_parameter_shift() {
        let cfg = AnsatzConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let enc: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let th: Vec<f64> = (0..12).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let up: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let jac = grad_ansatz(&cfg, &enc, &th).unwrap();
            let (ge, gt) = jac.contract(&up);
            let vjp = vjp_ansatz(&cfg, &enc, &th, &up).unwrap();
            assert_eq!(vjp.values, jac.values);
            for (a, b) in ge.iter().zip(&vjp.grad_encoding).chain(gt.iter().zip(&vjp.grad_theta)) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn simulation_is_bit_deterministic() {
        let cfg = AnsatzConfig::default();
        let enc = [0.1, 0.2, -0.3, 0.4, 1.5, -2.6];
        let th: Vec<f64> = (0..12).map(|k| k as f64 * 0.37 - 2.0).collect();
        assert_eq!(run_ansatz(&cfg, &enc, &th).unwrap(), run_ansatz(&cfg, &enc, &th).unwrap());
    }
}
