use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MIN_QUBITS: usize = 1;
pub const MAX_QUBITS: usize = 20;

/// Dense register of `2^n` complex amplitudes. Qubit `q` is bit `q` of the basis index,
/// so `|q0 q1⟩ = |1 0⟩` is index 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amps: Vec<Complex<T>>,
    n_qubits: usize,
}

fn check_qubit_count(n: usize) -> Result<()> {
    if (MIN_QUBITS..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::QubitCount { n, min: MIN_QUBITS, max: MAX_QUBITS })
    }
}

impl<T: Real> StateVector<T> {
    /// `|0…0⟩` on `n_qubits` wires.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(Self { amps, n_qubits })
    }

    /// Computational basis state with the given index.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        if index >= s.amps.len() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        s.amps[0] = Complex::new(T::zero(), T::zero());
        s.amps[index] = Complex::new(T::one(), T::zero());
        Ok(s)
    }

    /// Wraps raw amplitudes; the length must be a power of two. No normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("amplitude count {len} is not a power of two")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        Ok(Self { amps, n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q < self.n_qubits {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits })
        }
    }

    /// Applies a real 2x2 matrix `[[a, b], [c, d]]` to qubit `q`.
    #[inline]
    pub(crate) fn apply_real_1q(&mut self, q: usize, a: T, b: T, c: T, d: T) {
        let stride = 1usize << q;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                let lo = self.amps[i];
                let hi = self.amps[i + stride];
                self.amps[i] = Complex::new(a * lo.re + b * hi.re, a * lo.im + b * hi.im);
                self.amps[i + stride] = Complex::new(c * lo.re + d * hi.re, c * lo.im + d * hi.im);
            }
            base += stride << 1;
        }
    }

    pub fn apply_h(&mut self, q: usize) -> Result<&mut Self> {
        self.check_qubit(q)?;
        let r = T::FRAC_1_SQRT_2();
        self.apply_real_1q(q, r, r, r, -r);
        Ok(self)
    }

    /// `RY(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
    pub fn apply_ry(&mut self, q: usize, angle: T) -> Result<&mut Self> {
        self.check_qubit(q)?;
        let half = angle * T::lit(0.5);
        let (s, c) = half.sin_cos();
        self.apply_real_1q(q, c, -s, s, c);
        Ok(self)
    }

    pub fn apply_cnot(&mut self, ctrl: usize, tgt: usize) -> Result<&mut Self> {
        self.check_qubit(ctrl)?;
        self.check_qubit(tgt)?;
        if ctrl == tgt {
            return Err(Error::SameQubit(ctrl));
        }
        let (cbit, tbit) = (1usize << ctrl, 1usize << tgt);
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
        Ok(self)
    }

    /// `⟨Z_q⟩ = Σ |a_i|² · (+1 if bit q of i is clear, −1 otherwise)`.
    pub fn expectation_z(&self, q: usize) -> Result<T> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        Ok(self.amps.iter().enumerate().map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() }).sum())
    }

    /// All single-qubit Z expectations in one pass over the amplitudes.
    pub fn expectations_z(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_qubits];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, o) in out.iter_mut().enumerate() {
                if i >> q & 1 == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn max_diff(a: &StateVector<f64>, b: &StateVector<f64>) -> f64 {
        a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn hadamard_examples() {
        let mut s = StateVector::<f64>::zero(1).unwrap();
        s.apply_h(0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(r)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(r)).norm() < 1e-15);

        let mut t = StateVector::<f64>::zero(3).unwrap();
        t.apply_ry(1, 0.4).unwrap().apply_h(2).unwrap();
        let orig = t.clone();
        t.apply_h(1).unwrap().apply_h(1).unwrap();
        assert!(max_diff(&t, &orig) < 1e-15);

        let mut u = StateVector::<f64>::zero(6).unwrap();
        for q in 0..6 {
            u.apply_h(q).unwrap();
        }
        for a in u.amplitudes() {
            assert!((a - c(0.125)).norm() < 1e-15);
        }
    }

    #[test]
    fn ry_examples() {
        let mut s = StateVector::<f64>::zero(1).unwrap();
        s.apply_ry(0, std::f64::consts::PI).unwrap();
        assert!((s.expectation_z(0).unwrap() + 1.0).abs() < 1e-15);
        assert!((s.amplitudes()[1] - c(1.0)).norm() < 1e-15);

        let mut s = StateVector::<f64>::zero(1).unwrap();
        s.apply_ry(0, 0.0).unwrap();
        assert_eq!(s, StateVector::zero(1).unwrap());

        for theta in [0.3, 1.1, 2.7] {
            let mut s = StateVector::<f64>::zero(1).unwrap();
            s.apply_ry(0, theta).unwrap();
            assert!((s.expectation_z(0).unwrap() - theta.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn cnot_examples() {
        // |q0 q1⟩ = |10⟩ is index 1; CNOT(0 → 1) gives |11⟩ = index 3.
        let mut s = StateVector::<f64>::basis(2, 1).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_eq!(s, StateVector::basis(2, 3).unwrap());

        let mut plus = StateVector::<f64>::zero(2).unwrap();
        plus.apply_h(0).unwrap().apply_h(1).unwrap();
        let before = plus.clone();
        plus.apply_cnot(0, 1).unwrap();
        assert!(max_diff(&plus, &before) < 1e-15);

        let mut t = StateVector::<f64>::zero(3).unwrap();
        t.apply_h(0).unwrap().apply_ry(2, 1.3).unwrap();
        let orig = t.clone();
        t.apply_cnot(0, 2).unwrap().apply_cnot(0, 2).unwrap();
        assert_eq!(t, orig);
    }

    #[test]
    fn index_errors() {
        let mut s = StateVector::<f64>::zero(2).unwrap();
        assert!(matches!(s.apply_h(2), Err(Error::QubitOutOfRange { qubit: 2, n_qubits: 2 })));
        assert!(matches!(s.apply_ry(5, 0.1), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(s.apply_cnot(1, 1), Err(Error::SameQubit(1))));
        assert!(matches!(s.apply_cnot(0, 3), Err(Error::QubitOutOfRange { .. })));
        assert!(StateVector::<f64>::zero(0).is_err());
        assert!(StateVector::<f64>::zero(21).is_err());
        assert!(StateVector::<f64>::from_amplitudes(vec![c(1.0); 3]).is_err());
    }

    #[test]
    fn norm_is_preserved() {
        let mut s = StateVector::<f64>::zero(5).unwrap();
        for k in 0..40 {
            let q = k % 5;
            match k % 3 {
                0 => s.apply_h(q).unwrap(),
                1 => s.apply_ry(q, 0.37 * k as f64).unwrap(),
                _ => s.apply_cnot(q, (q + 2) % 5).unwrap(),
            };
            assert!((s.norm_sqr() - 1.0).abs() <= 1e-12);
        }
        let all = s.expectations_z();
        for q in 0..5 {
            assert!((all[q] - s.expectation_z(q).unwrap()).abs() < 1e-14);
        }
    }
}
