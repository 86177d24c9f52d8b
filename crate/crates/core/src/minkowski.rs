//! Minkowski-space geometry with metric `diag(-1, 1, 1, 1)`.
//!
//! Components are ordered `(e, px, py, pz)` everywhere: in [`FourVector`], in the rows and
//! columns of [`LorentzTransform`], and in the autodiff 4-vector tensors used by the model.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Diagonal of the metric tensor.
pub const METRIC_DIAG: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// Largest rapidity accepted by [`boost_z`].
pub const MAX_BOOST_RAPIDITY: f64 = 10.0;

/// Largest `max_rapidity` accepted by [`random_lorentz`].
pub const MAX_SAMPLED_RAPIDITY: f64 = 5.0;

/// Energy-momentum vector `(E, px, py, pz)` in GeV.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourVector<T> {
    pub e: T,
    pub px: T,
    pub py: T,
    pub pz: T,
}

impl<T: Real> FourVector<T> {
    pub const fn new(e: T, px: T, py: T, pz: T) -> Self {
        Self { e, px, py, pz }
    }

    pub fn from_array(c: [T; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.e, self.px, self.py, self.pz]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// Euclidean length of the spatial part.
    pub fn momentum(&self) -> T {
        (self.px * self.px + self.py * self.py + self.pz * self.pz).sqrt()
    }

    pub fn inner(&self, other: &Self) -> T {
        minkowski_inner(self, other)
    }

    pub fn sq_norm(&self) -> T {
        minkowski_sq_norm(self)
    }

    pub fn cast<U: Real>(self) -> FourVector<U> {
        FourVector::new(
            U::lit(self.e.as_f64()),
            U::lit(self.px.as_f64()),
            U::lit(self.py.as_f64()),
            U::lit(self.pz.as_f64()),
        )
    }
}

impl<T: Real> Add for FourVector<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.e + o.e, self.px + o.px, self.py + o.py, self.pz + o.pz)
    }
}

impl<T: Real> Sub for FourVector<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.e - o.e, self.px - o.px, self.py - o.py, self.pz - o.pz)
    }
}

impl<T: Real> Mul<T> for FourVector<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.e * s, self.px * s, self.py * s, self.pz * s)
    }
}

impl<T: Real> Neg for FourVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.e, -self.px, -self.py, -self.pz)
    }
}

/// `xᵀ η y`.
#[inline]
pub fn minkowski_inner<T: Real>(x: &FourVector<T>, y: &FourVector<T>) -> T {
    -x.e * y.e + x.px * y.px + x.py * y.py + x.pz * y.pz
}

#[inline]
pub fn minkowski_sq_norm<T: Real>(x: &FourVector<T>) -> T {
    minkowski_inner(x, x)
}

/// Signed log compression `sgn(z)·ln(1 + |z|)` applied to the message invariants.
#[inline]
pub fn psi<T: Real>(z: T) -> T {
    if z < T::zero() {
        -(-z).ln_1p()
    } else {
        z.ln_1p()
    }
}

/// Derivative of [`psi`]: `1 / (1 + |z|)`.
#[inline]
pub fn psi_derivative<T: Real>(z: T) -> T {
    T::one() / (T::one() + z.abs())
}

/// Proper orthochronous Lorentz transform acting on `(e, px, py, pz)` column vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzTransform<T> {
    pub m: [[T; 4]; 4],
}

impl<T: Real> LorentzTransform<T> {
    pub fn identity() -> Self {
        let mut m = [[T::zero(); 4]; 4];
        for (a, row) in m.iter_mut().enumerate() {
            row[a] = T::one();
        }
        Self { m }
    }

    /// Spatial rotation from a unit quaternion `(w, x, y, z)`; the time axis is untouched.
    pub fn from_quaternion(q: [T; 4]) -> Self {
        let [w, x, y, z] = q;
        let one = T::one();
        let two = T::lit(2.0);
        let r = [
            [one - two * (y * y + z * z), two * (x * y - z * w), two * (x * z + y * w)],
            [two * (x * y + z * w), one - two * (x * x + z * z), two * (y * z - x * w)],
            [two * (x * z - y * w), two * (y * z + x * w), one - two * (x * x + y * y)],
        ];
        let mut out = Self::identity();
        for a in 0..3 {
            for b in 0..3 {
                out.m[a + 1][b + 1] = r[a][b];
            }
        }
        out
    }

    /// `self · other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[T::zero(); 4]; 4];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.m[a][k] * other.m[k][b]).sum();
            }
        }
        Self { m }
    }

    pub fn apply(&self, x: &FourVector<T>) -> FourVector<T> {
        apply_transform(self, x)
    }

    pub fn determinant(&self) -> T {
        det4(&self.m)
    }

    pub fn is_lorentz(&self, tol: T) -> bool {
        is_lorentz(&self.m, tol)
    }
}

/// Matrix-vector product in `(e, px, py, pz)` ordering.
pub fn apply_transform<T: Real>(lambda: &LorentzTransform<T>, x: &FourVector<T>) -> FourVector<T> {
    let v = x.to_array();
    let mut out = [T::zero(); 4];
    for (a, o) in out.iter_mut().enumerate() {
        *o = lambda.m[a][0] * v[0] + lambda.m[a][1] * v[1] + lambda.m[a][2] * v[2] + lambda.m[a][3] * v[3];
    }
    FourVector::from_array(out)
}

/// True iff `max |(mᵀ η m − η)_ab| ≤ tol`.
pub fn is_lorentz<T: Real>(m: &[[T; 4]; 4], tol: T) -> bool {
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = T::zero();
            for k in 0..4 {
                acc += m[k][a] * T::lit(METRIC_DIAG[k]) * m[k][b];
            }
            let target = if a == b { T::lit(METRIC_DIAG[a]) } else { T::zero() };
            if !((acc - target).abs() <= tol) {
                return false;
            }
        }
    }
    true
}

fn det3<T: Real>(m: [[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4<T: Real>(m: &[[T; 4]; 4]) -> T {
    let mut det = T::zero();
    for col in 0..4 {
        let mut minor = [[T::zero(); 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for c in 0..4 {
                if c != col {
                    minor[r - 1][cc] = m[r][c];
                    cc += 1;
                }
            }
        }
        let term = m[0][col] * det3(minor);
        det = if col % 2 == 0 { det + term } else { det - term };
    }
    det
}

/// Boost along z with the given rapidity.
pub fn boost_z<T: Real>(rapidity: T) -> Result<LorentzTransform<T>> {
    if !(rapidity.abs() <= T::lit(MAX_BOOST_RAPIDITY)) {
        return Err(Error::RapidityOutOfRange(rapidity.as_f64()));
    }
    let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
    let mut out = LorentzTransform::identity();
    out.m[0][0] = ch;
    out.m[0][3] = sh;
    out.m[3][0] = sh;
    out.m[3][3] = ch;
    Ok(out)
}

/// Uniformly distributed unit quaternion (Shoemake's subgroup algorithm).
fn random_quaternion<T: Real, R: Rng + ?Sized>(rng: &mut R) -> [T; 4] {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let u3: f64 = rng.gen();
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    [
        T::lit(a * (tau * u2).sin()),
        T::lit(a * (tau * u2).cos()),
        T::lit(b * (tau * u3).sin()),
        T::lit(b * (tau * u3).cos()),
    ]
}

/// Draw `R₂ · B_z(w) · R₁` from an existing generator; see [`random_lorentz`].
pub fn sample_lorentz<T: Real, R: Rng + ?Sized>(rng: &mut R, max_rapidity: T) -> Result<LorentzTransform<T>> {
    let max = max_rapidity.as_f64();
    if !(max > 0.0 && max <= MAX_SAMPLED_RAPIDITY) {
        return Err(Error::InvalidArgument(format!("max_rapidity {max} must lie in (0, {MAX_SAMPLED_RAPIDITY}]")));
    }
    let r1 = LorentzTransform::from_quaternion(random_quaternion::<T, _>(rng));
    let w = T::lit(rng.gen_range(-max..=max));
    let r2 = LorentzTransform::from_quaternion(random_quaternion::<T, _>(rng));
    Ok(r2.compose(&boost_z(w)?).compose(&r1))
}

/// Random proper orthochronous transform: two uniform rotations around a z-boost with
/// rapidity uniform in `[-max_rapidity, max_rapidity]`. Deterministic in `seed`.
pub fn random_lorentz<T: Real>(seed: u64, max_rapidity: T) -> Result<LorentzTransform<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_lorentz(&mut rng, max_rapidity)
}
