//! Euclidean equivariant point update, used to exercise the equivariance test harness on a
//! case where rotations and translations are easy to write down.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `x_i' = x_i + C · Σ_{j≠i} (x_i − x_j) · φ_x(m_ij)`.
///
/// `messages` is row-major `n × n`; the diagonal is never read.
pub fn euclidean_equivariant_update<T: Real>(
    points: &[Vec<T>],
    messages: &[Vec<T>],
    phi_x: impl Fn(&[T]) -> T,
    c: T,
) -> Result<Vec<Vec<T>>> {
    let n = points.len();
    let d = points.first().map_or(0, Vec::len);
    if d < 2 {
        return Err(Error::InvalidArgument(format!("point dimension must be at least 2, got {d}")));
    }
    if let Some(bad) = points.iter().find(|p| p.len() != d) {
        return Err(Error::LengthMismatch { what: "point dimension", expected: d, found: bad.len() });
    }
    if messages.len() != n * n {
        return Err(Error::LengthMismatch { what: "edge messages", expected: n * n, found: messages.len() });
    }
    Ok((0..n)
        .map(|i| {
            let mut acc = vec![T::zero(); d];
            for j in (0..n).filter(|&j| j != i) {
                let w = phi_x(&messages[i * n + j]);
                for (a, (xi, xj)) in acc.iter_mut().zip(points[i].iter().zip(&points[j])) {
                    *a += (*xi - *xj) * w;
                }
            }
            points[i].iter().zip(acc).map(|(&x, a)| x + c * a).collect()
        })
        .collect())
}

/// Rotation- and translation-invariant edge messages `[‖x_i − x_j‖²]`.
pub fn distance_messages<T: Real>(points: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = points.len();
    let mut out = Vec::with_capacity(n * n);
    for a in points {
        for b in points {
            out.push(vec![a.iter().zip(b).map(|(&p, &q)| (p - q) * (p - q)).sum()]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_phi_is_identity() {
        let pts = vec![vec![1.0, 2.0], vec![-0.5, 3.0], vec![0.0, 0.0]];
        let out = euclidean_equivariant_update(&pts, &distance_messages(&pts), |_| 0.0, 0.3).unwrap();
        assert_eq!(out, pts);
    }

    #[test]
    fn two_points_hand_value() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let out = euclidean_equivariant_update(&pts, &distance_messages(&pts), |m| 2.0 * m[0], 0.5).unwrap();
        // x_0' = 0 + 0.5·(0 − 1)·2 = −1, x_1' = 1 + 0.5·(1 − 0)·2 = 2
        assert_eq!(out, vec![vec![-1.0, 0.0], vec![2.0, 0.0]]);
    }

    #[test]
    fn rejects_bad_input() {
        let line = vec![vec![1.0], vec![2.0]];
        assert!(euclidean_equivariant_update(&line, &distance_messages(&line), |_| 1.0, 1.0).is_err());
        let pts = vec![vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(euclidean_equivariant_update(&pts, &[], |_| 1.0, 1.0).is_err());
    }
}
