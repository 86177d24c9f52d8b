use crate::error::{Error, Result};
use crate::minkowski::{FourVector, LorentzTransform};
use crate::scalar::Real;

/// One jet as a complete directed graph: every ordered pair of distinct particles is an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct JetGraph<T> {
    x: Vec<FourVector<T>>,
    scalars: Vec<Vec<T>>,
    label: usize,
}

impl<T: Real> JetGraph<T> {
    /// `x[i]` is the four-momentum of node `i`, `scalars[i]` its raw scalar features.
    pub fn new(x: Vec<FourVector<T>>, scalars: Vec<Vec<T>>, label: usize) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidArgument(format!("jet graph needs at least 2 nodes, got {}", x.len())));
        }
        if scalars.len() != x.len() {
            return Err(Error::LengthMismatch { what: "node scalar rows", expected: x.len(), found: scalars.len() });
        }
        let width = scalars[0].len();
        if let Some(bad) = scalars.iter().find(|s| s.len() != width) {
            return Err(Error::LengthMismatch { what: "node scalar width", expected: width, found: bad.len() });
        }
        if label > 1 {
            return Err(Error::InvalidLabel(label));
        }
        if x.iter().any(|v| !v.is_finite()) || scalars.iter().flatten().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("jet graph".into()));
        }
        Ok(Self { x, scalars, label })
    }

    pub fn n_nodes(&self) -> usize {
        self.x.len()
    }

    pub fn momenta(&self) -> &[FourVector<T>] {
        &self.x
    }

    pub fn scalars(&self) -> &[Vec<T>] {
        &self.scalars
    }

    pub fn scalar_width(&self) -> usize {
        self.scalars[0].len()
    }

    pub fn label(&self) -> usize {
        self.label
    }

    /// Same jet seen from a transformed frame; scalars are untouched.
    pub fn transformed(&self, lambda: &LorentzTransform<T>) -> Self {
        Self { x: self.x.iter().map(|v| lambda.apply(v)).collect(), scalars: self.scalars.clone(), label: self.label }
    }

    /// Node `k` of the result is node `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_nodes()];
        if perm.len() != self.n_nodes() {
            return Err(Error::LengthMismatch { what: "permutation", expected: self.n_nodes(), found: perm.len() });
        }
        for &p in perm {
            if p >= seen.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        Ok(Self {
            x: perm.iter().map(|&p| self.x[p]).collect(),
            scalars: perm.iter().map(|&p| self.scalars[p].clone()).collect(),
            label: self.label,
        })
    }

    pub fn cast<U: Real>(&self) -> JetGraph<U> {
        JetGraph {
            x: self.x.iter().map(|v| v.cast()).collect(),
            scalars: self.scalars.iter().map(|r| r.iter().map(|&s| U::lit(s.as_f64())).collect()).collect(),
            label: self.label,
        }
    }
}
