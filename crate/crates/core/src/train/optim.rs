use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ParamLayout, ParamRole};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Apply weight decay to biases as well.
    pub decay_biases: bool,
    /// Apply weight decay to circuit angles as well.
    pub decay_angles: bool,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 1e-2, decay_biases: false, decay_angles: false }
    }
}

impl AdamWConfig {
    /// Which parameters receive weight decay under this config.
    pub fn decay_mask(&self, layout: &ParamLayout) -> Vec<bool> {
        let mut mask = vec![false; layout.total()];
        for e in layout.entries() {
            let on = match e.role {
                ParamRole::Weight => true,
                ParamRole::Bias => self.decay_biases,
                ParamRole::CircuitAngle => self.decay_angles,
            };
            mask[e.range()].iter_mut().for_each(|m| *m = on);
        }
        mask
    }
}

/// AdamW with decoupled weight decay:
///
/// ```text
/// m ← β₁m + (1−β₁)g,  v ← β₂v + (1−β₂)g²
/// θ ← θ − lr·m̂/(√v̂ + ε) − lr·λ·θ
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub config: AdamWConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    decay: Vec<bool>,
}

impl AdamW {
    /// Weight decay applies where `decay[i]` is set.
    pub fn new(config: AdamWConfig, decay: Vec<bool>) -> Self {
        let n = decay.len();
        Self { config, m: vec![0.0; n], v: vec![0.0; n], t: 0, decay }
    }

    pub fn for_layout(config: AdamWConfig, layout: &ParamLayout) -> Self {
        Self::new(config, config.decay_mask(layout))
    }

    /// Rebuild from saved moments and step count.
    pub fn from_state(config: AdamWConfig, decay: Vec<bool>, m: Vec<f64>, v: Vec<f64>, t: u64) -> Result<Self> {
        for (what, len) in [("adam first moment", m.len()), ("adam second moment", v.len())] {
            if len != decay.len() {
                return Err(Error::LengthMismatch { what, expected: decay.len(), found: len });
            }
        }
        Ok(Self { config, m, v, t, decay })
    }

    pub fn len(&self) -> usize {
        self.decay.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decay.is_empty()
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        let n = self.len();
        if params.len() != n {
            return Err(Error::LengthMismatch { what: "parameters", expected: n, found: params.len() });
        }
        if grads.len() != n {
            return Err(Error::LengthMismatch { what: "gradients", expected: n, found: grads.len() });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient of parameter {i}")));
        }
        let AdamWConfig { beta1, beta2, eps, weight_decay, .. } = self.config;
        self.t += 1;
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let (bc1, bc2) = (1.0 - beta1.powi(t), 1.0 - beta2.powi(t));
        for i in 0..n {
            let g = grads[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            let decay = if self.decay[i] { lr * weight_decay * params[i] } else { 0.0 };
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps) - decay;
        }
        Ok(())
    }
}

/// Per-epoch learning rate: linear warm-up from `start_factor·base_lr`, then cosine decay
/// towards `min_lr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub warmup_epochs: usize,
    pub total_epochs: usize,
    pub base_lr: f64,
    pub start_factor: f64,
    pub min_lr: f64,
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self { warmup_epochs: 5, total_epochs: 50, base_lr: 1e-3, start_factor: 0.1, min_lr: 1e-6 }
    }
}

impl LrSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(0 < self.warmup_epochs && self.warmup_epochs < self.total_epochs) {
            return Err(Error::InvalidArgument(format!(
                "schedule needs 0 < warmup_epochs ({}) < total_epochs ({})",
                self.warmup_epochs, self.total_epochs
            )));
        }
        if !(self.base_lr >= 0.0 && self.min_lr >= 0.0 && self.base_lr.is_finite() && self.min_lr <= self.base_lr) {
            return Err(Error::InvalidArgument("schedule needs 0 <= min_lr <= base_lr".into()));
        }
        if !(self.start_factor > 0.0 && self.start_factor <= 1.0) {
            return Err(Error::InvalidArgument("start_factor must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> Result<f64> {
        self.validate()?;
        if epoch >= self.total_epochs {
            return Err(Error::InvalidArgument(format!("epoch {epoch} outside 0..{}", self.total_epochs)));
        }
        let (w, base) = (self.warmup_epochs, self.base_lr);
        if epoch < w {
            let start = self.start_factor * base;
            return Ok(start + (base - start) * epoch as f64 / w as f64);
        }
        let progress = (epoch - w) as f64 / (self.total_epochs - w) as f64;
        // Written as a drop from base_lr so the boundary epoch returns base_lr exactly.
        Ok(base - 0.5 * (base - self.min_lr) * (1.0 - (std::f64::consts::PI * progress).cos()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(n: usize, wd: f64) -> AdamW {
        AdamW::new(AdamWConfig { weight_decay: wd, ..Default::default() }, vec![true; n])
    }

    #[test]
    fn zero_grad_no_decay_is_fixed_point() {
        let mut o = opt(3, 0.0);
        let mut p = vec![1.0, -2.0, 0.5];
        o.step(&mut p, &[0.0; 3], 1e-3).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(o.t, 1);
    }

    #[test]
    fn decay_with_zero_grad() {
        let mut o = opt(1, 1e-2);
        let mut p = vec![2.0];
        o.step(&mut p, &[0.0], 1e-3).unwrap();
        assert_eq!(p[0], 2.0 * (1.0 - 1e-3 * 1e-2));
    }

    #[test]
    fn mask_exempts() {
        let mut o = AdamW::new(AdamWConfig::default(), vec![true, false]);
        let mut p = vec![1.0, 1.0];
        o.step(&mut p, &[0.0, 0.0], 1e-3).unwrap();
        assert!(p[0] < 1.0);
        assert_eq!(p[1], 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        let mut o = opt(2, 0.0);
        let mut p = vec![0.0; 2];
        assert!(o.step(&mut p, &[0.0], 1e-3).is_err());
        assert!(matches!(o.step(&mut p, &[0.0, f64::NAN], 1e-3), Err(Error::NonFinite(_))));
        assert_eq!(o.t, 0);
    }

    #[test]
    fn schedule_shape() {
        let s = LrSchedule::default();
        assert!((s.lr_at(0).unwrap() - 1e-4).abs() < 1e-18);
        assert_eq!(s.lr_at(5).unwrap(), 1e-3);
        let even = LrSchedule { total_epochs: 45, ..s };
        assert!((even.lr_at(25).unwrap() - (1e-3 + 1e-6) / 2.0).abs() < 1e-12);
        assert!(s.lr_at(50).is_err());
        let bad = LrSchedule { warmup_epochs: 0, ..s };
        assert!(bad.lr_at(0).is_err());
    }
}
