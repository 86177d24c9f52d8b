use std::f64::consts::PI;

use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{wrap_phi, JetEntry, ParticleRecord};
use crate::error::{Error, Result};

/// Per-class generator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassProfile {
    /// Inclusive multiplicity range.
    pub multiplicity: (usize, usize),
    /// Gaussian spread of η and φ around the jet axis.
    pub spread: f64,
    /// Momentum fractions are `u^k` normalized; larger `k` means a steeper spectrum.
    pub pt_steepness: f64,
}

pub const QUARK_PROFILE: ClassProfile = ClassProfile { multiplicity: (10, 16), spread: 0.1, pt_steepness: 4.0 };
pub const GLUON_PROFILE: ClassProfile = ClassProfile { multiplicity: (14, 20), spread: 0.25, pt_steepness: 1.5 };

const JET_PT: (f64, f64) = (200.0, 400.0);
const MIN_PARTICLE_PT: f64 = 0.5;

/// Particle ids and their sampling weights, shared by both classes.
const PID_MIX: [(i64, f64); 12] = [
    (22, 0.30),
    (211, 0.20),
    (-211, 0.20),
    (321, 0.04),
    (-321, 0.04),
    (2212, 0.02),
    (130, 0.05),
    (2112, 0.03),
    (-2112, 0.02),
    (11, 0.02),
    (-11, 0.02),
    (13, 0.03),
];

/// Balanced synthetic quark (label 0) and gluon (label 1) jets, alternating by label.
/// Deterministic in `seed`.
pub fn synthetic_jets(n_per_class: usize, seed: u64) -> Result<Vec<JetEntry>> {
    if n_per_class == 0 {
        return Err(Error::InvalidArgument("n_per_class must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pids = WeightedIndex::new(PID_MIX.iter().map(|p| p.1)).expect("static weights are valid");
    let mut jets = Vec::with_capacity(2 * n_per_class);
    for _ in 0..n_per_class {
        for (label, profile) in [(0, QUARK_PROFILE), (1, GLUON_PROFILE)] {
            jets.push(generate(&mut rng, &pids, label, &profile));
        }
    }
    Ok(jets)
}

fn generate(rng: &mut ChaCha8Rng, pids: &WeightedIndex<f64>, label: usize, p: &ClassProfile) -> JetEntry {
    let n = rng.gen_range(p.multiplicity.0..=p.multiplicity.1);
    let jet_pt = rng.gen_range(JET_PT.0..JET_PT.1);
    let eta0 = rng.gen_range(-1.5..1.5);
    let phi0 = rng.gen_range(-PI..PI);
    let spread = Normal::new(0.0, p.spread).expect("positive spread");

    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0_f64..1.0).powf(p.pt_steepness)).collect();
    let total: f64 = weights.iter().sum();
    let particles = weights
        .iter()
        .map(|w| ParticleRecord {
            pt: MIN_PARTICLE_PT + (jet_pt - n as f64 * MIN_PARTICLE_PT) * w / total,
            eta: eta0 + spread.sample(rng),
            phi: wrap_phi(phi0 + spread.sample(rng)),
            pid: PID_MIX[pids.sample(rng)].0,
        })
        .collect();
    JetEntry { label, particles }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_balance() {
        let jets = synthetic_jets(50, 1).unwrap();
        assert_eq!(jets.len(), 100);
        for (k, j) in jets.iter().enumerate() {
            assert_eq!(j.label, k % 2);
            j.validate().unwrap();
            let (lo, hi) = if j.label == 0 { QUARK_PROFILE.multiplicity } else { GLUON_PROFILE.multiplicity };
            assert!((lo..=hi).contains(&j.particles.len()));
        }
    }

    #[test]
    fn multiplicity_means() {
        let jets = synthetic_jets(500, 7).unwrap();
        let mean = |label| {
            let v: Vec<f64> = jets.iter().filter(|j| j.label == label).map(|j| j.particles.len() as f64).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!((mean(0) - 13.0).abs() < 0.3, "{}", mean(0));
        assert!((mean(1) - 17.0).abs() < 0.3, "{}", mean(1));
    }

    #[test]
    fn deterministic() {
        assert_eq!(synthetic_jets(5, 3).unwrap(), synthetic_jets(5, 3).unwrap());
        assert_ne!(synthetic_jets(5, 3).unwrap(), synthetic_jets(5, 4).unwrap());
        assert!(synthetic_jets(0, 3).is_err());
    }
}
