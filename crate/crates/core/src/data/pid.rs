use crate::minkowski::psi;
use crate::scalar::Real;

/// Width of the per-particle scalar vector built by [`pid_features`].
pub const SCALAR_FEATURES: usize = 8;

/// Coarse particle families used for the one-hot slots, in slot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleClass {
    Photon,
    ChargedHadron,
    NeutralHadron,
    Electron,
    Muon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidInfo {
    pub class: ParticleClass,
    pub charge: i8,
    /// GeV.
    pub mass: f64,
}

/// Table lookup for the particle ids present in the jet dataset.
pub fn pid_info(pid: i64) -> Option<PidInfo> {
    use ParticleClass::*;
    let sign = pid.signum() as i8;
    let (class, charge, mass) = match pid.abs() {
        22 if pid > 0 => (Photon, 0, 0.0),
        211 => (ChargedHadron, sign, 0.139_570_39),
        321 => (ChargedHadron, sign, 0.493_677),
        2212 => (ChargedHadron, sign, 0.938_272_088_16),
        130 if pid > 0 => (NeutralHadron, 0, 0.497_611),
        2112 => (NeutralHadron, 0, 0.939_565_420_52),
        // negative lepton ids are the antiparticles
        11 => (Electron, -sign, 0.000_510_998_95),
        13 => (Muon, -sign, 0.105_658_375_5),
        _ => return None,
    };
    Some(PidInfo { class, charge, mass })
}

/// `[charge, photon, charged hadron, neutral hadron, electron, muon, ψ(mass), unknown]`.
///
/// With `use_mass = false` the mass slot is always zero. Unknown ids set only the last slot.
pub fn pid_features<T: Real>(pid: i64, use_mass: bool) -> Vec<T> {
    let mut f = vec![T::zero(); SCALAR_FEATURES];
    match pid_info(pid) {
        Some(info) => {
            f[0] = T::lit(f64::from(info.charge));
            f[1 + info.class as usize] = T::one();
            if use_mass {
                f[6] = psi(T::lit(info.mass));
            }
        }
        None => f[7] = T::one(),
    }
    f
}
