use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::SCALAR_FEATURES;
use crate::error::{Error, Result};

/// Whether a φ network is a classical MLP or a quantum MLP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    Classical,
    Quantum,
}

/// The four substitutable networks of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSlot {
    /// Edge message network.
    E,
    /// Coordinate-update weight.
    X,
    /// Scalar-update network.
    H,
    /// Edge gate, squashed by a sigmoid into `w_ij`.
    M,
}

impl PhiSlot {
    pub const ALL: [PhiSlot; 4] = [PhiSlot::E, PhiSlot::X, PhiSlot::H, PhiSlot::M];

    pub fn name(self) -> &'static str {
        match self {
            PhiSlot::E => "phi_e",
            PhiSlot::X => "phi_x",
            PhiSlot::H => "phi_h",
            PhiSlot::M => "phi_m",
        }
    }

    /// `(d_in, d_out)` for hidden scalar width `n_h`.
    pub fn dims(self, n_h: usize) -> (usize, usize) {
        match self {
            PhiSlot::E => (2 * n_h + 2, n_h),
            PhiSlot::X => (n_h, 1),
            PhiSlot::H => (2 * n_h, n_h),
            PhiSlot::M => (n_h, 1),
        }
    }
}

/// Classical/quantum choice for each of `(φ_e, φ_x, φ_h, φ_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelVariant {
    pub phi_e: PhiKind,
    pub phi_x: PhiKind,
    pub phi_h: PhiKind,
    pub phi_m: PhiKind,
}

impl ModelVariant {
    pub fn kind(&self, slot: PhiSlot) -> PhiKind {
        match slot {
            PhiSlot::E => self.phi_e,
            PhiSlot::X => self.phi_x,
            PhiSlot::H => self.phi_h,
            PhiSlot::M => self.phi_m,
        }
    }

    pub fn n_quantum(&self) -> usize {
        PhiSlot::ALL.iter().filter(|&&s| self.kind(s) == PhiKind::Quantum).count()
    }
}

/// The six named configurations compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    PhiE,
    PhiX,
    PhiH,
    PhiM,
    FullQuantum,
    Classical,
}

impl Variant {
    pub const ALL: [Variant; 6] =
        [Variant::PhiE, Variant::PhiX, Variant::PhiH, Variant::PhiM, Variant::FullQuantum, Variant::Classical];

    pub fn name(self) -> &'static str {
        match self {
            Variant::PhiE => "phi_e",
            Variant::PhiX => "phi_x",
            Variant::PhiH => "phi_h",
            Variant::PhiM => "phi_m",
            Variant::FullQuantum => "full_quantum",
            Variant::Classical => "classical",
        }
    }

    pub fn slots(self) -> ModelVariant {
        use PhiKind::{Classical as C, Quantum as Q};
        let (phi_e, phi_x, phi_h, phi_m) = match self {
            Variant::PhiE => (Q, C, C, C),
            Variant::PhiX => (C, Q, C, C),
            Variant::PhiH => (C, C, Q, C),
            Variant::PhiM => (C, C, C, Q),
            Variant::FullQuantum => (Q, Q, Q, Q),
            Variant::Classical => (C, C, C, C),
        };
        ModelVariant { phi_e, phi_x, phi_h, phi_m }
    }

    /// Trainable-parameter totals reported for the reference implementation. Its widths and
    /// depth were not published, so these are documentation, not targets.
    pub fn reference_param_total(self) -> usize {
        match self {
            Variant::PhiE => 668,
            Variant::PhiH => 1100,
            Variant::PhiM => 1090,
            Variant::PhiX => 998,
            Variant::FullQuantum => 592,
            Variant::Classical => 1088,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
            Error::InvalidArgument(format!("unknown variant '{s}' (valid: {})", names.join(", ")))
        })
    }
}

impl From<Variant> for ModelVariant {
    fn from(v: Variant) -> Self {
        v.slots()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Number of stacked Lorentz-equivariant blocks.
    pub n_blocks: usize,
    /// Width of the per-node scalar features `h`.
    pub n_h: usize,
    /// Hidden width of classical MLPs.
    pub d_hid: usize,
    /// Aggregation constant in both residual updates.
    pub c: f64,
    pub variant: ModelVariant,
    /// Node cap applied when jets are loaded.
    pub max_particles: usize,
    /// Width of the raw per-particle scalar input.
    pub n_scalar_features: usize,
    pub n_qubits: usize,
    pub n_circuit_layers: usize,
    /// Fill the ψ(mass) slot of the particle features; zero it when off.
    #[serde(default = "default_true")]
    pub use_pid_mass: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_blocks: 2,
            n_h: 8,
            d_hid: 8,
            c: 0.1,
            variant: Variant::Classical.slots(),
            max_particles: 16,
            n_scalar_features: SCALAR_FEATURES,
            n_qubits: 6,
            n_circuit_layers: 2,
            use_pid_mass: true,
        }
    }
}

impl ModelConfig {
    pub fn for_variant(variant: Variant) -> Self {
        Self { variant: variant.slots(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_blocks", self.n_blocks),
            ("n_h", self.n_h),
            ("d_hid", self.d_hid),
            ("max_particles", self.max_particles),
            ("n_scalar_features", self.n_scalar_features),
            ("n_qubits", self.n_qubits),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.max_particles < 2 {
            return Err(Error::InvalidArgument("max_particles must be at least 2".into()));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidArgument(format!("aggregation constant c = {} must be positive", self.c)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        let err = "phi_q".parse::<Variant>().unwrap_err().to_string();
        assert!(err.contains("full_quantum") && err.contains("classical"), "{err}");
    }

    #[test]
    fn variant_slots() {
        assert_eq!(Variant::Classical.slots().n_quantum(), 0);
        assert_eq!(Variant::FullQuantum.slots().n_quantum(), 4);
        for v in [Variant::PhiE, Variant::PhiX, Variant::PhiH, Variant::PhiM] {
            assert_eq!(v.slots().n_quantum(), 1);
        }
        assert_eq!(Variant::PhiH.slots().phi_h, PhiKind::Quantum);
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        assert!(ModelConfig { c: 0.0, ..Default::default() }.validate().is_err());
        assert!(ModelConfig { n_h: 0, ..Default::default() }.validate().is_err());
        assert!(ModelConfig { max_particles: 1, ..Default::default() }.validate().is_err());
    }
}
