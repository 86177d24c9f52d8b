use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, PhiKind, PhiSlot};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRole {
    Weight,
    Bias,
    CircuitAngle,
}

/// One named tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub role: ParamRole,
}

impl ParamEntry {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Affine map `W x + b`, by entry index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Affine {
    pub weight: usize,
    pub bias: usize,
    pub n_in: usize,
    pub n_out: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiModule {
    /// `d_in → d_hid → d_out` with ReLU between.
    Classical { hidden: Affine, output: Affine },
    /// `d_in → n_qubits` projection, circuit, `n_qubits → d_out` readout.
    Quantum { input: Affine, theta: usize, output: Affine },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockModules {
    pub phi_e: PhiModule,
    /// Absent in the final block, whose coordinates never reach the classifier.
    pub phi_x: Option<PhiModule>,
    pub phi_h: PhiModule,
    pub phi_m: PhiModule,
}

impl BlockModules {
    pub fn get(&self, slot: PhiSlot) -> Option<&PhiModule> {
        match slot {
            PhiSlot::E => Some(&self.phi_e),
            PhiSlot::X => self.phi_x.as_ref(),
            PhiSlot::H => Some(&self.phi_h),
            PhiSlot::M => Some(&self.phi_m),
        }
    }
}

/// Names, shapes and offsets of every trainable tensor, in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    entries: Vec<ParamEntry>,
    total: usize,
    pub embed: Affine,
    pub blocks: Vec<BlockModules>,
    pub decoder: Affine,
}

struct Builder {
    entries: Vec<ParamEntry>,
    offset: usize,
}

impl Builder {
    fn push(&mut self, name: String, shape: Vec<usize>, role: ParamRole) -> usize {
        let entry = ParamEntry { name, shape, offset: self.offset, role };
        self.offset += entry.len();
        self.entries.push(entry);
        self.entries.len() - 1
    }

    fn affine(&mut self, prefix: &str, n_in: usize, n_out: usize) -> Affine {
        let weight = self.push(format!("{prefix}.weight"), vec![n_out, n_in], ParamRole::Weight);
        let bias = self.push(format!("{prefix}.bias"), vec![n_out], ParamRole::Bias);
        Affine { weight, bias, n_in, n_out }
    }

    fn phi(&mut self, prefix: &str, kind: PhiKind, d_in: usize, d_out: usize, cfg: &ModelConfig) -> PhiModule {
        match kind {
            PhiKind::Classical => PhiModule::Classical {
                hidden: self.affine(&format!("{prefix}.hidden"), d_in, cfg.d_hid),
                output: self.affine(&format!("{prefix}.output"), cfg.d_hid, d_out),
            },
            PhiKind::Quantum => {
                let input = self.affine(&format!("{prefix}.input"), d_in, cfg.n_qubits);
                let theta = self.push(
                    format!("{prefix}.theta"),
                    vec![cfg.n_qubits * cfg.n_circuit_layers],
                    ParamRole::CircuitAngle,
                );
                let output = self.affine(&format!("{prefix}.output"), cfg.n_qubits, d_out);
                PhiModule::Quantum { input, theta, output }
            }
        }
    }
}

impl ParamLayout {
    pub fn new(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let mut b = Builder { entries: Vec::new(), offset: 0 };
        let embed = b.affine("embed", cfg.n_scalar_features, cfg.n_h);
        let mut blocks = Vec::with_capacity(cfg.n_blocks);
        for l in 0..cfg.n_blocks {
            let last = l + 1 == cfg.n_blocks;
            let mut module = |slot: PhiSlot| {
                let (d_in, d_out) = slot.dims(cfg.n_h);
                b.phi(&format!("block{l}.{}", slot.name()), cfg.variant.kind(slot), d_in, d_out, cfg)
            };
            let phi_e = module(PhiSlot::E);
            let phi_x = (!last).then(|| module(PhiSlot::X));
            let phi_h = module(PhiSlot::H);
            let phi_m = module(PhiSlot::M);
            blocks.push(BlockModules { phi_e, phi_x, phi_h, phi_m });
        }
        let decoder = b.affine("decoder", cfg.n_h, 2);
        Ok(Self { total: b.offset, entries: b.entries, embed, blocks, decoder })
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn entry(&self, name: &str) -> Option<&ParamEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    fn affine_len(&self, a: &Affine) -> usize {
        self.entries[a.weight].len() + self.entries[a.bias].len()
    }

    pub fn module_len(&self, m: &PhiModule) -> usize {
        match m {
            PhiModule::Classical { hidden, output } => self.affine_len(hidden) + self.affine_len(output),
            PhiModule::Quantum { input, theta, output } => {
                self.affine_len(input) + self.entries[*theta].len() + self.affine_len(output)
            }
        }
    }

    pub fn count(&self) -> ParamCount {
        let blocks = self
            .blocks
            .iter()
            .map(|b| BlockCount {
                phi_e: self.module_len(&b.phi_e),
                phi_x: b.phi_x.as_ref().map(|m| self.module_len(m)),
                phi_h: self.module_len(&b.phi_h),
                phi_m: self.module_len(&b.phi_m),
            })
            .collect();
        let circuit_angles = self
            .entries
            .iter()
            .filter(|e| e.role == ParamRole::CircuitAngle)
            .map(|e| (e.name.trim_end_matches(".theta").to_string(), e.len()))
            .collect();
        ParamCount {
            embedding: self.affine_len(&self.embed),
            blocks,
            decoder: self.affine_len(&self.decoder),
            total: self.total,
            circuit_angles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockCount {
    pub phi_e: usize,
    pub phi_x: Option<usize>,
    pub phi_h: usize,
    pub phi_m: usize,
}

impl BlockCount {
    pub fn total(&self) -> usize {
        self.phi_e + self.phi_x.unwrap_or(0) + self.phi_h + self.phi_m
    }
}

/// Trainable scalar counts by module.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamCount {
    pub embedding: usize,
    pub blocks: Vec<BlockCount>,
    pub decoder: usize,
    pub total: usize,
    /// `(quantum MLP name, circuit angle count)` for every quantum MLP.
    pub circuit_angles: Vec<(String, usize)>,
}

pub fn count_parameters(cfg: &ModelConfig) -> Result<ParamCount> {
    Ok(ParamLayout::new(cfg)?.count())
}

/// `(d_in + 1)·d_hid + (d_hid + 1)·d_out`.
pub fn classical_mlp_params(d_in: usize, d_hid: usize, d_out: usize) -> usize {
    (d_in + 1) * d_hid + (d_hid + 1) * d_out
}

/// `(d_in + 1)·n_qubits + n_layers·n_qubits + (n_qubits + 1)·d_out`.
pub fn quantum_mlp_params(d_in: usize, d_out: usize, n_qubits: usize, n_layers: usize) -> usize {
    (d_in + 1) * n_qubits + n_layers * n_qubits + (n_qubits + 1) * d_out
}
