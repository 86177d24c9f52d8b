//! Self-describing checkpoint file.
//!
//! ```text
//! offset  size        field
//! 0       8           magic "LEQGNNCK"
//! 8       4           format version, u32 LE
//! 12      4           header length H, u32 LE
//! 16      H           UTF-8 JSON header
//! 16+H    8           parameter count N, u64 LE
//! 24+H    8N          parameters, f64 LE, layout order
//! 24+H+8N 8N          AdamW first moments, f64 LE
//! 24+H+16N 8N         AdamW second moments, f64 LE
//! end-32  32          SHA-256 of every preceding byte
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::EpochMetrics;
use super::optim::AdamW;
use super::trainer::{TrainConfig, Trainer};
use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig, ParamEntry, Variant};

pub const MAGIC: &[u8; 8] = b"LEQGNNCK";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub model: ModelConfig,
    /// Named variant matching `model.variant`, if any.
    pub variant: Option<Variant>,
    pub layout: Vec<ParamEntry>,
    pub init_seed: u64,
    /// Epochs completed.
    pub epoch: usize,
    pub train: TrainConfig,
    pub optimizer_step: u64,
    pub history: Vec<EpochMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Checkpoint {
    pub fn from_trainer(t: &Trainer) -> Self {
        let model = t.model.config().clone();
        let variant = Variant::ALL.into_iter().find(|v| v.slots() == model.variant);
        Self {
            header: CheckpointHeader {
                layout: t.model.layout().entries().to_vec(),
                model,
                variant,
                init_seed: t.init_seed,
                epoch: t.epoch,
                train: t.config.clone(),
                optimizer_step: t.optimizer.t,
                history: t.history.clone(),
            },
            params: t.model.params().to_vec(),
            m: t.optimizer.m.clone(),
            v: t.optimizer.v.clone(),
        }
    }

    pub fn into_trainer(self) -> Result<Trainer> {
        let h = self.header;
        let model = Model::from_params(h.model, self.params)?;
        if model.layout().entries() != h.layout.as_slice() {
            return Err(Error::InvalidArgument("checkpoint layout does not match its model config".into()));
        }
        let decay = h.train.adamw.decay_mask(model.layout());
        let optimizer = AdamW::from_state(h.train.adamw, decay, self.m, self.v, h.optimizer_step)?;
        h.train.validate()?;
        Ok(Trainer { model, optimizer, config: h.train, init_seed: h.init_seed, epoch: h.epoch, history: h.history })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header).map_err(std::io::Error::from)?;
        let n = self.params.len();
        if self.m.len() != n || self.v.len() != n {
            return Err(Error::LengthMismatch {
                what: "optimizer moments",
                expected: n,
                found: self.m.len().min(self.v.len()),
            });
        }
        let header_len = u32::try_from(header.len())
            .map_err(|_| Error::InvalidArgument("checkpoint header exceeds 4 GiB".into()))?;
        let mut out = Vec::with_capacity(24 + header.len() + 24 * n + DIGEST_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&header_len.to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&(n as u64).to_le_bytes());
        for block in [&self.params, &self.m, &self.v] {
            block.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    /// Parses and verifies a checkpoint. Nothing is returned unless the checksum matches.
    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < MAGIC.len() + 8 + 8 + DIGEST_LEN {
            return Err(format!("truncated: {} bytes", bytes.len()));
        }
        if &bytes[..8] != MAGIC {
            return Err("not a checkpoint (bad magic)".into());
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        let version = u32::from_le_bytes(body[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(format!("unsupported format version {version} (expected {FORMAT_VERSION})"));
        }
        if Sha256::digest(body).as_slice() != digest {
            return Err("checksum mismatch".into());
        }
        let header_len = u32::from_le_bytes(body[12..16].try_into().expect("4 bytes")) as usize;
        let rest = body.get(16..).ok_or("truncated header")?;
        let header_bytes = rest.get(..header_len).ok_or("truncated header")?;
        let header: CheckpointHeader = serde_json::from_slice(header_bytes).map_err(|e| format!("header: {e}"))?;
        let rest = &rest[header_len..];
        let n = u64::from_le_bytes(rest.get(..8).ok_or("truncated parameter count")?.try_into().expect("8 bytes"));
        let n = usize::try_from(n).map_err(|_| "parameter count overflows")?;
        let data = &rest[8..];
        if Some(data.len()) != n.checked_mul(24) {
            return Err(format!("expected {} bytes of tensor data, found {}", n.saturating_mul(24), data.len()));
        }
        let read = |k: usize| -> Vec<f64> {
            data[k * 8 * n..(k + 1) * 8 * n]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect()
        };
        Ok(Self { header, params: read(0), m: read(1), v: read(2) })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.to_bytes()?;
        std::fs::write(path, bytes).map_err(|e| Error::Checkpoint { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let err = |message: String| Error::Checkpoint { path: path.to_path_buf(), message };
        let bytes = std::fs::read(path).map_err(|e| err(e.to_string()))?;
        Self::from_bytes(&bytes).map_err(err)
    }
}

pub fn save_checkpoint(path: impl AsRef<Path>, trainer: &Trainer) -> Result<()> {
    Checkpoint::from_trainer(trainer).save(path)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Trainer> {
    Checkpoint::load(path)?.into_trainer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::LrSchedule;

    fn trainer() -> Trainer {
        let model = Model::new(ModelConfig::for_variant(Variant::PhiX), 4).unwrap();
        let cfg = TrainConfig {
            schedule: LrSchedule { warmup_epochs: 1, total_epochs: 4, ..Default::default() },
            ..Default::default()
        };
        let mut t = Trainer::new(model, cfg, 4).unwrap();
        let grads: Vec<f64> = (0..t.model.layout().total()).map(|i| (i as f64 * 0.37).sin()).collect();
        t.optimizer.step(t.model.params_mut(), &grads, 1e-3).unwrap();
        t.epoch = 1;
        t
    }

    #[test]
    fn round_trip_is_exact() {
        let t = trainer();
        let bytes = Checkpoint::from_trainer(&t).to_bytes().unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        let back = Checkpoint::from_bytes(&bytes).unwrap().into_trainer().unwrap();
        assert_eq!(back, t);
        assert_eq!(Checkpoint::from_trainer(&back).header.variant, Some(Variant::PhiX));
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = Checkpoint::from_trainer(&trainer()).to_bytes().unwrap();
        for pos in [20, bytes.len() / 2, bytes.len() - 40, bytes.len() - 1] {
            let mut bad = bytes.clone();
            bad[pos] ^= 0x01;
            assert!(Checkpoint::from_bytes(&bad).is_err(), "byte {pos}");
        }
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 8]).is_err());
        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(Checkpoint::from_bytes(&v2).unwrap_err().contains("version"));
    }
}
