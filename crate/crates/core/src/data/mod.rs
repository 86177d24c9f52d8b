//! Jet ingestion: the JSONL jet format, four-momentum reconstruction, per-particle scalar
//! features, dataset splits and a synthetic generator.
//!
//! One jet per line:
//!
//! ```text
//! {"label": 0, "particles": [[pt, eta, phi, pid], ...]}
//! ```

mod pid;
mod synth;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use pid::{pid_features, pid_info, ParticleClass, PidInfo, SCALAR_FEATURES};
pub use synth::{synthetic_jets, ClassProfile, GLUON_PROFILE, QUARK_PROFILE};

use crate::error::{Error, Result};
use crate::minkowski::FourVector;
use crate::model::JetGraph;
use crate::scalar::Real;

/// Jets with fewer particles are dropped on load.
pub const DEFAULT_MIN_PARTICLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleRecord {
    /// GeV, strictly positive.
    pub pt: f64,
    pub eta: f64,
    /// Radians in `(−π, π]`.
    pub phi: f64,
    /// Signed PDG id.
    pub pid: i64,
}

/// Massless reconstruction: `(pt·cosh η, pt·cos φ, pt·sin φ, pt·sinh η)`.
pub fn reconstruct_four_momentum<T: Real>(p: &ParticleRecord) -> FourVector<T> {
    let (pt, eta, phi) = (T::lit(p.pt), T::lit(p.eta), T::lit(p.phi));
    FourVector::new(pt * eta.cosh(), pt * phi.cos(), pt * phi.sin(), pt * eta.sinh())
}

/// Map any finite angle into `(−π, π]`.
pub fn wrap_phi(phi: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    if phi > -PI && phi <= PI {
        return phi;
    }
    let w = phi.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JetEntry {
    /// 0 quark, 1 gluon.
    pub label: usize,
    pub particles: Vec<ParticleRecord>,
}

impl JetEntry {
    pub fn validate(&self) -> Result<()> {
        if self.label > 1 {
            return Err(Error::InvalidLabel(self.label));
        }
        for (k, p) in self.particles.iter().enumerate() {
            if !(p.pt.is_finite() && p.eta.is_finite() && p.phi.is_finite()) {
                return Err(Error::NonFinite(format!("particle {k}")));
            }
            if p.pt <= 0.0 {
                return Err(Error::InvalidArgument(format!("particle {k}: pt = {} must be positive", p.pt)));
            }
            if !(p.phi > -std::f64::consts::PI && p.phi <= std::f64::consts::PI) {
                return Err(Error::InvalidArgument(format!("particle {k}: phi = {} outside (-pi, pi]", p.phi)));
            }
        }
        Ok(())
    }

    /// Keep the `max` highest-pt particles in descending pt order; ties keep input order.
    pub fn truncate(&mut self, max: usize) {
        self.particles.sort_by(|a, b| b.pt.total_cmp(&a.pt));
        self.particles.truncate(max);
    }

    /// Four-momenta plus [`pid_features`] per node.
    pub fn to_graph<T: Real>(&self, use_mass: bool) -> Result<JetGraph<T>> {
        let x = self.particles.iter().map(reconstruct_four_momentum).collect();
        let s = self.particles.iter().map(|p| pid_features(p.pid, use_mass)).collect();
        JetGraph::new(x, s, self.label)
    }
}

#[derive(Serialize, Deserialize)]
struct JetLine {
    label: serde_json::Number,
    particles: Vec<[serde_json::Number; 4]>,
}

fn as_f64(n: &serde_json::Number) -> f64 {
    n.as_f64().unwrap_or(f64::NAN)
}

/// Integers may arrive as `22` or `22.0`.
fn as_int(n: &serde_json::Number, what: &str) -> std::result::Result<i64, String> {
    if let Some(i) = n.as_i64() {
        return Ok(i);
    }
    let f = as_f64(n);
    if f.fract() == 0.0 && f.abs() < 9.0e15 {
        Ok(f as i64)
    } else {
        Err(format!("{what} must be an integer, got {n}"))
    }
}

fn parse_line(line: &str) -> std::result::Result<JetEntry, String> {
    let raw: JetLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let label = as_int(&raw.label, "label")?;
    if !(0..=1).contains(&label) {
        return Err(format!("label must be 0 or 1, got {label}"));
    }
    let particles = raw
        .particles
        .iter()
        .enumerate()
        .map(|(k, [pt, eta, phi, pid])| {
            let pid = as_int(pid, "pid").map_err(|e| format!("particle {k}: {e}"))?;
            let (pt, eta, phi) = (as_f64(pt), as_f64(eta), as_f64(phi));
            if !(pt.is_finite() && eta.is_finite() && phi.is_finite()) {
                return Err(format!("particle {k}: non-finite value"));
            }
            Ok(ParticleRecord { pt, eta, phi: wrap_phi(phi), pid })
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    let jet = JetEntry { label: label as usize, particles };
    jet.validate().map_err(|e| e.to_string())?;
    Ok(jet)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub min_particles: usize,
    pub max_particles: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { min_particles: DEFAULT_MIN_PARTICLES, max_particles: 16 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub lines: usize,
    pub accepted: usize,
    pub filtered: usize,
    pub truncated: usize,
}

/// Parse JSONL from a reader. Blank lines are skipped; any malformed line is an error
/// carrying its 1-based line number.
pub fn read_jets<R: BufRead>(reader: R, opts: &LoadOptions) -> Result<(Vec<JetEntry>, LoadStats)> {
    if opts.max_particles < 2 {
        return Err(Error::InvalidArgument("max_particles must be at least 2".into()));
    }
    let mut stats = LoadStats::default();
    let mut jets = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.lines += 1;
        let mut jet = parse_line(&line).map_err(|message| Error::Parse { line: idx + 1, message })?;
        if jet.particles.len() < opts.min_particles.max(2) {
            stats.filtered += 1;
            continue;
        }
        if jet.particles.len() > opts.max_particles {
            stats.truncated += 1;
        }
        jet.truncate(opts.max_particles);
        jets.push(jet);
    }
    stats.accepted = jets.len();
    Ok((jets, stats))
}

pub fn load_jets(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<(Vec<JetEntry>, LoadStats)> {
    read_jets(BufReader::new(File::open(path)?), opts)
}

pub fn write_jets_to<W: Write>(mut w: W, jets: &[JetEntry]) -> Result<()> {
    for jet in jets {
        let line = JetLine {
            label: (jet.label as u64).into(),
            particles: jet
                .particles
                .iter()
                .map(|p| {
                    let num =
                        |v: f64| serde_json::Number::from_f64(v).ok_or_else(|| Error::NonFinite("particle".into()));
                    Ok([num(p.pt)?, num(p.eta)?, num(p.phi)?, p.pid.into()])
                })
                .collect::<Result<_>>()?,
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jets(path: impl AsRef<Path>, jets: &[JetEntry]) -> Result<()> {
    write_jets_to(BufWriter::new(File::create(path)?), jets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { n_train: 10_000, n_val: 1_250, n_test: 1_250, seed: 0 }
    }
}

impl SplitSpec {
    pub fn total(&self) -> usize {
        self.n_train + self.n_val + self.n_test
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<J> {
    pub train: Vec<J>,
    pub val: Vec<J>,
    pub test: Vec<J>,
}

/// Seeded shuffle, then contiguous `(train, val, test)` slices.
pub fn split_dataset<J: Clone>(jets: &[J], spec: &SplitSpec) -> Result<Split<J>> {
    if spec.total() > jets.len() {
        return Err(Error::InsufficientData { needed: spec.total(), available: jets.len() });
    }
    let mut order: Vec<usize> = (0..jets.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let take = |r: std::ops::Range<usize>| order[r].iter().map(|&i| jets[i].clone()).collect();
    let (a, b) = (spec.n_train, spec.n_train + spec.n_val);
    Ok(Split { train: take(0..a), val: take(a..b), test: take(b..spec.total()) })
}

/// Convert a list of entries into graphs.
pub fn to_graphs<T: Real>(jets: &[JetEntry], use_mass: bool) -> Result<Vec<JetGraph<T>>> {
    jets.iter().map(|j| j.to_graph(use_mass)).collect()
}
