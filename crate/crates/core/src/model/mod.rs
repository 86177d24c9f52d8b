//! The classifier: scalar embedding, stacked Lorentz-equivariant blocks, mean-pool decoder.

mod config;
mod euclid;
mod jet;
mod layout;
mod leqb;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{ModelConfig, ModelVariant, PhiKind, PhiSlot, Variant};
pub use euclid::{distance_messages, euclidean_equivariant_update};
pub use jet::JetGraph;
pub use layout::{
    classical_mlp_params, count_parameters, quantum_mlp_params, Affine, BlockCount, BlockModules, ParamCount,
    ParamEntry, ParamLayout, ParamRole, PhiModule,
};
pub use leqb::{
    compute_message, compute_messages, coordinate_update, decode, edge_weights, leqb_forward, message_input,
    scalar_update, BlockPhis, BoundPhi, EdgeTable, NodeState, Phi,
};

use crate::autodiff::{QuantumGrad, Tape, Var};
use crate::error::{Error, Result};
use crate::minkowski::FourVector;
use crate::qsim::AnsatzConfig;
use crate::scalar::Real;

/// `h⁰ = W raw + b`.
pub fn embed_scalars<T: Real>(tape: &mut Tape<T>, raw: Var, weight: Var, bias: Var) -> Result<Var> {
    tape.linear(raw, weight, Some(bias))
}

/// Node coordinates and scalars after the embedding or after a block.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState<T> {
    pub x: Vec<FourVector<T>>,
    pub h: Vec<Vec<T>>,
}

/// A recorded forward pass.
pub struct Recorded {
    pub logits: Var,
    /// One tape variable per layout entry.
    pub params: Vec<Var>,
    /// Embedding output followed by the output of every block.
    pub states: Vec<NodeState>,
}

/// Loss, flat gradient and logits for one labelled jet.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad<T> {
    pub loss: T,
    pub grad: Vec<T>,
    pub logits: [T; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    config: ModelConfig,
    layout: ParamLayout,
    params: Vec<T>,
    circuit: Arc<AnsatzConfig>,
}

impl<T: Real> Model<T> {
    /// Glorot-uniform weights, zero biases, circuit angles uniform in `[-π, π)`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let layout = ParamLayout::new(&config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![T::zero(); layout.total()];
        for e in layout.entries() {
            let slot = &mut params[e.range()];
            match e.role {
                ParamRole::Weight => {
                    let limit = (6.0 / (e.shape[0] + e.shape[1]) as f64).sqrt();
                    slot.iter_mut().for_each(|p| *p = T::lit(rng.gen_range(-limit..limit)));
                }
                ParamRole::Bias => {}
                ParamRole::CircuitAngle => {
                    let pi = std::f64::consts::PI;
                    slot.iter_mut().for_each(|p| *p = T::lit(rng.gen_range(-pi..pi)));
                }
            }
        }
        Self::from_params(config, params)
    }

    pub fn from_params(config: ModelConfig, params: Vec<T>) -> Result<Self> {
        let layout = ParamLayout::new(&config)?;
        if params.len() != layout.total() {
            return Err(Error::LengthMismatch {
                what: "model parameters",
                expected: layout.total(),
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("model parameters".into()));
        }
        let circuit = Arc::new(AnsatzConfig::new(config.n_qubits, config.n_circuit_layers)?);
        Ok(Self { config, layout, params, circuit })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn into_params(self) -> Vec<T> {
        self.params
    }

    /// Values of one named tensor.
    pub fn param(&self, name: &str) -> Option<&[T]> {
        self.layout.entry(name).map(|e| &self.params[e.range()])
    }

    /// Records embed → blocks → decode on `tape`. Parameters become trainable leaves when
    /// `trainable` is set and constants otherwise.
    pub fn record(&self, tape: &mut Tape<T>, jet: &JetGraph<T>, trainable: bool) -> Result<Recorded> {
        if jet.scalar_width() != self.config.n_scalar_features {
            return Err(Error::LengthMismatch {
                what: "node scalar features",
                expected: self.config.n_scalar_features,
                found: jet.scalar_width(),
            });
        }
        let params = self
            .layout
            .entries()
            .iter()
            .map(|e| {
                let data = self.params[e.range()].to_vec();
                if trainable {
                    tape.param(e.shape.clone(), data)
                } else {
                    tape.constant(e.shape.clone(), data)
                }
            })
            .collect::<Result<Vec<_>>>()?;

        let embed = self.layout.embed;
        let h = jet
            .scalars()
            .iter()
            .map(|raw| {
                let raw = tape.constant_vector(raw.clone());
                embed_scalars(tape, raw, params[embed.weight], params[embed.bias])
            })
            .collect::<Result<Vec<_>>>()?;
        let x = jet.momenta().iter().map(|v| tape.constant_vector(v.to_array().to_vec())).collect();
        let mut states = vec![NodeState { x, h }];

        let c = T::lit(self.config.c);
        for block in &self.layout.blocks {
            let bind = |module: PhiModule| BoundPhi { module, params: &params, circuit: &self.circuit };
            let (phi_e, phi_h, phi_m) = (bind(block.phi_e), bind(block.phi_h), bind(block.phi_m));
            let phi_x = block.phi_x.map(bind);
            let phis = BlockPhis {
                phi_e: &phi_e,
                phi_x: phi_x.as_ref().map(|p| p as &dyn Phi<T>),
                phi_h: &phi_h,
                phi_m: &phi_m,
            };
            let next = leqb_forward(tape, states.last().expect("states start non-empty"), &phis, c)?;
            states.push(next);
        }

        let dec = self.layout.decoder;
        let last = states.last().expect("states start non-empty");
        let logits = decode(tape, &last.h, params[dec.weight], params[dec.bias])?;
        Ok(Recorded { logits, params, states })
    }

    pub fn logits(&self, jet: &JetGraph<T>) -> Result<[T; 2]> {
        let mut tape = Tape::new();
        let rec = self.record(&mut tape, jet, false)?;
        let l = tape.data(rec.logits);
        Ok([l[0], l[1]])
    }

    /// Embedding output followed by the `(x, h)` produced by every block.
    pub fn trace(&self, jet: &JetGraph<T>) -> Result<Vec<LayerState<T>>> {
        let mut tape = Tape::new();
        let rec = self.record(&mut tape, jet, false)?;
        Ok(rec
            .states
            .iter()
            .map(|s| LayerState {
                x: s.x.iter().map(|&v| FourVector::from_array(vec4(tape.data(v)))).collect(),
                h: s.h.iter().map(|&v| tape.data(v).to_vec()).collect(),
            })
            .collect())
    }

    /// Cross-entropy loss of one jet.
    pub fn loss(&self, jet: &JetGraph<T>) -> Result<T> {
        let mut tape = Tape::new();
        let rec = self.record(&mut tape, jet, false)?;
        let loss = tape.softmax_cross_entropy(rec.logits, jet.label())?;
        Ok(tape.data(loss)[0])
    }

    /// Loss and its gradient with respect to the flat parameter vector.
    pub fn loss_and_grad(&self, jet: &JetGraph<T>, quantum_grad: QuantumGrad) -> Result<LossGrad<T>> {
        let mut tape = Tape::with_quantum_grad(quantum_grad);
        let rec = self.record(&mut tape, jet, true)?;
        let loss = tape.softmax_cross_entropy(rec.logits, jet.label())?;
        let grads = tape.backward(loss)?;
        let mut grad = vec![T::zero(); self.layout.total()];
        for (e, &v) in self.layout.entries().iter().zip(&rec.params) {
            if let Some(g) = grads.get_ref(v) {
                grad[e.range()].copy_from_slice(g);
            }
        }
        let l = tape.data(rec.logits);
        Ok(LossGrad { loss: tape.data(loss)[0], grad, logits: [l[0], l[1]] })
    }

    pub fn cast<U: Real>(&self) -> Model<U> {
        Model {
            config: self.config.clone(),
            layout: self.layout.clone(),
            params: self.params.iter().map(|&p| U::lit(p.as_f64())).collect(),
            circuit: Arc::clone(&self.circuit),
        }
    }
}

fn vec4<T: Real>(d: &[T]) -> [T; 4] {
    [d[0], d[1], d[2], d[3]]
}

/// Predicted class: index of the larger logit, ties to class 0.
pub fn predict<T: Real>(logits: &[T; 2]) -> usize {
    usize::from(logits[1] > logits[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::random_lorentz;

    fn jet(n: usize, seed: u64) -> JetGraph<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..n)
            .map(|_| {
                let (pt, eta, phi): (f64, f64, f64) =
                    (rng.gen_range(1.0..50.0), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                FourVector::new(pt * eta.cosh(), pt * phi.cos(), pt * phi.sin(), pt * eta.sinh())
            })
            .collect();
        let s = (0..n).map(|_| (0..crate::data::SCALAR_FEATURES).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        JetGraph::new(x, s, (seed % 2) as usize).unwrap()
    }

    #[test]
    fn zero_output_layers_make_blocks_identity() {
        let mut model = Model::<f64>::new(ModelConfig::for_variant(Variant::FullQuantum), 3).unwrap();
        let layout = model.layout().clone();
        for e in layout.entries() {
            if e.name.starts_with("block") && e.name.contains(".output.") {
                model.params_mut()[e.range()].iter_mut().for_each(|p| *p = 0.0);
            }
        }
        let trace = model.trace(&jet(5, 1)).unwrap();
        for s in &trace[1..] {
            assert_eq!(s, &trace[0]);
        }
    }

    #[test]
    fn logits_are_lorentz_and_permutation_invariant() {
        for v in [Variant::Classical, Variant::PhiE] {
            let model = Model::<f64>::new(ModelConfig::for_variant(v), 11).unwrap();
            let j = jet(6, 4);
            let base = model.logits(&j).unwrap();
            let l = random_lorentz(9, 1.0).unwrap();
            let boosted = model.logits(&j.transformed(&l)).unwrap();
            let permuted = model.logits(&j.permuted(&[3, 1, 5, 0, 2, 4]).unwrap()).unwrap();
            for k in 0..2 {
                assert!((base[k] - boosted[k]).abs() <= 1e-6, "{v}: {base:?} vs {boosted:?}");
                assert!((base[k] - permuted[k]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn deterministic_init_and_forward() {
        let a = Model::<f64>::new(ModelConfig::for_variant(Variant::PhiH), 5).unwrap();
        let b = Model::<f64>::new(ModelConfig::for_variant(Variant::PhiH), 5).unwrap();
        assert_eq!(a.params(), b.params());
        let j = jet(4, 2);
        assert_eq!(a.logits(&j).unwrap(), b.logits(&j).unwrap());
        let c = Model::<f64>::new(ModelConfig::for_variant(Variant::PhiH), 6).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn grad_matches_between_quantum_methods() {
        let model = Model::<f64>::new(ModelConfig::for_variant(Variant::FullQuantum), 8).unwrap();
        let j = jet(4, 3);
        let a = model.loss_and_grad(&j, QuantumGrad::ParameterShift).unwrap();
        let b = model.loss_and_grad(&j, QuantumGrad::Adjoint).unwrap();
        assert_eq!(a.loss, b.loss);
        for (p, q) in a.grad.iter().zip(&b.grad) {
            assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
        }
        assert!((a.loss - model.loss(&j).unwrap()).abs() == 0.0);
    }

    #[test]
    fn embed_identity_passthrough() {
        let mut tape = Tape::<f64>::new();
        let raw = tape.constant_vector(vec![0.5, -1.0, 2.0]);
        let mut eye = vec![0.0; 9];
        (0..3).for_each(|i| eye[i * 4] = 1.0);
        let w = tape.constant(vec![3, 3], eye).unwrap();
        let b = tape.constant_vector(vec![0.0; 3]);
        let h = embed_scalars(&mut tape, raw, w, b).unwrap();
        assert_eq!(tape.data(h), &[0.5, -1.0, 2.0]);
    }

    #[test]
    fn wrong_scalar_width_is_rejected() {
        let model = Model::<f64>::new(ModelConfig::default(), 0).unwrap();
        let j = JetGraph::new(vec![FourVector::new(1.0, 1.0, 0.0, 0.0); 2], vec![vec![0.0; 3]; 2], 0).unwrap();
        assert!(model.logits(&j).is_err());
    }
}
