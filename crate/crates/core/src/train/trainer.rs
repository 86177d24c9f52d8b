use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::EpochMetrics;
use super::optim::{AdamW, AdamWConfig, LrSchedule};
use crate::autodiff::QuantumGrad;
use crate::error::{Error, Result};
use crate::model::{predict, JetGraph, Model};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
    pub schedule: LrSchedule,
    pub adamw: AdamWConfig,
    /// Backward method for quantum nodes. Both give the same gradient up to rounding.
    pub quantum_grad: QuantumGrad,
    /// Record wall-clock seconds per epoch; when off the column is written as 0 so metric
    /// files are byte-comparable across runs.
    pub wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            seed: 0,
            schedule: LrSchedule::default(),
            adamw: AdamWConfig::default(),
            quantum_grad: QuantumGrad::Adjoint,
            wall_clock: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be positive".into()));
        }
        self.schedule.validate()
    }
}

/// Mean loss and accuracy over a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

/// Read-only pass over `data`. Per-jet work runs in parallel; the reduction is sequential in
/// dataset order so the result does not depend on the thread count.
pub fn evaluate(model: &Model<f64>, data: &[JetGraph<f64>]) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    let per_jet: Vec<(f64, bool)> = data
        .par_iter()
        .map(|jet| {
            let logits = model.logits(jet)?;
            Ok((cross_entropy(&logits, jet.label()), predict(&logits) == jet.label()))
        })
        .collect::<Result<_>>()?;
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (i, (l, ok)) in per_jet.into_iter().enumerate() {
        if !l.is_finite() {
            return Err(Error::NonFinite(format!("loss at jet index {i}")));
        }
        loss += l;
        correct += usize::from(ok);
    }
    let n = data.len() as f64;
    Ok(Evaluation { loss: loss / n, accuracy: correct as f64 / n })
}

fn cross_entropy(logits: &[f64; 2], label: usize) -> f64 {
    let m = logits[0].max(logits[1]);
    let other = logits[0].min(logits[1]);
    (m - logits[label]) + (other - m).exp().ln_1p()
}

/// Model, optimizer and schedule position.
#[derive(Debug, Clone, PartialEq)]
pub struct Trainer {
    pub model: Model<f64>,
    pub optimizer: AdamW,
    pub config: TrainConfig,
    /// Seed the model was initialized from; recorded in checkpoints.
    pub init_seed: u64,
    /// Index of the next epoch to run.
    pub epoch: usize,
    pub history: Vec<EpochMetrics>,
}

impl Trainer {
    pub fn new(model: Model<f64>, config: TrainConfig, init_seed: u64) -> Result<Self> {
        config.validate()?;
        let optimizer = AdamW::for_layout(config.adamw, model.layout());
        Ok(Self { model, optimizer, config, init_seed, epoch: 0, history: Vec::new() })
    }

    pub fn finished(&self) -> bool {
        self.epoch >= self.config.schedule.total_epochs
    }

    /// Epoch-specific shuffle of `0..n`.
    pub fn epoch_order(&self, n: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(self.epoch as u64);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order
    }

    /// One pass over `train` in mini-batches, one optimizer step per batch, then evaluation
    /// on `val`. Reported train loss/accuracy are averages of the pre-step values.
    pub fn train_epoch(&mut self, train: &[JetGraph<f64>], val: &[JetGraph<f64>]) -> Result<EpochMetrics> {
        if train.is_empty() {
            return Err(Error::InsufficientData { needed: 1, available: 0 });
        }
        let start = Instant::now();
        let lr = self.config.schedule.lr_at(self.epoch)?;
        let order = self.epoch_order(train.len());
        let n_params = self.model.layout().total();
        let qg = self.config.quantum_grad;

        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for batch in order.chunks(self.config.batch_size) {
            let model = &self.model;
            let results: Vec<_> =
                batch.par_iter().map(|&i| model.loss_and_grad(&train[i], qg)).collect::<Result<_>>()?;
            let mut grad = vec![0.0; n_params];
            for (r, &i) in results.iter().zip(batch) {
                if !r.loss.is_finite() {
                    return Err(Error::NonFinite(format!("loss at jet index {i}")));
                }
                loss_sum += r.loss;
                correct += usize::from(predict(&r.logits) == train[i].label());
                grad.iter_mut().zip(&r.grad).for_each(|(g, x)| *g += x);
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            self.optimizer.step(self.model.params_mut(), &grad, lr)?;
        }

        let val_eval = if val.is_empty() { None } else { Some(evaluate(&self.model, val)?) };
        let n = train.len() as f64;
        let metrics = EpochMetrics {
            epoch: self.epoch,
            train_loss: loss_sum / n,
            val_loss: val_eval.map_or(f64::NAN, |e| e.loss),
            train_acc: correct as f64 / n,
            val_acc: val_eval.map_or(f64::NAN, |e| e.accuracy),
            lr,
            seconds: if self.config.wall_clock { start.elapsed().as_secs_f64() } else { 0.0 },
        };
        self.epoch += 1;
        self.history.push(metrics);
        Ok(metrics)
    }

    /// Run the remaining epochs of the schedule, calling `on_epoch` after each.
    pub fn fit(
        &mut self,
        train: &[JetGraph<f64>],
        val: &[JetGraph<f64>],
        mut on_epoch: impl FnMut(&Self, &EpochMetrics) -> Result<()>,
    ) -> Result<()> {
        while !self.finished() {
            let m = self.train_epoch(train, val)?;
            on_epoch(self, &m)?;
        }
        Ok(())
    }
}
