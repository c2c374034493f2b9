//! Mini-batch training with seeded shuffling and early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::loss::{Loss, Targets};
use super::matrix::Matrix;
use super::net::{Inputs, Model};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub adam: AdamConfig,
    pub positive_weight: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            max_epochs: 50,
            adam: AdamConfig::default(),
            positive_weight: 20.0,
            patience: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.patience == 0 || self.max_epochs == 0 {
            return Err(Error::Config("batch_size, patience and max_epochs must be at least 1".into()));
        }
        if !(self.positive_weight > 0.0) || !(self.adam.lr > 0.0) {
            return Err(Error::Config("positive_weight and lr must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetData {
    Binary(Vec<f64>),
    Real(Vec<f64>),
    Class(Vec<usize>),
}

impl TargetData {
    pub fn as_targets(&self) -> Targets<'_> {
        match self {
            TargetData::Binary(v) => Targets::Binary(v),
            TargetData::Real(v) => Targets::Real(v),
            TargetData::Class(v) => Targets::Class(v),
        }
    }

    fn gather(&self, rows: &[usize]) -> Self {
        match self {
            TargetData::Binary(v) => TargetData::Binary(rows.iter().map(|&r| v[r]).collect()),
            TargetData::Real(v) => TargetData::Real(rows.iter().map(|&r| v[r]).collect()),
            TargetData::Class(v) => TargetData::Class(rows.iter().map(|&r| v[r]).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.as_targets().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Model inputs and targets for a set of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSet {
    pub a: Matrix,
    pub b: Option<Matrix>,
    pub targets: TargetData,
}

impl TrainSet {
    pub fn len(&self) -> usize {
        self.a.rows
    }

    pub fn is_empty(&self) -> bool {
        self.a.rows == 0
    }

    pub fn inputs(&self) -> Inputs<'_> {
        Inputs { a: &self.a, b: self.b.as_ref() }
    }

    fn gather(&self, rows: &[usize]) -> TrainSet {
        TrainSet {
            a: self.a.gather(rows),
            b: self.b.as_ref().map(|b| b.gather(rows)),
            targets: self.targets.gather(rows),
        }
    }
}

/// Mean loss over a whole set, computed in chunks.
pub fn dataset_loss(model: &Model, set: &TrainSet, loss: Loss, positive_weight: f64) -> Result<f64> {
    const CHUNK: usize = 4096;
    let mut total = 0.0;
    let idx: Vec<usize> = (0..set.len()).collect();
    for chunk in idx.chunks(CHUNK) {
        let part = set.gather(chunk);
        total += model.loss(part.inputs(), &part.targets.as_targets(), loss, positive_weight)? * chunk.len() as f64;
    }
    Ok(total / set.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Tracks the best validation loss and signals a stop after `patience`
/// epochs without strict improvement.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    pub patience: usize,
    pub best_epoch: usize,
    pub best_loss: f64,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self { patience, best_epoch: 0, best_loss: f64::INFINITY }
    }

    pub fn observe(&mut self, epoch: usize, loss: f64) -> StopDecision {
        if loss < self.best_loss {
            self.best_loss = loss;
            self.best_epoch = epoch;
            StopDecision::Improved
        } else if epoch - self.best_epoch >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Trains a copy of `model` and returns the weights from the epoch with the
/// lowest validation loss.
pub fn train(
    model: &Model,
    loss: Loss,
    train_set: &TrainSet,
    val_set: &TrainSet,
    config: &TrainConfig,
) -> Result<(Model, TrainTrace)> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    if val_set.is_empty() {
        return Err(Error::Config("empty validation set".into()));
    }
    let mut current = model.clone();
    let sizes: Vec<usize> = current.param_slices().iter().map(|s| s.len()).collect();
    let mut adam = AdamState::new(config.adam, &sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut stopper = EarlyStopping::new(config.patience);
    let mut best = current.clone();
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut train_total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let part = train_set.gather(batch);
            let (value, grads) =
                current.loss_and_grad(part.inputs(), &part.targets.as_targets(), loss, config.positive_weight)?;
            train_total += value * batch.len() as f64;
            adam.step(&mut current.param_slices_mut(), &grads)?;
        }
        let val_loss = dataset_loss(&current, val_set, loss, config.positive_weight)?;
        epochs.push(EpochRecord { epoch, train_loss: train_total / train_set.len() as f64, val_loss });
        match stopper.observe(epoch, val_loss) {
            StopDecision::Improved => best = current.clone(),
            StopDecision::Continue => {}
            StopDecision::Stop => {
                stopped_early = true;
                break;
            }
        }
    }
    Ok((best, TrainTrace { epochs, best_epoch: stopper.best_epoch, stopped_early }))
}
