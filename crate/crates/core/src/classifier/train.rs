use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::net::{self, Architecture, Params};
use super::{ClassifierError, ClassifierModel, LabeledDataset, TrainingMeta};
use crate::amb::AmbImage;
use crate::rng::{derive_seed, rng_from_seed};

/// Mini-batch SGD with momentum and step learning-rate decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// The learning rate is multiplied by `decay_factor` every `decay_every` epochs.
    pub decay_every: usize,
    pub decay_factor: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            decay_every: 10,
            decay_factor: 0.5,
        }
    }
}

impl Hyperparameters {
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        let steps = if self.decay_every == 0 { 0 } else { epoch / self.decay_every };
        self.learning_rate * self.decay_factor.powi(steps as i32)
    }
}

/// Trains the standard architecture at the dataset's image side.
pub fn train(
    ds: &LabeledDataset,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<ClassifierModel, ClassifierError> {
    let side = ds
        .train
        .first()
        .ok_or(ClassifierError::EmptyTrainSplit)?
        .image
        .side();
    train_with_arch(ds, Architecture::standard(side), hyper, seed)
}

pub fn train_with_arch(
    ds: &LabeledDataset,
    arch: Architecture,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<ClassifierModel, ClassifierError> {
    if ds.train.is_empty() {
        return Err(ClassifierError::EmptyTrainSplit);
    }
    if hyper.batch_size == 0 {
        return Err(ClassifierError::Config("batch size must be positive".into()));
    }
    let mut model = ClassifierModel::untrained(arch, derive_seed(seed, "init", 0))?;
    if let Some(bad) = ds.train.iter().find(|it| it.image.side() != arch.input_side) {
        return Err(ClassifierError::InputSide {
            expected: arch.input_side,
            got: bad.image.side(),
        });
    }
    let samples: Vec<(&AmbImage, usize)> = ds
        .train
        .iter()
        .map(|it| (&it.image, it.label.index()))
        .collect();

    let initial_loss = net::batch_loss(&arch, &model.params, &samples);
    let mut velocity = Params::zeros(&arch);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = rng_from_seed(derive_seed(seed, "shuffle", 0));
    let mut loss_curve = Vec::with_capacity(hyper.epochs);
    let mut batch = Vec::with_capacity(hyper.batch_size);

    for epoch in 0..hyper.epochs {
        let lr = hyper.learning_rate_at(epoch);
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| samples[i]));
            let (loss, grads) = net::loss_and_grad(&arch, &model.params, &batch);
            if !loss.is_finite() {
                return Err(ClassifierError::Diverged { epoch, learning_rate: lr });
            }
            epoch_loss += loss * chunk.len() as f64;
            for ((p, v), g) in model
                .params
                .blocks
                .iter_mut()
                .zip(&mut velocity.blocks)
                .zip(&grads.blocks)
            {
                for ((pi, vi), gi) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                    *vi = hyper.momentum * *vi - lr * gi;
                    *pi += *vi;
                }
            }
        }
        if !model.params.is_finite() {
            return Err(ClassifierError::Diverged { epoch, learning_rate: lr });
        }
        loss_curve.push(epoch_loss / samples.len() as f64);
    }

    let vra = match ds.train.iter().filter(|it| it.vra_applied).count() {
        0 => Some(false),
        c if c == ds.train.len() => Some(true),
        _ => None,
    };
    model.meta = Some(TrainingMeta {
        seed,
        epochs: hyper.epochs,
        hyper: hyper.clone(),
        initial_loss,
        loss_curve,
        vra,
        dataset: ds.source.clone(),
    });
    Ok(model)
}
