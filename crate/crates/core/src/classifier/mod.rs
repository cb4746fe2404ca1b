//! Network-family classification from amb images.

mod dataset;
mod eval;
mod io;
pub mod net;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{
    build_dataset, build_dataset_jobs, DatasetConfig, DatasetItem, DatasetSource, LabeledDataset,
    ParamRanges,
};
pub use eval::{evaluate, format_table, EvalReport};
pub use io::{load_model, model_from_bytes, model_to_bytes, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use net::{Architecture, LayerDesc, Params};
pub use train::{train, train_with_arch, Hyperparameters};

use crate::amb::AmbImage;
use crate::generators::FamilyLabel;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("image side {got} does not match model input side {expected}")]
    InputSide { expected: usize, got: usize },
    #[error("invalid dataset config: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch} with learning rate {learning_rate}")]
    Diverged { epoch: usize, learning_rate: f64 },
    #[error("cannot train on an empty training split")]
    EmptyTrainSplit,
    #[error("cannot evaluate on an empty test split")]
    EmptyTestSplit,
    #[error("model file: {0}")]
    Format(String),
    #[error("model file version {found}, this build reads version {expected}")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("model file checksum mismatch (file corrupt or truncated)")]
    Checksum,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub hyper: Hyperparameters,
    /// Mean training loss at initialization.
    pub initial_loss: f64,
    /// Mean training loss over each epoch.
    pub loss_curve: Vec<f64>,
    pub vra: Option<bool>,
    /// The dataset the model was trained on, when it was built by `build_dataset`.
    #[serde(default)]
    pub dataset: Option<DatasetSource>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub arch: Architecture,
    pub labels: Vec<FamilyLabel>,
    pub params: Params,
    pub meta: Option<TrainingMeta>,
}

impl ClassifierModel {
    /// Randomly initialized model over the four family labels.
    pub fn untrained(arch: Architecture, seed: u64) -> Result<Self, ClassifierError> {
        arch.validate()?;
        if arch.classes != FamilyLabel::ALL.len() {
            return Err(ClassifierError::Architecture(format!(
                "expected {} output classes, got {}",
                FamilyLabel::ALL.len(),
                arch.classes
            )));
        }
        Ok(Self {
            arch,
            labels: FamilyLabel::ALL.to_vec(),
            params: Params::init(&arch, seed),
            meta: None,
        })
    }

    pub fn input_side(&self) -> usize {
        self.arch.input_side
    }

    /// Softmax probabilities, indexed like `self.labels`.
    pub fn predict(&self, img: &AmbImage) -> Result<Vec<f64>, ClassifierError> {
        if img.side() != self.arch.input_side {
            return Err(ClassifierError::InputSide {
                expected: self.arch.input_side,
                got: img.side(),
            });
        }
        let fwd = net::forward(&self.arch, &self.params, img);
        Ok(net::softmax(&fwd.logits))
    }

    pub fn predict_label(&self, img: &AmbImage) -> Result<FamilyLabel, ClassifierError> {
        let probs = self.predict(img)?;
        Ok(self.labels[argmax(&probs)])
    }
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
