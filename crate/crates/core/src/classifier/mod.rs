//! From-scratch binary classifiers: logistic regression, a shallow network
//! with one 80-unit hidden layer, and a linear SVM, all trained by the same
//! mini-batch Adam loop with early stopping.

mod adam;
mod model;
mod network;
mod train;

pub use adam::{adam_step, Adam, AdamConfig};
pub use model::{Calibration, Model, Prediction, Standardizer, MODEL_FORMAT_VERSION};
pub use network::{sigmoid, Activation, DropoutMask, ModelKind, Network, HIDDEN_UNITS};
pub use train::{train_network, Dataset, EarlyStopping, EpochRecord, StopVerdict, TrainConfig, TrainingLog};

pub use crate::features::FeatureRecord;
