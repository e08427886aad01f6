use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::network::{Activation, DropoutMask, ModelKind, Network};
use crate::error::{Error, Result};

/// Feature rows with 0/1 targets (1 = Healthy).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn rows(&self) -> Vec<&[f64]> {
        self.xs.iter().map(Vec::as_slice).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub dropout_rate: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub l2: f64,
    pub activation: Activation,
}

impl TrainConfig {
    /// Defaults per model kind: hidden dropout 0.4 for the shallow network,
    /// none for the linear models; L2 only for the SVM.
    pub fn for_kind(kind: ModelKind) -> Self {
        Self {
            adam: AdamConfig::default(),
            batch_size: 3,
            dropout_rate: if kind == ModelKind::Mlp80 { 0.4 } else { 0.0 },
            patience: 15,
            max_epochs: 100,
            seed: 0,
            l2: if kind == ModelKind::LinearSvm { 0.01 } else { 0.0 },
            activation: Activation::Sigmoid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidArgument(format!("dropout_rate must be in [0, 1), got {}", self.dropout_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidArgument("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stop once validation loss has not improved for `patience` epochs.
/// Epochs are numbered from 1; an improvement is a strictly lower loss.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    pub patience: usize,
    pub best_loss: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopVerdict {
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> StopVerdict {
        let improved = val_loss < self.best_loss;
        if improved {
            self.best_loss = val_loss;
            self.best_epoch = epoch;
        }
        StopVerdict {
            improved,
            stop: epoch - self.best_epoch >= self.patience,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Validation loss of the freshly initialised model.
    pub initial_val_loss: f64,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
}

impl TrainingLog {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "train_loss", "val_loss", "val_acc"])?;
        for e in &self.epochs {
            w.write_record([
                e.epoch.to_string(),
                e.train_loss.to_string(),
                e.val_loss.to_string(),
                e.val_acc.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn accuracy(net: &Network, data: &Dataset) -> Result<f64> {
    let mut correct = 0usize;
    for (x, &y) in data.xs.iter().zip(&data.ys) {
        let predicted_healthy = net.score(x, None)? >= 0.0;
        if predicted_healthy == (y >= 0.5) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Mini-batch Adam training with validation-loss early stopping.
///
/// Weights start Glorot-uniform from `config.seed`, batches are reshuffled
/// every epoch, and the returned network carries the weights of the epoch
/// with the lowest validation loss. All randomness comes from one seeded
/// stream, so a fixed seed reproduces the run bit for bit.
pub fn train_network(kind: ModelKind, train: &Dataset, val: &Dataset, config: &TrainConfig) -> Result<(Network, TrainingLog)> {
    config.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::Insufficient("training or validation examples"));
    }
    let n_in = train.xs[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = Network::zeros(kind, n_in, config.activation, config.l2);
    net.init_glorot(&mut rng);

    let use_dropout = kind == ModelKind::Mlp80 && config.dropout_rate > 0.0;
    let val_rows = val.rows();
    let initial_val_loss = net.loss(&val_rows, &val.ys, None)?;

    let mut adam = Adam::new(config.adam, net.n_params());
    let mut stopper = EarlyStopping::new(config.patience);
    let mut best_params = net.params.clone();
    let mut epochs = Vec::new();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stopped_early = false;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| train.xs[i].as_slice()).collect();
            let ys: Vec<f64> = batch.iter().map(|&i| train.ys[i]).collect();
            let masks: Option<Vec<DropoutMask>> = use_dropout.then(|| {
                batch
                    .iter()
                    .map(|_| DropoutMask::sample(net.n_hidden, config.dropout_rate, &mut rng))
                    .collect()
            });
            let (loss, grad) = net.loss_and_grad(&xs, &ys, masks.as_deref())?;
            loss_sum += loss * batch.len() as f64;
            adam.step(&mut net.params, &grad);
        }
        let train_loss = loss_sum / train.len() as f64;
        let val_loss = net.loss(&val_rows, &val.ys, None)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                train_loss,
                val_loss,
            });
        }
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_acc: accuracy(&net, val)?,
        });
        let verdict = stopper.observe(epoch, val_loss);
        if verdict.improved {
            best_params.clone_from(&net.params);
        }
        if verdict.stop {
            stopped_early = epoch < config.max_epochs;
            break;
        }
    }

    net.params = best_params;
    let log = TrainingLog {
        initial_val_loss,
        epochs,
        best_epoch: stopper.best_epoch,
        best_val_loss: stopper.best_loss,
        stopped_early,
    };
    Ok((net, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn early_stopping_counts_epochs_without_improvement() {
        let mut es = EarlyStopping::new(3);
        let losses = [1.0, 0.8, 0.9, 0.8, 0.7, 0.75, 0.71, 0.7, 0.72];
        let mut stopped_at = None;
        for (i, &l) in losses.iter().enumerate() {
            if es.observe(i + 1, l).stop {
                stopped_at = Some(i + 1);
                break;
            }
        }
        // ties (epochs 4 and 8) are not improvements
        assert_eq!(stopped_at, Some(8));
        assert_eq!(es.best_epoch, 5);
    }

    #[test]
    fn strictly_worsening_schedule_stops_after_patience() {
        let mut es = EarlyStopping::new(15);
        let stop = (1..=100).find(|&e| es.observe(e, e as f64).stop);
        assert_eq!(stop, Some(16));
        assert_eq!(es.best_epoch, 1);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = TrainConfig::for_kind(ModelKind::Mlp80);
        cfg.dropout_rate = 1.0;
        assert!(cfg.validate().is_err());
        cfg.dropout_rate = 0.4;
        cfg.batch_size = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_split_is_an_error() {
        let d = Dataset { xs: vec![vec![1.0]], ys: vec![1.0] };
        let cfg = TrainConfig::for_kind(ModelKind::Logistic);
        assert!(train_network(ModelKind::Logistic, &d, &Dataset::default(), &cfg).is_err());
    }
}
