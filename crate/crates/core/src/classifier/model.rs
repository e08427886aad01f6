use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{sigmoid, Activation, ModelKind, Network};
use super::train::{train_network, Dataset, TrainConfig, TrainingLog};
use crate::error::{Error, Result};
use crate::features::FeatureRecord;
use crate::keypoints::Label;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Per-feature z-scoring fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Zero-variance features keep a unit scale.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut scale = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        for s in &mut scale {
            let sd = (*s / n).sqrt();
            *s = if sd > 1e-12 { sd } else { 1.0 };
        }
        Self { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Logistic map from an SVM margin to a healthy probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub slope: f64,
    pub intercept: f64,
}

impl Calibration {
    pub fn apply(&self, margin: f64) -> f64 {
        sigmoid(self.slope * margin + self.intercept)
    }

    /// Fit by Newton's method on smoothed targets, which keeps the fit finite
    /// on separable data.
    pub fn fit(margins: &[f64], healthy: &[bool]) -> Self {
        let n_pos = healthy.iter().filter(|&&h| h).count() as f64;
        let n_neg = healthy.len() as f64 - n_pos;
        let (t_pos, t_neg) = ((n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0));
        let targets: Vec<f64> = healthy.iter().map(|&h| if h { t_pos } else { t_neg }).collect();
        let objective = |a: f64, b: f64| -> f64 {
            margins
                .iter()
                .zip(&targets)
                .map(|(m, t)| {
                    let p = sigmoid(a * m + b).clamp(1e-15, 1.0 - 1e-15);
                    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
                })
                .sum()
        };
        let (mut a, mut b) = (0.0, ((n_pos + 1.0) / (n_neg + 1.0)).ln());
        let mut current = objective(a, b);
        for _ in 0..100 {
            let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 1e-12, 0.0, 1e-12);
            for (m, t) in margins.iter().zip(&targets) {
                let p = sigmoid(a * m + b);
                let w = p * (1.0 - p);
                ga += (p - t) * m;
                gb += p - t;
                haa += w * m * m;
                hab += w * m;
                hbb += w;
            }
            let det = haa * hbb - hab * hab;
            if det.abs() < 1e-300 {
                break;
            }
            let da = (hbb * ga - hab * gb) / det;
            let db = (haa * gb - hab * ga) / det;
            let mut step = 1.0;
            let mut accepted = false;
            while step > 1e-10 {
                let (na, nb) = (a - step * da, b - step * db);
                let value = objective(na, nb);
                if value <= current {
                    a = na;
                    b = nb;
                    current = value;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted || (da.abs() + db.abs()) * step < 1e-12 {
                break;
            }
        }
        Self {
            slope: a,
            intercept: b,
        }
    }
}

/// Two-class confidence for one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub clip_id: String,
    pub participant_id: String,
    pub p_mci: f64,
    pub p_healthy: f64,
    pub label: Label,
    /// Ground truth, when known.
    pub truth: Option<Label>,
}

impl Prediction {
    /// Builds the `(1 - p, p)` pair; an exact tie goes to Healthy.
    pub fn from_p_healthy(clip_id: &str, participant_id: &str, p_healthy: f64, truth: Option<Label>) -> Self {
        let p_mci = 1.0 - p_healthy;
        Self::from_pair(clip_id, participant_id, p_mci, p_healthy, truth)
    }

    pub fn from_pair(clip_id: &str, participant_id: &str, p_mci: f64, p_healthy: f64, truth: Option<Label>) -> Self {
        Self {
            clip_id: clip_id.to_string(),
            participant_id: participant_id.to_string(),
            p_mci,
            p_healthy,
            label: if p_healthy >= p_mci { Label::Healthy } else { Label::Mci },
            truth,
        }
    }
}

/// A trained classifier with its input normalisation and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub feature_names: Vec<String>,
    pub standardizer: Standardizer,
    pub network: Network,
    pub calibration: Option<Calibration>,
    pub config: TrainConfig,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

fn to_dataset(records: &[&FeatureRecord], standardizer: &Standardizer) -> Result<Dataset> {
    let mut data = Dataset::default();
    for r in records {
        let label = r
            .label
            .ok_or_else(|| Error::InvalidArgument(format!("clip {} has no label", r.clip_id)))?;
        data.xs.push(standardizer.transform(&r.features));
        data.ys.push(label.target());
    }
    Ok(data)
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        self.network.kind
    }

    /// Standardise on the training split, train, and calibrate SVM margins.
    pub fn fit(
        kind: ModelKind,
        feature_names: &[String],
        train: &[&FeatureRecord],
        val: &[&FeatureRecord],
        config: &TrainConfig,
    ) -> Result<(Self, TrainingLog)> {
        let dim = feature_names.len();
        if let Some(bad) = train.iter().chain(val).find(|r| r.features.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: bad.features.len(),
            });
        }
        let rows: Vec<Vec<f64>> = train.iter().map(|r| r.features.clone()).collect();
        let standardizer = Standardizer::fit(&rows);
        let train_data = to_dataset(train, &standardizer)?;
        let val_data = to_dataset(val, &standardizer)?;
        let (network, log) = train_network(kind, &train_data, &val_data, config)?;
        let calibration = if kind == ModelKind::LinearSvm {
            let margins = train_data
                .xs
                .iter()
                .map(|x| network.score(x, None))
                .collect::<Result<Vec<_>>>()?;
            let healthy: Vec<bool> = train_data.ys.iter().map(|&y| y >= 0.5).collect();
            Some(Calibration::fit(&margins, &healthy))
        } else {
            None
        };
        let model = Model {
            feature_names: feature_names.to_vec(),
            standardizer,
            network,
            calibration,
            config: *config,
            best_epoch: log.best_epoch,
            best_val_loss: log.best_val_loss,
        };
        Ok((model, log))
    }

    /// Validation loss of the stored weights on already-selected records.
    pub fn loss_on(&self, records: &[&FeatureRecord]) -> Result<f64> {
        let data = to_dataset(records, &self.standardizer)?;
        let rows: Vec<&[f64]> = data.xs.iter().map(Vec::as_slice).collect();
        self.network.loss(&rows, &data.ys, None)
    }

    pub fn p_healthy(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.feature_names.len() {
            return Err(Error::Dimension {
                expected: self.feature_names.len(),
                got: features.len(),
            });
        }
        let score = self.network.score(&self.standardizer.transform(features), None)?;
        Ok(match &self.calibration {
            Some(c) => c.apply(score),
            None => sigmoid(score),
        })
    }

    /// Inference never applies dropout.
    pub fn predict(&self, record: &FeatureRecord) -> Result<Prediction> {
        let p = self.p_healthy(&record.features)?;
        Ok(Prediction::from_p_healthy(&record.clip_id, &record.participant_id, p, record.label))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            kind: self.network.kind,
            n_inputs: self.network.n_in,
            n_hidden: self.network.n_hidden,
            activation: self.network.activation,
            l2: self.network.l2,
            feature_names: self.feature_names.clone(),
            standardizer: self.standardizer.clone(),
            tensors: self
                .network
                .tensors()
                .into_iter()
                .map(|(name, shape, data)| TensorFile {
                    name: name.to_string(),
                    shape,
                    data: data.to_vec(),
                })
                .collect(),
            calibration: self.calibration,
            seed: self.config.seed,
            train_config: self.config,
            best_epoch: self.best_epoch,
            best_val_loss: self.best_val_loss,
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion(file.format_version));
        }
        let mut network = Network::with_hidden(file.kind, file.n_inputs, file.n_hidden, file.activation, file.l2);
        let expected = network.tensors().iter().map(|(_, s, _)| s.iter().product::<usize>()).collect::<Vec<_>>();
        if file.tensors.len() != expected.len() {
            return Err(Error::Schema {
                field: "tensors".into(),
                message: format!("expected {} tensors, found {}", expected.len(), file.tensors.len()),
            });
        }
        let mut params = Vec::with_capacity(network.n_params());
        for (t, len) in file.tensors.iter().zip(expected) {
            if t.data.len() != len || t.shape.iter().product::<usize>() != len {
                return Err(Error::Schema {
                    field: format!("tensors.{}", t.name),
                    message: format!("expected {len} values"),
                });
            }
            params.extend_from_slice(&t.data);
        }
        network.params = params;
        if file.feature_names.len() != file.n_inputs || file.standardizer.mean.len() != file.n_inputs {
            return Err(Error::Schema {
                field: "feature_names".into(),
                message: "length does not match n_inputs".into(),
            });
        }
        Ok(Model {
            feature_names: file.feature_names,
            standardizer: file.standardizer,
            network,
            calibration: file.calibration,
            config: file.train_config,
            best_epoch: file.best_epoch,
            best_val_loss: file.best_val_loss,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorFile {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    kind: ModelKind,
    n_inputs: usize,
    n_hidden: usize,
    activation: Activation,
    l2: f64,
    /// Feature assembly order expected at the input.
    feature_names: Vec<String>,
    standardizer: Standardizer,
    tensors: Vec<TensorFile>,
    calibration: Option<Calibration>,
    seed: u64,
    train_config: TrainConfig,
    best_epoch: usize,
    best_val_loss: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_two_sub_case_is_mci() {
        let p = Prediction::from_pair("1_1", "1", 0.63, 0.37, Some(Label::Healthy));
        assert_eq!(p.label, Label::Mci);
        let p = Prediction::from_p_healthy("1_1", "1", 0.37, None);
        assert_eq!(p.label, Label::Mci);
        assert!((p.p_mci + p.p_healthy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_tie_goes_to_healthy() {
        assert_eq!(Prediction::from_p_healthy("a", "a", 0.5, None).label, Label::Healthy);
    }

    #[test]
    fn standardizer_handles_constant_columns() {
        let s = Standardizer::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        assert_eq!(s.transform(&[3.0, 5.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn calibration_is_monotone_and_finite_on_separable_margins() {
        let margins = [-3.0, -2.0, -1.5, 1.0, 2.0, 4.0];
        let healthy = [false, false, false, true, true, true];
        let c = Calibration::fit(&margins, &healthy);
        assert!(c.slope.is_finite() && c.slope > 0.0);
        assert!(c.apply(-3.0) < 0.5 && c.apply(4.0) > 0.5);
    }
}
