//! File-based pipeline stages behind the command-line tool.
//!
//! Stages only talk through files under one output directory:
//!
//! ```text
//! synth   -> keypoints/participant_<id>.json, manifest.csv
//! extract -> features.csv, facial.csv
//! train   -> model.json, train_log.csv, split.json
//! eval    -> eval/eval.json, predictions.csv, roc.csv, roc.svg, confusion.svg, participants.csv
//! report  -> report/report.json, participants.csv, roc.svg, confusion.svg, roc.csv, training_curve.csv
//! render  -> render/<clip>_stacked.png, per-hand SVG and CSV, elbow histogram and QQ CSVs
//! ```
//!
//! Every random choice is seeded from [`PipelineConfig::seed`] through
//! [`derive_seed`] with a fixed stream per stage, so reruns are byte-identical.

use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{Activation, AdamConfig, FeatureRecord, Model, ModelKind, Prediction, TrainConfig, TrainingLog};
use crate::elbow::{elbow_distances, elbow_distribution, write_histogram_csv, write_qq_csv, ElbowVariant};
use crate::error::{Error, Result};
use crate::evaluation::{
    aggregate_participants, confusion_svg, evaluate, read_predictions_csv, roc_svg, split_dataset, write_participants_csv,
    write_predictions_csv, write_roc_csv, EvalReport, ParticipantDecision, Split, SplitMode,
};
use crate::facial::{classify_expression, median_d3, write_facial_csv};
use crate::features::{extract_clip, feature_names, ExtractConfig, FeatureTable};
use crate::keypoints::{parse_keypoint_file, segment, write_keypoint_file, Side};
use crate::synth::{derive_seed, plan_cohort, recording_file_name, streams, write_manifest, NoiseConfig, ProfileSet};
use crate::trajectory::{render_trajectory_svg, stacked_clip_image, wrist_trajectory, write_svg};

/// How the expression threshold on `d3` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Median `d3` over all extracted clips.
    Median,
    /// The configured `facial_threshold`.
    Fixed,
}

/// Every tunable of the pipeline. The file form is flat TOML with the field
/// names below as keys; missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,

    // paths, relative to the output directory unless absolute
    pub keypoints_dir: PathBuf,
    pub manifest_file: PathBuf,
    pub features_file: PathBuf,
    pub facial_file: PathBuf,
    pub model_file: PathBuf,
    pub train_log_file: PathBuf,
    pub split_file: PathBuf,
    pub eval_dir: PathBuf,
    pub report_dir: PathBuf,
    pub render_dir: PathBuf,

    // synthetic cohort
    pub n_participants: usize,
    pub mci_fraction: f64,
    pub duration: f64,
    pub fps: f64,
    /// `default`, `hard`, `identical`, or a path to a profile TOML file.
    pub profile: String,
    pub jitter_sigma: f64,
    pub face_dropout: f64,
    pub joint_dropout: f64,

    // features
    pub clip_len: f64,
    pub pause_eps: f64,
    pub max_gap: usize,
    pub elbow_variant: ElbowVariant,
    pub n_bins: usize,
    pub image_features: bool,
    pub facial_threshold_mode: ThresholdMode,
    pub facial_threshold: f64,

    // training
    pub model: ModelKind,
    pub batch_size: usize,
    /// Hidden-unit dropout, used by `mlp80` only.
    pub dropout_rate: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty of the linear SVM.
    pub svm_l2: f64,
    pub activation: Activation,

    // splitting
    pub split_mode: SplitMode,
    pub split_ratio: f64,
    pub stratify: bool,
    pub validation_fraction: f64,
    pub holdout: Vec<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        let train = TrainConfig::for_kind(ModelKind::Mlp80);
        let extract = ExtractConfig::default();
        let noise = NoiseConfig::default();
        Self {
            seed: 0,
            keypoints_dir: "keypoints".into(),
            manifest_file: "manifest.csv".into(),
            features_file: "features.csv".into(),
            facial_file: "facial.csv".into(),
            model_file: "model.json".into(),
            train_log_file: "train_log.csv".into(),
            split_file: "split.json".into(),
            eval_dir: "eval".into(),
            report_dir: "report".into(),
            render_dir: "render".into(),
            n_participants: 40,
            mci_fraction: 0.475,
            duration: crate::synth::DEFAULT_DURATION,
            fps: crate::synth::DEFAULT_FPS,
            profile: "default".into(),
            jitter_sigma: noise.jitter_sigma,
            face_dropout: noise.face_dropout,
            joint_dropout: noise.joint_dropout,
            clip_len: 240.0,
            pause_eps: extract.pause_eps,
            max_gap: extract.max_gap,
            elbow_variant: extract.elbow_variant,
            n_bins: extract.n_bins,
            image_features: extract.image_features,
            facial_threshold_mode: ThresholdMode::Median,
            facial_threshold: 1.0,
            model: ModelKind::Logistic,
            batch_size: train.batch_size,
            dropout_rate: train.dropout_rate,
            patience: train.patience,
            max_epochs: train.max_epochs,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            svm_l2: TrainConfig::for_kind(ModelKind::LinearSvm).l2,
            activation: Activation::Sigmoid,
            split_mode: SplitMode::ClipLevel,
            split_ratio: 0.8,
            stratify: false,
            validation_fraction: 0.2,
            holdout: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn extract_config(&self) -> ExtractConfig {
        ExtractConfig {
            pause_eps: self.pause_eps,
            max_gap: self.max_gap,
            elbow_variant: self.elbow_variant,
            n_bins: self.n_bins,
            image_features: self.image_features,
        }
    }

    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig {
            jitter_sigma: self.jitter_sigma,
            face_dropout: self.face_dropout,
            joint_dropout: self.joint_dropout,
        }
    }

    pub fn profiles(&self) -> Result<ProfileSet> {
        match self.profile.as_str() {
            "default" | "hard" | "identical" => ProfileSet::preset(&self.profile),
            path => ProfileSet::load(Path::new(path)),
        }
    }

    /// Training settings for the configured model, seeded from the run seed.
    pub fn train_config(&self) -> TrainConfig {
        let mut cfg = TrainConfig::for_kind(self.model);
        cfg.adam = AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        };
        cfg.batch_size = self.batch_size;
        cfg.patience = self.patience;
        cfg.max_epochs = self.max_epochs;
        cfg.activation = self.activation;
        cfg.seed = derive_seed(self.seed, streams::TRAIN, 0);
        if self.model == ModelKind::Mlp80 {
            cfg.dropout_rate = self.dropout_rate;
        }
        if self.model == ModelKind::LinearSvm {
            cfg.l2 = self.svm_l2;
        }
        cfg
    }
}

/// Resolves the configured relative paths against one output directory.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub out: PathBuf,
    pub config: PipelineConfig,
}

impl Workspace {
    pub fn new(out: impl Into<PathBuf>, config: PipelineConfig) -> Self {
        Self {
            out: out.into(),
            config,
        }
    }

    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out.join(p)
        }
    }

    fn ensure_dir(&self, p: &Path) -> Result<PathBuf> {
        let dir = self.path(p);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingInput(path.to_path_buf()))
    }
}

/// Generates the cohort, one keypoint file per participant plus a manifest.
pub fn cmd_synth(ws: &Workspace) -> Result<Vec<PathBuf>> {
    let cfg = &ws.config;
    let profiles = cfg.profiles()?;
    let members = plan_cohort(cfg.n_participants, cfg.mci_fraction, cfg.seed, &profiles)?;
    let dir = ws.ensure_dir(&cfg.keypoints_dir)?;
    let noise = cfg.noise();
    let paths = members
        .par_iter()
        .map(|m| {
            let rec = m.generate(cfg.duration, cfg.fps, &noise)?;
            let path = dir.join(recording_file_name(&m.participant_id));
            write_keypoint_file(&path, &rec)?;
            Ok(path)
        })
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(&ws.out).map_err(|e| Error::io(&ws.out, e))?;
    write_manifest(&ws.path(&cfg.manifest_file), &members)?;
    info!("wrote {} recordings to {}", paths.len(), dir.display());
    Ok(paths)
}

/// Keypoint files of a directory in name order.
pub fn list_keypoint_files(dir: &Path) -> Result<Vec<PathBuf>> {
    require(dir)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Outcome of feature extraction over a directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOutcome {
    pub table: FeatureTable,
    /// Files that failed and were skipped, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

/// Segments every recording and extracts one feature record per clip.
/// With `keep_going`, unreadable files are reported and skipped.
pub fn cmd_extract(ws: &Workspace, input: Option<&Path>, keep_going: bool) -> Result<ExtractOutcome> {
    let cfg = &ws.config;
    let dir = input.map_or_else(|| ws.path(&cfg.keypoints_dir), Path::to_path_buf);
    let files = list_keypoint_files(&dir)?;
    if files.is_empty() {
        warn!("no keypoint files in {}", dir.display());
    }
    let ecfg = cfg.extract_config();
    let per_file: Vec<Result<Vec<_>>> = files
        .par_iter()
        .map(|path| {
            let rec = parse_keypoint_file(path)?;
            segment(&rec, cfg.clip_len)?
                .iter()
                .map(|clip| extract_clip(clip, &ecfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect();

    let mut table = FeatureTable {
        names: feature_names(&ecfg),
        records: Vec::new(),
    };
    let mut facial = Vec::new();
    let mut skipped = Vec::new();
    for (path, result) in files.iter().zip(per_file) {
        match result {
            Ok(items) => {
                for (record, desc) in items {
                    facial.push((record.clip_id.clone(), desc.facial));
                    table.records.push(record);
                }
            }
            Err(e) if keep_going => {
                warn!("skipping {}: {e}", path.display());
                skipped.push((path.clone(), e.to_string()));
            }
            Err(e) => return Err(Error::InvalidArgument(format!("{}: {e}", path.display()))),
        }
    }

    std::fs::create_dir_all(&ws.out).map_err(|e| Error::io(&ws.out, e))?;
    table.write_csv(&ws.path(&cfg.features_file))?;
    let vectors: Vec<_> = facial.iter().map(|(_, v)| *v).collect();
    let threshold = match cfg.facial_threshold_mode {
        ThresholdMode::Fixed => Some(cfg.facial_threshold),
        ThresholdMode::Median => median_d3(&vectors).filter(|t| *t > 0.0),
    };
    let mut rows = Vec::new();
    if let Some(t) = threshold {
        for (id, v) in facial {
            rows.push((id, v, classify_expression(&v, t)?));
        }
    } else if !vectors.is_empty() {
        warn!("no positive expression threshold available; facial labels not written");
    }
    write_facial_csv(&ws.path(&cfg.facial_file), &rows)?;
    info!("extracted {} clips from {} files", table.records.len(), files.len() - skipped.len());
    Ok(ExtractOutcome { table, skipped })
}

/// Split, validation hold-out and training on in-memory records.
pub fn train_records(names: &[String], records: &[FeatureRecord], cfg: &PipelineConfig) -> Result<(Model, TrainingLog, Split)> {
    let mut split = split_dataset(
        records,
        cfg.split_ratio,
        derive_seed(cfg.seed, streams::SPLIT, 0),
        cfg.split_mode,
        cfg.stratify,
        &cfg.holdout,
    )?;
    split.carve_validation(cfg.validation_fraction, derive_seed(cfg.seed, streams::VALIDATION, 0))?;
    let (train, _) = split.select(records);
    let val = split.select_validation(records);
    let (model, log) = Model::fit(cfg.model, names, &train, &val, &cfg.train_config())?;
    Ok((model, log, split))
}

/// Predictions for the test side of a split.
pub fn predict_test(model: &Model, records: &[FeatureRecord], split: &Split) -> Result<Vec<Prediction>> {
    let (_, test) = split.select(records);
    test.iter().map(|r| model.predict(r)).collect()
}

pub fn cmd_train(ws: &Workspace, features: Option<&Path>) -> Result<(Model, TrainingLog, Split)> {
    let cfg = &ws.config;
    let path = features.map_or_else(|| ws.path(&cfg.features_file), Path::to_path_buf);
    let table = FeatureTable::read_csv(&path)?;
    if cfg.split_mode == SplitMode::ClipLevel {
        warn!("clip_level split: clips of one participant may appear in both train and test; use participant_level to avoid this");
    }
    let (model, log, split) = train_records(&table.names, &table.records, cfg)?;
    info!("{}", split.describe());
    info!(
        "trained {} for {} epochs, best epoch {} (val loss {:.6})",
        cfg.model,
        log.epochs.len(),
        log.best_epoch,
        log.best_val_loss
    );
    std::fs::create_dir_all(&ws.out).map_err(|e| Error::io(&ws.out, e))?;
    model.save(&ws.path(&cfg.model_file))?;
    log.write_csv(&ws.path(&cfg.train_log_file))?;
    split.save(&ws.path(&cfg.split_file))?;
    Ok((model, log, split))
}

fn write_bundle(dir: &Path, report: &EvalReport) -> Result<()> {
    write_roc_csv(&dir.join("roc.csv"), &report.roc_points)?;
    write_svg(&dir.join("roc.svg"), &roc_svg(&report.roc_points, report.auc))?;
    write_svg(&dir.join("confusion.svg"), &confusion_svg(&report.metrics.confusion))?;
    write_participants_csv(&dir.join("participants.csv"), &report.participants)
}

pub fn cmd_eval(ws: &Workspace, features: Option<&Path>) -> Result<EvalReport> {
    let cfg = &ws.config;
    let features = features.map_or_else(|| ws.path(&cfg.features_file), Path::to_path_buf);
    let model_path = ws.path(&cfg.model_file);
    let split_path = ws.path(&cfg.split_file);
    require(&features)?;
    require(&model_path)?;
    require(&split_path)?;
    let table = FeatureTable::read_csv(&features)?;
    let model = Model::load(&model_path)?;
    let split = Split::load(&split_path)?;
    if split.mode == SplitMode::ClipLevel {
        warn!("evaluating a clip_level split; test clips may share participants with training clips");
    }
    let predictions = predict_test(&model, &table.records, &split)?;
    let report = evaluate(&predictions, &split.describe())?;
    if let Some(e) = &report.roc_error {
        warn!("{e}");
    }
    let dir = ws.ensure_dir(&cfg.eval_dir)?;
    report.save(&dir.join("eval.json"))?;
    write_predictions_csv(&dir.join("predictions.csv"), &predictions)?;
    write_bundle(&dir, &report)?;
    match report.auc {
        Some(auc) => info!("test accuracy {:.4}, AUC {:.4}", report.accuracy, auc),
        None => info!("test accuracy {:.4}", report.accuracy),
    }
    Ok(report)
}

/// Summary written by the report stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub n_clips: usize,
    pub participants: Vec<ParticipantDecision>,
    /// Present when every prediction carries ground truth.
    pub evaluation: Option<EvalReport>,
    pub training_curve: bool,
}

/// Participant table, plots and training curve from a predictions CSV.
pub fn cmd_report(ws: &Workspace, predictions: Option<&Path>) -> Result<ReportSummary> {
    let cfg = &ws.config;
    let pred_path = predictions.map_or_else(|| ws.path(&cfg.eval_dir).join("predictions.csv"), Path::to_path_buf);
    let preds = read_predictions_csv(&pred_path)?;
    let dir = ws.ensure_dir(&cfg.report_dir)?;
    let participants = aggregate_participants(&preds);
    write_participants_csv(&dir.join("participants.csv"), &participants)?;

    let evaluation = if !preds.is_empty() && preds.iter().all(|p| p.truth.is_some()) {
        let source = pred_path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        let report = evaluate(&preds, &format!("predictions from {source}"))?;
        write_bundle(&dir, &report)?;
        Some(report)
    } else {
        warn!("predictions lack ground truth; only participant decisions are reported");
        None
    };

    let log_path = ws.path(&cfg.train_log_file);
    let training_curve = log_path.exists();
    if training_curve {
        let dest = dir.join("training_curve.csv");
        std::fs::copy(&log_path, &dest).map_err(|e| Error::io(&dest, e))?;
    } else {
        warn!("no training log at {}; training curve omitted", log_path.display());
    }
    let summary = ReportSummary {
        n_clips: preds.len(),
        participants,
        evaluation,
        training_curve,
    };
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

/// Plot and CSV artefacts per clip. `filter` keeps only the clips whose id
/// or participant id equals it.
pub fn cmd_render(ws: &Workspace, input: Option<&Path>, filter: Option<&str>, width: usize, height: usize) -> Result<usize> {
    let cfg = &ws.config;
    let dir = input.map_or_else(|| ws.path(&cfg.keypoints_dir), Path::to_path_buf);
    let out = ws.ensure_dir(&cfg.render_dir)?;
    let mut count = 0;
    for path in list_keypoint_files(&dir)? {
        let rec = parse_keypoint_file(&path)?;
        for clip in segment(&rec, cfg.clip_len)? {
            if filter.is_some_and(|f| f != clip.participant_id && f != clip.clip_id) {
                continue;
            }
            let id = &clip.clip_id;
            stacked_clip_image(&clip, cfg.max_gap, width, height)?.write_png(&out.join(format!("{id}_stacked.png")))?;
            for side in [Side::Left, Side::Right] {
                let s = side.as_str();
                let traj = wrist_trajectory(&clip, side, cfg.max_gap);
                traj.write_csv(&out.join(format!("{id}_{s}_wrist.csv")))?;
                write_svg(&out.join(format!("{id}_{s}_wrist.svg")), &render_trajectory_svg(&traj, width, height))?;
                let dist = elbow_distribution(&elbow_distances(&clip, side, cfg.elbow_variant)?, cfg.n_bins)?;
                write_histogram_csv(&out.join(format!("{id}_{s}_elbow_hist.csv")), &dist)?;
                write_qq_csv(&out.join(format!("{id}_{s}_elbow_qq.csv")), &dist)?;
            }
            count += 1;
        }
    }
    info!("rendered {count} clips into {}", out.display());
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = PipelineConfig::from_toml("model = \"mlp80\"\nclip_len = 60.0\nholdout = [\"3\"]\n").unwrap();
        assert_eq!(cfg.model, ModelKind::Mlp80);
        assert_eq!(cfg.clip_len, 60.0);
        assert_eq!(cfg.holdout, vec!["3".to_string()]);
        assert_eq!(cfg.patience, 15);
        assert!(PipelineConfig::from_toml("no_such_key = 1\n").is_err());
    }

    #[test]
    fn train_config_follows_model_kind() {
        let mut cfg = PipelineConfig::default();
        assert_eq!(cfg.train_config().dropout_rate, 0.0);
        cfg.model = ModelKind::Mlp80;
        assert_eq!(cfg.train_config().dropout_rate, 0.4);
        cfg.model = ModelKind::LinearSvm;
        assert_eq!(cfg.train_config().l2, 0.01);
    }

    #[test]
    fn missing_upstream_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path(), PipelineConfig::default());
        let err = cmd_eval(&ws, None).unwrap_err();
        assert!(err.to_string().contains("features.csv"), "{err}");
        let err = cmd_train(&ws, None).unwrap_err();
        assert!(matches!(err, Error::MissingInput(_)));
    }
}
