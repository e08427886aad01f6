//! Train/test splitting, screening metrics and participant-level aggregation.
//!
//! ROC curves treat MCI as the positive class and rank clips by `p_mci`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::Prediction;
use crate::error::{Error, Result};
use crate::features::FeatureRecord;
use crate::keypoints::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Shuffle clips; one participant may land on both sides.
    #[default]
    ClipLevel,
    /// Shuffle participants and keep each participant's clips together.
    ParticipantLevel,
}

impl std::str::FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clip_level" | "clip" => Ok(SplitMode::ClipLevel),
            "participant_level" | "participant" => Ok(SplitMode::ParticipantLevel),
            other => Err(Error::InvalidArgument(format!("unknown split mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for SplitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitMode::ClipLevel => "clip_level",
            SplitMode::ParticipantLevel => "participant_level",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub mode: SplitMode,
    pub ratio: f64,
    pub seed: u64,
    pub stratified: bool,
    pub train: Vec<String>,
    pub test: Vec<String>,
    /// Training clips set aside for early stopping.
    #[serde(default)]
    pub validation: Vec<String>,
    /// Participants excluded from both sides.
    pub holdout: Vec<String>,
}

impl Split {
    pub fn describe(&self) -> String {
        format!(
            "{} split, ratio {}, seed {}{}: {} train / {} validation / {} test clips, {} held-out participants",
            self.mode,
            self.ratio,
            self.seed,
            if self.stratified { ", stratified" } else { "" },
            self.train.len(),
            self.validation.len(),
            self.test.len(),
            self.holdout.len()
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Records on each side, in split order.
    pub fn select<'a>(&self, records: &'a [FeatureRecord]) -> (Vec<&'a FeatureRecord>, Vec<&'a FeatureRecord>) {
        (pick(records, &self.train), pick(records, &self.test))
    }

    pub fn select_validation<'a>(&self, records: &'a [FeatureRecord]) -> Vec<&'a FeatureRecord> {
        pick(records, &self.validation)
    }

    /// Move a seeded `floor(fraction * n_train)` of the training clips (at
    /// least one) into the validation set.
    pub fn carve_validation(&mut self, fraction: f64, seed: u64) -> Result<()> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidArgument(format!("validation fraction must be in (0, 1), got {fraction}")));
        }
        self.train.append(&mut self.validation);
        let n_val = ((fraction * self.train.len() as f64).floor() as usize).max(1);
        if n_val >= self.train.len() {
            return Err(Error::InvalidArgument(format!(
                "{} training clips are too few to hold out a validation set",
                self.train.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.train.shuffle(&mut rng);
        self.validation = self.train.split_off(self.train.len() - n_val);
        Ok(())
    }
}

fn pick<'a>(records: &'a [FeatureRecord], ids: &[String]) -> Vec<&'a FeatureRecord> {
    let by_id: HashMap<&str, &FeatureRecord> = records.iter().map(|r| (r.clip_id.as_str(), r)).collect();
    ids.iter().filter_map(|id| by_id.get(id.as_str()).copied()).collect()
}

fn partition<T: Clone>(groups: Vec<Vec<T>>, ratio: f64) -> (Vec<T>, Vec<T>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for g in groups {
        let n_first = (ratio * g.len() as f64).floor() as usize;
        a.extend_from_slice(&g[..n_first]);
        b.extend_from_slice(&g[n_first..]);
    }
    (a, b)
}

/// Seeded random train/test partition with `floor(ratio * n)` items on the
/// training side. With `stratify` the rule is applied per class.
pub fn split_dataset(
    records: &[FeatureRecord],
    ratio: f64,
    seed: u64,
    mode: SplitMode,
    stratify: bool,
    holdout: &[String],
) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    let held: HashSet<&str> = holdout.iter().map(String::as_str).collect();
    let pool: Vec<&FeatureRecord> = records.iter().filter(|r| !held.contains(r.participant_id.as_str())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class_of = |l: Option<Label>| l.map_or(2, |l| l.code() as usize);

    let (train, test) = match mode {
        SplitMode::ClipLevel => {
            let mut groups: Vec<Vec<String>> = if stratify { vec![Vec::new(); 3] } else { vec![Vec::new()] };
            for r in &pool {
                let g = if stratify { class_of(r.label) } else { 0 };
                groups[g].push(r.clip_id.clone());
            }
            groups.iter_mut().for_each(|g| g.shuffle(&mut rng));
            partition(groups, ratio)
        }
        SplitMode::ParticipantLevel => {
            let mut order: Vec<&str> = Vec::new();
            let mut clips: HashMap<&str, Vec<String>> = HashMap::new();
            let mut label: HashMap<&str, Option<Label>> = HashMap::new();
            for r in &pool {
                let p = r.participant_id.as_str();
                if !clips.contains_key(p) {
                    order.push(p);
                    label.insert(p, r.label);
                }
                clips.entry(p).or_default().push(r.clip_id.clone());
            }
            let mut groups: Vec<Vec<&str>> = if stratify { vec![Vec::new(); 3] } else { vec![Vec::new()] };
            for p in order {
                let g = if stratify { class_of(label[p]) } else { 0 };
                groups[g].push(p);
            }
            groups.iter_mut().for_each(|g| g.shuffle(&mut rng));
            let (tp, sp) = partition(groups, ratio);
            let expand = |ps: Vec<&str>| ps.into_iter().flat_map(|p| clips[p].clone()).collect::<Vec<_>>();
            (expand(tp), expand(sp))
        }
    };
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "too few items to populate both sides of the split ({} train, {} test)",
            train.len(),
            test.len()
        )));
    }
    Ok(Split {
        mode,
        ratio,
        seed,
        stratified: stratify,
        train,
        test,
        validation: Vec::new(),
        holdout: holdout.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// (false positive rate, true positive rate), from (0,0) to (1,1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC over the distinct values of `p_mci`, with trapezoidal AUC. Tied scores
/// form one diagonal segment, so the area equals the Mann-Whitney statistic
/// with ties counted as one half.
pub fn roc_auc(p_mci: &[f64], truth: &[Label]) -> Result<RocCurve> {
    if p_mci.len() != truth.len() {
        return Err(Error::Dimension {
            expected: truth.len(),
            got: p_mci.len(),
        });
    }
    if p_mci.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let n_pos = truth.iter().filter(|&&l| l == Label::Mci).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::RocUndefined);
    }
    let mut order: Vec<usize> = (0..p_mci.len()).collect();
    order.sort_by(|&a, &b| p_mci[b].total_cmp(&p_mci[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let score = p_mci[order[i]];
        while i < order.len() && p_mci[order[i]] == score {
            if truth[order[i]] == Label::Mci {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (fpr, tpr) = (fp as f64 / n_neg as f64, tp as f64 / n_pos as f64);
        let (px, py) = *points.last().unwrap();
        auc += (fpr - px) * (tpr + py) / 2.0;
        points.push((fpr, tpr));
    }
    Ok(RocCurve { points, auc })
}

/// 2x2 counts indexed `[truth][predicted]` by class code (0 = MCI).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 2]; 2],
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        self.counts[0][0] + self.counts[1][1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True when the class never occurs in truth or predictions, so F1 is
    /// undefined and reported as 0.
    pub undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub mci: ClassScore,
    pub healthy: ClassScore,
}

fn class_score(c: &ConfusionMatrix, k: usize) -> ClassScore {
    let tp = c.counts[k][k] as f64;
    let fp = c.counts[1 - k][k] as f64;
    let fn_ = c.counts[k][1 - k] as f64;
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let undefined = tp + fp + fn_ == 0.0;
    ClassScore {
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        f1: ratio(2.0 * tp, 2.0 * tp + fp + fn_),
        undefined,
    }
}

pub fn confusion_and_f1(predicted: &[Label], truth: &[Label]) -> Result<ClassificationMetrics> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::Insufficient("predictions"));
    }
    let mut confusion = ConfusionMatrix::default();
    for (p, t) in predicted.iter().zip(truth) {
        confusion.counts[t.code() as usize][p.code() as usize] += 1;
    }
    Ok(ClassificationMetrics {
        accuracy: confusion.trace() as f64 / confusion.total() as f64,
        mci: class_score(&confusion, 0),
        healthy: class_score(&confusion, 1),
        confusion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantDecision {
    pub participant_id: String,
    pub n_sub_cases: usize,
    pub mean_p_mci: f64,
    pub mean_p_healthy: f64,
    pub decision: Label,
    /// Shared ground truth of the sub-cases, when known and consistent.
    pub truth: Option<Label>,
}

/// Average both confidences over each participant's sub-cases and take the
/// larger mean; an exact tie goes to Healthy. Participants appear in order of
/// first occurrence.
pub fn aggregate_participants(predictions: &[Prediction]) -> Vec<ParticipantDecision> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&Prediction>> = HashMap::new();
    for p in predictions {
        let id = p.participant_id.as_str();
        groups
            .entry(id)
            .or_insert_with(|| {
                order.push(id);
                Vec::new()
            })
            .push(p);
    }
    order
        .into_iter()
        .map(|id| {
            let subs = &groups[id];
            let n = subs.len() as f64;
            let mean_p_mci = subs.iter().map(|p| p.p_mci).sum::<f64>() / n;
            let mean_p_healthy = subs.iter().map(|p| p.p_healthy).sum::<f64>() / n;
            let truth = subs[0].truth.filter(|t| subs.iter().all(|p| p.truth == Some(*t)));
            ParticipantDecision {
                participant_id: id.to_string(),
                n_sub_cases: subs.len(),
                mean_p_mci,
                mean_p_healthy,
                decision: if mean_p_healthy >= mean_p_mci { Label::Healthy } else { Label::Mci },
                truth,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub split: String,
    pub n_clips: usize,
    pub accuracy: f64,
    pub roc_points: Vec<(f64, f64)>,
    pub auc: Option<f64>,
    /// Why the ROC could not be computed, if it could not.
    pub roc_error: Option<String>,
    pub metrics: ClassificationMetrics,
    pub participants: Vec<ParticipantDecision>,
    pub participant_accuracy: Option<f64>,
    pub predictions: Vec<Prediction>,
}

/// Metrics over predictions that all carry ground truth. A single-class set
/// still yields accuracy, confusion and F1, with the ROC error recorded.
pub fn evaluate(predictions: &[Prediction], split: &str) -> Result<EvalReport> {
    let truth: Vec<Label> = predictions
        .iter()
        .map(|p| p.truth.ok_or_else(|| Error::InvalidArgument(format!("clip {} has no ground truth", p.clip_id))))
        .collect::<Result<_>>()?;
    let predicted: Vec<Label> = predictions.iter().map(|p| p.label).collect();
    let metrics = confusion_and_f1(&predicted, &truth)?;
    let scores: Vec<f64> = predictions.iter().map(|p| p.p_mci).collect();
    let (roc_points, auc, roc_error) = match roc_auc(&scores, &truth) {
        Ok(c) => (c.points, Some(c.auc), None),
        Err(e @ Error::RocUndefined) => (Vec::new(), None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let participants = aggregate_participants(predictions);
    let judged: Vec<&ParticipantDecision> = participants.iter().filter(|p| p.truth.is_some()).collect();
    let participant_accuracy = (!judged.is_empty())
        .then(|| judged.iter().filter(|p| p.truth == Some(p.decision)).count() as f64 / judged.len() as f64);
    Ok(EvalReport {
        split: split.to_string(),
        n_clips: predictions.len(),
        accuracy: metrics.accuracy,
        roc_points,
        auc,
        roc_error,
        metrics,
        participants,
        participant_accuracy,
        predictions: predictions.to_vec(),
    })
}

impl EvalReport {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct PredictionRow {
    clip_id: String,
    participant_id: String,
    p_mci: f64,
    p_healthy: f64,
    #[serde(default)]
    predicted: Option<String>,
    #[serde(default)]
    truth: Option<String>,
}

fn parse_label(s: &str) -> Option<Label> {
    match s.trim().to_ascii_lowercase().as_str() {
        "0" | "mci" => Some(Label::Mci),
        "1" | "healthy" | "health" => Some(Label::Healthy),
        _ => None,
    }
}

pub fn write_predictions_csv(path: &Path, predictions: &[Prediction]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in predictions {
        w.serialize(PredictionRow {
            clip_id: p.clip_id.clone(),
            participant_id: p.participant_id.clone(),
            p_mci: p.p_mci,
            p_healthy: p.p_healthy,
            predicted: Some(p.label.to_string()),
            truth: p.truth.map(|t| t.to_string()),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads `clip_id, participant_id, p_mci, p_healthy` plus an optional `truth`
/// column (`MCI`/`Healthy` or `0`/`1`). Any `predicted` column is recomputed.
pub fn read_predictions_csv(path: &Path) -> Result<Vec<Prediction>> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: PredictionRow = row?;
        let truth = row.truth.as_deref().filter(|s| !s.trim().is_empty()).map(|s| {
            parse_label(s).ok_or_else(|| Error::Schema {
                field: format!("truth of {}", row.clip_id),
                message: format!("unrecognised label {s:?}"),
            })
        });
        let truth = truth.transpose()?;
        out.push(Prediction::from_pair(&row.clip_id, &row.participant_id, row.p_mci, row.p_healthy, truth));
    }
    Ok(out)
}

pub fn write_participants_csv(path: &Path, decisions: &[ParticipantDecision]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["participant_id", "n_sub_cases", "mean_p_mci", "mean_p_healthy", "decision", "truth"])?;
    for d in decisions {
        w.write_record([
            d.participant_id.clone(),
            d.n_sub_cases.to_string(),
            d.mean_p_mci.to_string(),
            d.mean_p_healthy.to_string(),
            d.decision.to_string(),
            d.truth.map(|t| t.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_roc_csv(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["fpr", "tpr"])?;
    for (x, y) in points {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn roc_svg(points: &[(f64, f64)], auc: Option<f64>) -> String {
    let (size, pad) = (400.0, 40.0);
    let span = size - 2.0 * pad;
    let map = |(x, y): (f64, f64)| format!("{:.2},{:.2}", pad + x * span, size - pad - y * span);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <rect x=\"{pad}\" y=\"{pad}\" width=\"{span}\" height=\"{span}\" fill=\"none\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{pad}\" stroke=\"grey\" stroke-dasharray=\"4 4\"/>\n",
        size - pad,
        size - pad
    );
    if !points.is_empty() {
        let pts: Vec<String> = points.iter().copied().map(map).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"rgb(31,119,180)\" stroke-width=\"2\" points=\"{}\"/>", pts.join(" "));
    }
    let title = auc.map_or("ROC undefined".to_string(), |a| format!("ROC (MCI positive), AUC = {a:.4}"));
    let _ = writeln!(s, "<text x=\"{pad}\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">false positive rate</text>", size / 2.0, size - 10.0);
    let _ = writeln!(s, "<text x=\"12\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">true positive rate</text>", size / 2.0, size / 2.0);
    s.push_str("</svg>\n");
    s
}

/// Heat grid of the confusion matrix, rows = truth, columns = prediction.
pub fn confusion_svg(c: &ConfusionMatrix) -> String {
    let cell = 120.0;
    let (ox, oy) = (110.0, 60.0);
    let max = c.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        w = ox + 2.0 * cell + 20.0,
        h = oy + 2.0 * cell + 40.0
    );
    let names = [Label::Mci, Label::Healthy];
    for (t, tl) in names.iter().enumerate() {
        for (p, pl) in names.iter().enumerate() {
            let n = c.counts[t][p];
            let shade = (255.0 - 200.0 * n as f64 / max).round() as u8;
            let (x, y) = (ox + p as f64 * cell, oy + t as f64 * cell);
            let _ = writeln!(s, "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({shade},{shade},255)\" stroke=\"black\"/>");
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"20\" text-anchor=\"middle\">{n}</text>", x + cell / 2.0, y + cell / 2.0 + 7.0);
            if t == 0 {
                let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">pred {pl}</text>", x + cell / 2.0, oy - 10.0);
            }
        }
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"end\">true {tl}</text>", ox - 8.0, oy + t as f64 * cell + cell / 2.0 + 5.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Ground-truth label per participant, for participant-level bookkeeping.
pub fn participant_labels(records: &[FeatureRecord]) -> BTreeMap<String, Option<Label>> {
    let mut out = BTreeMap::new();
    for r in records {
        out.entry(r.participant_id.clone()).or_insert(r.label);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(n: usize, per_participant: usize) -> Vec<FeatureRecord> {
        (0..n)
            .map(|i| FeatureRecord {
                clip_id: format!("{}_{}", i / per_participant + 1, i % per_participant + 1),
                participant_id: format!("{}", i / per_participant + 1),
                label: Some(if (i / per_participant) % 2 == 0 { Label::Mci } else { Label::Healthy }),
                features: vec![],
            })
            .collect()
    }

    #[test]
    fn split_sizes_for_162_clips() {
        let s = split_dataset(&records(162, 4), 0.8, 1, SplitMode::ClipLevel, false, &[]).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (129, 33));
        let s = split_dataset(&records(2, 1), 0.5, 1, SplitMode::ClipLevel, false, &[]).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1, 1));
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let recs = records(50, 5);
        let a = split_dataset(&recs, 0.8, 9, SplitMode::ClipLevel, false, &[]).unwrap();
        let b = split_dataset(&recs, 0.8, 9, SplitMode::ClipLevel, false, &[]).unwrap();
        assert_eq!(a, b);
        let train: HashSet<_> = a.train.iter().collect();
        assert!(a.test.iter().all(|c| !train.contains(c)));
    }

    #[test]
    fn split_errors() {
        assert!(split_dataset(&records(1, 1), 0.5, 0, SplitMode::ClipLevel, false, &[]).is_err());
        assert!(split_dataset(&records(10, 1), 1.0, 0, SplitMode::ClipLevel, false, &[]).is_err());
        assert!(split_dataset(&records(10, 1), 0.0, 0, SplitMode::ClipLevel, false, &[]).is_err());
    }

    #[test]
    fn holdout_participants_are_excluded() {
        let recs = records(40, 4);
        let hold = vec!["3".to_string(), "7".to_string()];
        let s = split_dataset(&recs, 0.8, 2, SplitMode::ParticipantLevel, false, &hold).unwrap();
        assert!(s.train.iter().chain(&s.test).all(|c| !c.starts_with("3_") && !c.starts_with("7_")));
        assert_eq!(s.train.len() + s.test.len(), 32);
    }

    #[test]
    fn stratified_split_keeps_class_ratio() {
        let recs = records(40, 1);
        let s = split_dataset(&recs, 0.5, 4, SplitMode::ClipLevel, true, &[]).unwrap();
        let (train, _) = s.select(&recs);
        assert_eq!(train.iter().filter(|r| r.label == Some(Label::Mci)).count(), 10);
    }

    #[test]
    fn roc_examples() {
        use Label::*;
        let c = roc_auc(&[0.9, 0.8, 0.3, 0.1], &[Mci, Mci, Healthy, Healthy]).unwrap();
        assert_eq!(c.auc, 1.0);
        assert_eq!(c.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(c.points.last(), Some(&(1.0, 1.0)));
        let c = roc_auc(&[0.4; 6], &[Mci, Healthy, Mci, Healthy, Healthy, Mci]).unwrap();
        assert_eq!(c.auc, 0.5);
        assert!(matches!(roc_auc(&[0.1, 0.2], &[Mci, Mci]), Err(Error::RocUndefined)));
    }

    #[test]
    fn confusion_examples() {
        use Label::*;
        let m = confusion_and_f1(&[Mci, Healthy, Healthy], &[Mci, Healthy, Healthy]).unwrap();
        assert_eq!(m.confusion.counts, [[1, 0], [0, 2]]);
        assert_eq!((m.mci.f1, m.healthy.f1, m.accuracy), (1.0, 1.0, 1.0));

        let m = confusion_and_f1(&[Healthy; 4], &[Mci, Mci, Healthy, Healthy]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.mci.f1, 0.0);
        assert!(!m.mci.undefined);

        let m = confusion_and_f1(&[Healthy; 3], &[Healthy; 3]).unwrap();
        assert!(m.mci.undefined && m.mci.f1 == 0.0);
        assert!(confusion_and_f1(&[], &[]).is_err());
    }

    #[test]
    fn single_sub_case_decides_itself() {
        let p = Prediction::from_pair("9_1", "9", 0.2, 0.8, None);
        let d = aggregate_participants(&[p]);
        assert_eq!(d[0].decision, Label::Healthy);
        assert_eq!(d[0].n_sub_cases, 1);
    }

    #[test]
    fn single_class_eval_reports_roc_error() {
        let preds = vec![
            Prediction::from_p_healthy("1_1", "1", 0.7, Some(Label::Healthy)),
            Prediction::from_p_healthy("1_2", "1", 0.3, Some(Label::Healthy)),
        ];
        let r = evaluate(&preds, "test").unwrap();
        assert!(r.auc.is_none() && r.roc_error.is_some());
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.participant_accuracy, Some(1.0));
    }

    #[test]
    fn predictions_csv_accepts_minimal_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "clip_id,participant_id,p_mci,p_healthy\n1_1,1,0.63,0.37\n").unwrap();
        let p = read_predictions_csv(&path).unwrap();
        assert_eq!(p[0].label, Label::Mci);
        assert_eq!(p[0].truth, None);

        let out = dir.path().join("q.csv");
        write_predictions_csv(&out, &p).unwrap();
        assert_eq!(read_predictions_csv(&out).unwrap(), p);
    }
}
