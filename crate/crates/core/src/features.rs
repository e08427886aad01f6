//! Per-clip feature assembly and the features CSV.
//!
//! Assembly order (every record in a table shares it):
//!
//! 1. envelope statistics, left then right hand: `x_amplitude, y_amplitude,
//!    mean_speed_x, mean_speed_y, pause_fraction`
//! 2. speed statistics, left then right: `mean_speed, std_speed`
//! 3. facial activity: `d1, d2, d3`
//! 4. elbow histogram features, left then right: `bin_0 .. bin_{n-1}, std, skewness`
//! 5. optionally, a 32x32 grayscale thumbnail of the stacked trajectory image

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elbow::{elbow_distances, elbow_distribution, histogram_features, ElbowDistribution, ElbowVariant, DEFAULT_BINS};
use crate::error::{Error, Result};
use crate::facial::{facial_activity, FacialActivityVector};
use crate::keypoints::{interpolate_gaps, Clip, Label, Side};
use crate::trajectory::{
    envelope_stats, render_trajectory_plot, resize_bilinear, speed_stats, stack_images, wrist_trajectory, EnvelopeStats,
    SpeedStats, DEFAULT_PAUSE_EPS,
};

pub const DEFAULT_MAX_GAP: usize = 5;
pub const IMAGE_FEATURE_SIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub pause_eps: f64,
    pub max_gap: usize,
    pub elbow_variant: ElbowVariant,
    pub n_bins: usize,
    pub image_features: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            pause_eps: DEFAULT_PAUSE_EPS,
            max_gap: DEFAULT_MAX_GAP,
            elbow_variant: ElbowVariant::Euclidean,
            n_bins: DEFAULT_BINS,
            image_features: false,
        }
    }
}

pub fn feature_names(cfg: &ExtractConfig) -> Vec<String> {
    let mut names = Vec::new();
    for side in ["left", "right"] {
        for f in ["x_amplitude", "y_amplitude", "mean_speed_x", "mean_speed_y", "pause_fraction"] {
            names.push(format!("{side}_{f}"));
        }
    }
    for side in ["left", "right"] {
        names.push(format!("{side}_mean_speed"));
        names.push(format!("{side}_std_speed"));
    }
    names.extend(["d1", "d2", "d3"].map(String::from));
    for side in ["left", "right"] {
        for b in 0..cfg.n_bins {
            names.push(format!("{side}_elbow_bin_{b}"));
        }
        names.push(format!("{side}_elbow_std"));
        names.push(format!("{side}_elbow_skewness"));
    }
    if cfg.image_features {
        for i in 0..IMAGE_FEATURE_SIDE * IMAGE_FEATURE_SIDE {
            names.push(format!("pixel_{i}"));
        }
    }
    names
}

/// One clip's assembled feature vector paired with its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub clip_id: String,
    pub participant_id: String,
    pub label: Option<Label>,
    pub features: Vec<f64>,
}

/// Intermediate descriptors of one clip, before flattening.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipDescriptors {
    pub envelope: [EnvelopeStats; 2],
    pub speed: [SpeedStats; 2],
    pub facial: FacialActivityVector,
    pub elbow: [ElbowDistribution; 2],
}

pub fn describe_clip(clip: &Clip, cfg: &ExtractConfig) -> Result<ClipDescriptors> {
    let filled = Clip {
        pose: interpolate_gaps(&clip.pose, cfg.max_gap),
        ..clip.clone()
    };
    let hand = |side: Side| -> Result<(EnvelopeStats, SpeedStats)> {
        let traj = wrist_trajectory(&filled, side, cfg.max_gap);
        Ok((envelope_stats(&traj, cfg.pause_eps)?, speed_stats(&traj)?))
    };
    let (env_l, speed_l) = hand(Side::Left)?;
    let (env_r, speed_r) = hand(Side::Right)?;
    let elbow = |side: Side| elbow_distribution(&elbow_distances(&filled, side, cfg.elbow_variant)?, cfg.n_bins);
    Ok(ClipDescriptors {
        envelope: [env_l, env_r],
        speed: [speed_l, speed_r],
        facial: facial_activity(&clip.face)?,
        elbow: [elbow(Side::Left)?, elbow(Side::Right)?],
    })
}

fn image_features(clip: &Clip, cfg: &ExtractConfig) -> Result<Vec<f64>> {
    // render at 2x the thumbnail size so the 2-pixel strokes survive the resize
    let (w, h) = (2 * IMAGE_FEATURE_SIDE, IMAGE_FEATURE_SIDE);
    let left = render_trajectory_plot(&wrist_trajectory(clip, Side::Left, cfg.max_gap), w, h)?;
    let right = render_trajectory_plot(&wrist_trajectory(clip, Side::Right, cfg.max_gap), w, h)?;
    let stacked = stack_images(&left, &right)?;
    Ok(resize_bilinear(&stacked, IMAGE_FEATURE_SIDE, IMAGE_FEATURE_SIDE).to_grayscale())
}

pub fn assemble(d: &ClipDescriptors) -> Vec<f64> {
    let mut v = Vec::new();
    for e in &d.envelope {
        v.extend([e.x_amplitude, e.y_amplitude, e.mean_speed_x, e.mean_speed_y, e.pause_fraction]);
    }
    for s in &d.speed {
        v.extend([s.mean_speed, s.std_speed]);
    }
    v.extend(d.facial.as_array());
    for e in &d.elbow {
        v.extend(histogram_features(e));
    }
    v
}

pub fn extract_clip(clip: &Clip, cfg: &ExtractConfig) -> Result<(FeatureRecord, ClipDescriptors)> {
    let descriptors = describe_clip(clip, cfg)?;
    let mut features = assemble(&descriptors);
    if cfg.image_features {
        features.extend(image_features(clip, cfg)?);
    }
    let record = FeatureRecord {
        clip_id: clip.clip_id.clone(),
        participant_id: clip.participant_id.clone(),
        label: clip.label,
        features,
    };
    Ok((record, descriptors))
}

/// Named feature columns plus records, the on-disk features file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub records: Vec<FeatureRecord>,
}

const FIXED_COLUMNS: [&str; 3] = ["clip_id", "participant_id", "label"];

impl FeatureTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let header: Vec<&str> = FIXED_COLUMNS.iter().copied().chain(self.names.iter().map(String::as_str)).collect();
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.clip_id.clone(),
                r.participant_id.clone(),
                r.label.map(|l| l.code().to_string()).unwrap_or_default(),
            ];
            row.extend(r.features.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let mut rdr = csv::Reader::from_path(path)?;
        let header = rdr.headers()?.clone();
        if header.len() < 3 || header.iter().take(3).ne(FIXED_COLUMNS) {
            return Err(Error::Schema {
                field: "header".into(),
                message: format!("features file must start with {}", FIXED_COLUMNS.join(",")),
            });
        }
        let names: Vec<String> = header.iter().skip(3).map(String::from).collect();
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let label = match &row[2] {
                "" => None,
                s => Some(
                    s.parse::<u8>()
                        .ok()
                        .and_then(Label::from_code)
                        .ok_or_else(|| Error::Schema {
                            field: format!("row {i} label"),
                            message: format!("expected 0, 1 or empty, got {s:?}"),
                        })?,
                ),
            };
            let features = row
                .iter()
                .skip(3)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Schema {
                        field: format!("row {i}"),
                        message: format!("not a number: {v:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            records.push(FeatureRecord {
                clip_id: row[0].to_string(),
                participant_id: row[1].to_string(),
                label,
                features,
            });
        }
        Ok(Self { names, records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_documented_layout() {
        let cfg = ExtractConfig::default();
        let names = feature_names(&cfg);
        assert_eq!(names.len(), 10 + 4 + 3 + 2 * (20 + 2));
        assert_eq!(names[0], "left_x_amplitude");
        assert_eq!(names[14], "d1");
        assert_eq!(names.last().unwrap(), "right_elbow_skewness");
        let with_img = feature_names(&ExtractConfig { image_features: true, ..cfg });
        assert_eq!(with_img.len(), names.len() + 1024);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let table = FeatureTable {
            names: vec!["a".into(), "b".into()],
            records: vec![
                FeatureRecord {
                    clip_id: "1_1".into(),
                    participant_id: "1".into(),
                    label: Some(Label::Mci),
                    features: vec![0.1 + 0.2, -1e-300],
                },
                FeatureRecord {
                    clip_id: "2_1".into(),
                    participant_id: "2".into(),
                    label: None,
                    features: vec![1.0 / 3.0, 12345.678],
                },
            ],
        };
        table.write_csv(&path).unwrap();
        assert_eq!(FeatureTable::read_csv(&path).unwrap(), table);
    }
}
