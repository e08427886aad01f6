//! Facial activity vector `[d1, d2, d3]`: mean absolute frame-to-frame change
//! of the nose/right-brow, nose/left-brow and inner-lip distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keypoints::{FaceFrame, Point};

// 0-based indices into the 68-point layout (1-based 34, 18-22, 23-27, 63, 67).
const NOSE_TIP: usize = 33;
const RIGHT_BROW: std::ops::RangeInclusive<usize> = 17..=21;
const LEFT_BROW: std::ops::RangeInclusive<usize> = 22..=26;
const UPPER_INNER_LIP: usize = 62;
const LOWER_INNER_LIP: usize = 66;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandmarkDistances {
    pub nose_right_brow: f64,
    pub nose_left_brow: f64,
    pub lip_opening: f64,
}

impl LandmarkDistances {
    fn as_array(&self) -> [f64; 3] {
        [self.nose_right_brow, self.nose_left_brow, self.lip_opening]
    }
}

fn centroid(points: &[Point]) -> Point {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

pub fn landmark_distances(frame: &FaceFrame) -> Result<LandmarkDistances> {
    let pts = frame.landmarks.as_deref().ok_or(Error::NoLandmarks)?;
    if pts.len() != crate::keypoints::LANDMARK_COUNT {
        return Err(Error::Dimension {
            expected: crate::keypoints::LANDMARK_COUNT,
            got: pts.len(),
        });
    }
    let nose = pts[NOSE_TIP];
    Ok(LandmarkDistances {
        nose_right_brow: nose.distance(&centroid(&pts[RIGHT_BROW])),
        nose_left_brow: nose.distance(&centroid(&pts[LEFT_BROW])),
        lip_opening: pts[UPPER_INNER_LIP].distance(&pts[LOWER_INNER_LIP]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacialActivityVector {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    /// Number of frames with detected landmarks.
    pub frames_used: usize,
}

impl FacialActivityVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.d1, self.d2, self.d3]
    }
}

/// Average the absolute change of each distance over consecutive pairs of
/// detected frames. An undetected frame breaks the chain, so no difference is
/// taken across a detection gap. The divisor is the number of pairs.
pub fn facial_activity(seq: &[FaceFrame]) -> Result<FacialActivityVector> {
    let mut sums = [0.0; 3];
    let mut pairs = 0usize;
    let mut frames_used = 0usize;
    let mut prev: Option<[f64; 3]> = None;
    for frame in seq {
        if !frame.is_detected() {
            prev = None;
            continue;
        }
        let r = landmark_distances(frame)?.as_array();
        frames_used += 1;
        if let Some(p) = prev {
            for k in 0..3 {
                sums[k] += (r[k] - p[k]).abs();
            }
            pairs += 1;
        }
        prev = Some(r);
    }
    if frames_used < 2 || pairs == 0 {
        return Err(Error::Insufficient("facial data"));
    }
    let n = pairs as f64;
    Ok(FacialActivityVector {
        d1: sums[0] / n,
        d2: sums[1] / n,
        d3: sums[2] / n,
        frames_used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expression {
    Active,
    NonActive,
}

impl Expression {
    pub fn as_str(self) -> &'static str {
        match self {
            Expression::Active => "active",
            Expression::NonActive => "non_active",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpressionLabel {
    pub label: Expression,
    pub threshold_used: f64,
}

/// Active iff `d3 >= threshold`.
pub fn classify_expression(v: &FacialActivityVector, threshold: f64) -> Result<ExpressionLabel> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("expression threshold must be positive, got {threshold}")));
    }
    let label = if v.d3 >= threshold { Expression::Active } else { Expression::NonActive };
    Ok(ExpressionLabel {
        label,
        threshold_used: threshold,
    })
}

/// Median `d3` over a cohort, the default expression threshold.
pub fn median_d3(vectors: &[FacialActivityVector]) -> Option<f64> {
    let mut d3: Vec<f64> = vectors.iter().map(|v| v.d3).collect();
    if d3.is_empty() {
        return None;
    }
    d3.sort_by(f64::total_cmp);
    let n = d3.len();
    Some(if n % 2 == 1 { d3[n / 2] } else { 0.5 * (d3[n / 2 - 1] + d3[n / 2]) })
}

pub fn write_facial_csv(path: &std::path::Path, rows: &[(String, FacialActivityVector, ExpressionLabel)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["clip_id", "d1", "d2", "d3", "label"])?;
    for (clip_id, v, label) in rows {
        w.write_record([
            clip_id.clone(),
            v.d1.to_string(),
            v.d2.to_string(),
            v.d3.to_string(),
            label.label.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
