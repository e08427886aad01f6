//! Elbow distance descriptor and its mean-centred distribution.
//!
//! Each usable frame gives one neck/elbow distance. Distances are re-centred on
//! their mean (the resting position of the elbow), so negative values mean the
//! elbow is closer to the body than at rest. The centred values are summarised
//! by an equal-width histogram, standard deviation, skewness and normal
//! quantile-quantile points.

use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::keypoints::{Clip, JointName, Side};

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ElbowVariant {
    /// Full neck-to-elbow Euclidean distance.
    #[default]
    Euclidean,
    /// Distance from the elbow to the point (x of neck, y of elbow), which
    /// reduces to the horizontal offset `|x_neck - x_elbow|`.
    Midpoint,
}

impl std::str::FromStr for ElbowVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(ElbowVariant::Euclidean),
            "midpoint" => Ok(ElbowVariant::Midpoint),
            other => Err(Error::InvalidArgument(format!("unknown elbow variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for ElbowVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ElbowVariant::Euclidean => "euclidean",
            ElbowVariant::Midpoint => "midpoint",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElbowSeries {
    pub side: Side,
    pub variant: ElbowVariant,
    pub distances: Vec<f64>,
}

/// One distance per frame in which both the neck and the elbow are present.
pub fn elbow_distances(clip: &Clip, side: Side, variant: ElbowVariant) -> Result<ElbowSeries> {
    let elbow = side.elbow();
    let distances: Vec<f64> = clip
        .pose
        .iter()
        .filter_map(|f| {
            let (n, e) = (f.joint(JointName::Neck), f.joint(elbow));
            if n.is_missing() || e.is_missing() {
                return None;
            }
            Some(match variant {
                ElbowVariant::Euclidean => ((n.x - e.x).powi(2) + (n.y - e.y).powi(2)).sqrt(),
                ElbowVariant::Midpoint => (n.x - e.x).abs(),
            })
        })
        .collect();
    if distances.is_empty() {
        return Err(Error::Insufficient("elbow frames"));
    }
    Ok(ElbowSeries {
        side,
        variant,
        distances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges; all equal when the data has zero range.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width histogram over `[min, max]` of `values`. The last bin is
    /// closed. Zero-range data lands entirely in the first bin.
    pub fn equal_width(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins)
            .map(|i| if i == bins { hi } else { lo + i as f64 * width })
            .collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let idx = if width > 0.0 { ((v - lo) / width).floor() as usize } else { 0 };
            counts[idx.min(bins - 1)] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowDistribution {
    /// Mean distance, the resting position.
    pub origin: f64,
    pub relative: Vec<f64>,
    pub histogram: Histogram,
    /// Population standard deviation.
    pub std: f64,
    /// Moment coefficient `m3 / m2^1.5`; 0 when the series has no spread.
    pub skewness: f64,
    /// Set when the series has zero variance and skewness is undefined.
    pub degenerate: bool,
    /// (standard normal quantile, sorted relative distance) pairs.
    pub qq_points: Vec<(f64, f64)>,
}

pub fn elbow_distribution(series: &ElbowSeries, bins: usize) -> Result<ElbowDistribution> {
    distribution_of(&series.distances, bins)
}

/// Distribution summary of any distance sample (at least two values).
pub fn distribution_of(distances: &[f64], bins: usize) -> Result<ElbowDistribution> {
    if distances.len() < 2 {
        return Err(Error::Insufficient("elbow distances"));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    let n = distances.len() as f64;
    let origin = distances.iter().sum::<f64>() / n;
    let relative: Vec<f64> = distances.iter().map(|d| d - origin).collect();
    let m2 = relative.iter().map(|r| r * r).sum::<f64>() / n;
    let m3 = relative.iter().map(|r| r * r * r).sum::<f64>() / n;
    let scale = distances.iter().fold(0.0f64, |a, d| a.max(d.abs())).max(1.0);
    let degenerate = m2.sqrt() <= 1e-12 * scale;
    let skewness = if degenerate { 0.0 } else { m3 / m2.powf(1.5) };

    let mut sorted = relative.clone();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let qq_points = sorted
        .iter()
        .enumerate()
        .map(|(i, &r)| (normal.inverse_cdf((i as f64 + 0.5) / n), r))
        .collect();

    let histogram = if degenerate {
        Histogram::equal_width(&vec![0.0; relative.len()], bins)
    } else {
        Histogram::equal_width(&relative, bins)
    };
    Ok(ElbowDistribution {
        origin,
        histogram,
        std: if degenerate { 0.0 } else { m2.sqrt() },
        skewness,
        degenerate,
        qq_points,
        relative,
    })
}

/// Normalised bin frequencies followed by `[std, skewness]`.
pub fn histogram_features(dist: &ElbowDistribution) -> Vec<f64> {
    let total = dist.histogram.total() as f64;
    let mut out: Vec<f64> = dist.histogram.counts.iter().map(|&c| c as f64 / total).collect();
    out.push(dist.std);
    out.push(dist.skewness);
    out
}

pub fn write_histogram_csv(path: &Path, dist: &ElbowDistribution) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["bin_left", "bin_right", "count"])?;
    for (i, c) in dist.histogram.counts.iter().enumerate() {
        w.write_record([
            dist.histogram.edges[i].to_string(),
            dist.histogram.edges[i + 1].to_string(),
            c.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_qq_csv(path: &Path, dist: &ElbowDistribution) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["normal_quantile", "sample_quantile"])?;
    for (q, s) in &dist.qq_points {
        w.write_record([q.to_string(), s.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keypoints::{Joint, PoseFrame, JOINT_COUNT};

    fn clip(frames: &[((f64, f64), Option<(f64, f64)>)]) -> Clip {
        let pose = frames
            .iter()
            .enumerate()
            .map(|(i, (neck, elbow))| {
                let mut f = PoseFrame::new(i as f64, [Joint::new(0.0, 0.0, 1.0); JOINT_COUNT]);
                *f.joint_mut(JointName::Neck) = Joint::new(neck.0, neck.1, 1.0);
                *f.joint_mut(JointName::LeftElbow) = elbow.map_or(Joint::MISSING, |(x, y)| Joint::new(x, y, 1.0));
                f
            })
            .collect();
        Clip {
            clip_id: "1_1".into(),
            participant_id: "1".into(),
            label: None,
            fps: 1.0,
            start: 0.0,
            end: frames.len() as f64,
            pose,
            face: vec![],
        }
    }

    #[test]
    fn both_variants_on_a_3_4_5_triangle() {
        let c = clip(&[((0.0, 0.0), Some((3.0, 4.0)))]);
        assert_eq!(elbow_distances(&c, Side::Left, ElbowVariant::Euclidean).unwrap().distances, vec![5.0]);
        assert_eq!(elbow_distances(&c, Side::Left, ElbowVariant::Midpoint).unwrap().distances, vec![3.0]);
    }

    #[test]
    fn skips_missing_frames_and_errors_when_none_usable() {
        let c = clip(&[((0.0, 0.0), None), ((0.0, 0.0), Some((0.0, 2.0)))]);
        assert_eq!(elbow_distances(&c, Side::Left, ElbowVariant::Euclidean).unwrap().distances, vec![2.0]);
        let c = clip(&[((0.0, 0.0), None)]);
        assert!(elbow_distances(&c, Side::Left, ElbowVariant::Euclidean).is_err());
    }

    #[test]
    fn moments_of_one_two_three() {
        let d = distribution_of(&[1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(d.origin, 2.0);
        assert_eq!(d.relative, vec![-1.0, 0.0, 1.0]);
        assert!((d.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(d.skewness, 0.0);
        assert!(!d.degenerate);
        assert_eq!(d.histogram.counts, vec![1, 1, 1]);
        // quantiles at (i - 0.5)/N for N = 3: the median maps to 0
        assert!(d.qq_points[1].0.abs() < 1e-12);
        assert!((d.qq_points[0].0 + d.qq_points[2].0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_is_flagged() {
        let d = distribution_of(&[4.2; 10], 4).unwrap();
        assert!(d.degenerate);
        assert_eq!((d.std, d.skewness), (0.0, 0.0));
        assert_eq!(d.histogram.counts, vec![10, 0, 0, 0]);
        assert_eq!(histogram_features(&d), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn uniform_fill_and_errors() {
        let d = distribution_of(&[0.0, 1.0, 2.0, 3.0], 4).unwrap();
        assert_eq!(&histogram_features(&d)[..4], &[0.25; 4]);
        assert!(distribution_of(&[1.0], 4).is_err());
        assert!(distribution_of(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn right_skewed_sample_has_positive_skewness() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Exp};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        // exponential: population skewness 2
        let xs: Vec<f64> = (0..20_000).map(|_| Exp::new(1.0).unwrap().sample(&mut rng)).collect();
        let d = distribution_of(&xs, 20).unwrap();
        assert!(d.skewness > 1.5 && d.skewness < 2.5, "{}", d.skewness);
    }
}
