//! Labelled synthetic signers.
//!
//! Each participant gets a [`SignerProfile`] drawn from class-conditional
//! uniform ranges. MCI signers have a smaller sign space, more holds, less
//! facial movement, and a narrower, right-skewed elbow distribution.
//!
//! Generated coordinates are rounded to 0.01 px so a recording survives a
//! trip through the keypoint file format unchanged.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keypoints::{FaceFrame, Joint, JointName, Label, Point, PoseFrame, Recording, JOINT_COUNT, LANDMARK_COUNT};

pub const DEFAULT_DURATION: f64 = 1200.0;
pub const DEFAULT_FPS: f64 = 25.0;

/// Mean neck-to-elbow distance in pixels.
const ELBOW_BASE: f64 = 220.0;
const ELBOW_AR: f64 = 0.8;
const WALK_PERSISTENCE: f64 = 0.8;
const LIP_RANGE: (f64, f64) = (0.0, 30.0);
const BROW_RANGE: (f64, f64) = (0.0, 15.0);
const HOLD_SECONDS: (f64, f64) = (0.5, 2.0);
const NECK: (f64, f64) = (640.0, 330.0);

/// Per-stream seed derivation (splitmix64 finaliser over the mixed inputs).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed streams used across the pipeline.
pub mod streams {
    pub const COHORT: u64 = 1;
    pub const RECORDING: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const TRAIN: u64 = 4;
    pub const VALIDATION: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignerProfile {
    pub label: Label,
    /// Wrist oscillation amplitude, px.
    pub amplitude_scale: f64,
    pub pause_fraction_target: f64,
    /// Typical wrist speed while moving, px/s.
    pub base_speed: f64,
    /// Mean absolute frame-to-frame change of the lip opening, px/frame.
    pub facial_activity_level: f64,
    pub elbow_std: f64,
    pub elbow_skew_target: f64,
}

/// Closed uniform ranges `[lo, hi]` for one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRanges {
    pub amplitude_scale: (f64, f64),
    pub pause_fraction: (f64, f64),
    /// Moving speed as a multiple of the amplitude, 1/s.
    pub speed_factor: (f64, f64),
    pub facial_activity: (f64, f64),
    pub elbow_std: (f64, f64),
    pub elbow_skew: (f64, f64),
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

impl ClassRanges {
    fn validate(&self, class: &str) -> Result<()> {
        let ranges = [
            ("amplitude_scale", self.amplitude_scale, 0.0, f64::INFINITY),
            ("pause_fraction", self.pause_fraction, 0.0, 0.95),
            ("speed_factor", self.speed_factor, 0.0, f64::INFINITY),
            ("facial_activity", self.facial_activity, 0.0, f64::INFINITY),
            ("elbow_std", self.elbow_std, 0.0, f64::INFINITY),
            ("elbow_skew", self.elbow_skew, -10.0, 10.0),
        ];
        for (name, (lo, hi), min, max) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= min && hi <= max) {
                return Err(Error::Config(format!("{class}.{name} must be an ordered range within [{min}, {max}], got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> SignerProfile {
        let amplitude_scale = uniform(rng, self.amplitude_scale);
        SignerProfile {
            label,
            amplitude_scale,
            pause_fraction_target: uniform(rng, self.pause_fraction),
            base_speed: amplitude_scale * uniform(rng, self.speed_factor),
            facial_activity_level: uniform(rng, self.facial_activity),
            elbow_std: uniform(rng, self.elbow_std),
            elbow_skew_target: uniform(rng, self.elbow_skew),
        }
    }
}

/// Class-conditional profile distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub mci: ClassRanges,
    pub healthy: ClassRanges,
}

impl Default for ProfileSet {
    fn default() -> Self {
        Self {
            mci: ClassRanges {
                amplitude_scale: (50.0, 100.0),
                pause_fraction: (0.25, 0.45),
                speed_factor: (1.5, 2.5),
                facial_activity: (0.2, 0.8),
                elbow_std: (8.0, 18.0),
                elbow_skew: (0.6, 1.2),
            },
            healthy: ClassRanges {
                amplitude_scale: (120.0, 180.0),
                pause_fraction: (0.05, 0.15),
                speed_factor: (1.5, 2.5),
                facial_activity: (1.5, 3.0),
                elbow_std: (25.0, 40.0),
                elbow_skew: (0.0, 0.0),
            },
        }
    }
}

impl ProfileSet {
    /// Heavily overlapping classes with only a small shift between them.
    pub fn hard() -> Self {
        Self {
            mci: ClassRanges {
                amplitude_scale: (70.0, 150.0),
                pause_fraction: (0.10, 0.35),
                speed_factor: (1.5, 2.5),
                facial_activity: (0.5, 2.2),
                elbow_std: (12.0, 32.0),
                elbow_skew: (0.0, 0.8),
            },
            healthy: ClassRanges {
                amplitude_scale: (80.0, 160.0),
                pause_fraction: (0.05, 0.30),
                speed_factor: (1.5, 2.5),
                facial_activity: (0.7, 2.4),
                elbow_std: (15.0, 35.0),
                elbow_skew: (0.0, 0.6),
            },
        }
    }

    /// Both classes drawn from the same ranges, so labels carry no signal.
    pub fn identical() -> Self {
        let shared = ClassRanges {
            amplitude_scale: (50.0, 180.0),
            pause_fraction: (0.05, 0.45),
            speed_factor: (1.5, 2.5),
            facial_activity: (0.2, 3.0),
            elbow_std: (8.0, 40.0),
            elbow_skew: (0.0, 1.2),
        };
        Self {
            mci: shared,
            healthy: shared,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "hard" => Ok(Self::hard()),
            "identical" => Ok(Self::identical()),
            other => Err(Error::Config(format!("unknown profile preset {other:?} (expected default, hard or identical)"))),
        }
    }

    pub fn for_label(&self, label: Label) -> &ClassRanges {
        match label {
            Label::Mci => &self.mci,
            Label::Healthy => &self.healthy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mci.validate("mci")?;
        self.healthy.validate("healthy")
    }

    /// Reads a TOML file with `[mci]` and `[healthy]` tables of
    /// `name = [lo, hi]` ranges.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        set.validate()?;
        Ok(set)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Detector noise applied on top of the clean signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Gaussian position noise on every keypoint, px.
    pub jitter_sigma: f64,
    /// Per-frame probability that no face is detected.
    pub face_dropout: f64,
    /// Per-frame probability that a given wrist or elbow is missing.
    pub joint_dropout: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            jitter_sigma: 1.0,
            face_dropout: 0.02,
            joint_dropout: 0.01,
        }
    }
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            jitter_sigma: 0.0,
            face_dropout: 0.0,
            joint_dropout: 0.0,
        }
    }
}

fn quantize(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Lengths of alternating move/hold segments, starting and ending with a move.
/// Hold frames total exactly `round(pause_fraction * n)`.
fn hold_schedule<R: Rng + ?Sized>(n: usize, pause_fraction: f64, fps: f64, rng: &mut R) -> Vec<bool> {
    let mut holds = Vec::new();
    let mut remaining = ((pause_fraction.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
    while remaining > 0 {
        let len = ((uniform(rng, HOLD_SECONDS) * fps).round() as usize).clamp(1, remaining);
        holds.push(len);
        remaining -= len;
    }
    let move_total = n - holds.iter().sum::<usize>();
    // split the moving frames into holds.len() + 1 parts with random weights
    let weights: Vec<f64> = (0..=holds.len()).map(|_| rng.random::<f64>() + 0.1).collect();
    let wsum: f64 = weights.iter().sum();
    let mut moves: Vec<usize> = weights.iter().map(|w| (w / wsum * move_total as f64).floor() as usize).collect();
    let assigned: usize = moves.iter().sum();
    moves[0] += move_total - assigned;

    let mut schedule = Vec::with_capacity(n);
    for (i, m) in moves.iter().enumerate() {
        schedule.extend(std::iter::repeat_n(false, *m));
        if let Some(h) = holds.get(i) {
            schedule.extend(std::iter::repeat_n(true, *h));
        }
    }
    schedule
}

/// Sum of three random-phase sinusoids sampled on the motion clock, mapped
/// affinely onto exactly `[-amplitude, amplitude]`.
fn oscillation<R: Rng + ?Sized>(clock: &[f64], amplitude: f64, base_freq: f64, rng: &mut R) -> Vec<f64> {
    let comps: Vec<(f64, f64, f64)> = (0..3)
        .map(|k| {
            let ratio = [1.0, uniform(rng, (1.4, 2.0)), uniform(rng, (2.3, 3.1))][k];
            let weight = [1.0, uniform(rng, (0.3, 0.6)), uniform(rng, (0.1, 0.3))][k];
            (base_freq * ratio, weight, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let raw: Vec<f64> = clock
        .iter()
        .map(|&t| comps.iter().map(|(f, w, p)| w * (std::f64::consts::TAU * f * t + p).sin()).sum())
        .collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if amplitude == 0.0 || hi - lo <= 0.0 {
        return vec![0.0; raw.len()];
    }
    raw.iter().map(|r| amplitude * (2.0 * (r - lo) / (hi - lo) - 1.0)).collect()
}

/// Skewness of `exp(sigma * u)` for standard normal `u`.
fn lognormal_skew(sigma: f64) -> f64 {
    let e = (sigma * sigma).exp();
    (e + 2.0) * (e - 1.0).sqrt()
}

/// Monotone transform of a standard normal with zero mean, unit variance and
/// the requested skewness (a standardised shifted log-normal).
fn skewed_transform(skew: f64) -> impl Fn(f64) -> f64 {
    let target = skew.abs();
    let sigma = if target < 1e-9 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lognormal_skew(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let sign = skew.signum();
    move |u: f64| {
        if sigma == 0.0 {
            return u;
        }
        let e = (sigma * sigma).exp();
        let mean = (sigma * sigma / 2.0).exp();
        let sd = ((e - 1.0) * e).sqrt();
        sign * ((sigma * u).exp() - mean) / sd
    }
}

/// Stationary unit-variance AR(1) series.
fn ar1<R: Rng + ?Sized>(n: usize, phi: f64, rng: &mut R) -> Vec<f64> {
    let innov = (1.0 - phi * phi).sqrt();
    let mut u: f64 = StandardNormal.sample(rng);
    (0..n)
        .map(|_| {
            let current = u;
            let e: f64 = StandardNormal.sample(rng);
            u = phi * u + innov * e;
            current
        })
        .collect()
}

/// Persistent walk with steps of exactly `step`, reflected into `[lo, hi]`.
fn reflected_walk<R: Rng + ?Sized>(n: usize, step: f64, (lo, hi): (f64, f64), rng: &mut R) -> Vec<f64> {
    let mut value = uniform(rng, (lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo)));
    let mut dir = if rng.random::<bool>() { 1.0 } else { -1.0 };
    (0..n)
        .map(|_| {
            let current = value;
            if rng.random::<f64>() > WALK_PERSISTENCE {
                dir = -dir;
            }
            let mut next = value + dir * step;
            if next > hi {
                next = 2.0 * hi - next;
                dir = -1.0;
            } else if next < lo {
                next = 2.0 * lo - next;
                dir = 1.0;
            }
            value = next.clamp(lo, hi);
            current
        })
        .collect()
}

/// Neutral 68-point face centred at `(cx, cy)`, in the common iBUG ordering.
fn face_template(cx: f64, cy: f64) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(LANDMARK_COUNT);
    for i in 0..17 {
        let a = std::f64::consts::PI * (i as f64 / 16.0);
        pts.push((cx - 70.0 * a.cos(), cy + 10.0 + 80.0 * a.sin()));
    }
    for i in 0..5 {
        pts.push((cx - 60.0 + 10.0 * i as f64, cy - 45.0 - 3.0 * (2.0 - (i as f64 - 2.0).abs())));
    }
    for i in 0..5 {
        pts.push((cx + 20.0 + 10.0 * i as f64, cy - 45.0 - 3.0 * (2.0 - (i as f64 - 2.0).abs())));
    }
    for i in 0..4 {
        pts.push((cx, cy - 30.0 + 10.0 * i as f64));
    }
    for i in 0..5 {
        pts.push((cx - 12.0 + 6.0 * i as f64, cy + 12.0 + if i == 2 { 2.0 } else { 0.0 }));
    }
    for (ex, sgn) in [(cx - 35.0, 1.0), (cx + 35.0, 1.0)] {
        for i in 0..6 {
            let a = std::f64::consts::TAU * i as f64 / 6.0;
            pts.push((ex - 12.0 * a.cos(), cy - 25.0 - sgn * 5.0 * a.sin()));
        }
    }
    for i in 0..12 {
        let a = std::f64::consts::TAU * i as f64 / 12.0;
        pts.push((cx - 25.0 * a.cos(), cy + 40.0 - 10.0 * a.sin()));
    }
    for i in 0..8 {
        let a = std::f64::consts::TAU * i as f64 / 8.0;
        pts.push((cx - 15.0 * a.cos(), cy + 40.0 - 2.0 * a.sin()));
    }
    debug_assert_eq!(pts.len(), LANDMARK_COUNT);
    pts
}

/// Brow landmarks (17..=26) and the lower-lip points that open with the mouth.
fn is_brow(i: usize) -> bool {
    (17..=26).contains(&i)
}

fn is_lower_lip(i: usize) -> bool {
    (55..=59).contains(&i) || (65..=67).contains(&i)
}

const FIXED_JOINTS: [(JointName, f64, f64); 9] = [
    (JointName::LeftEye, 35.0, -205.0),
    (JointName::RightEye, -35.0, -205.0),
    (JointName::Nose, 0.0, -180.0),
    (JointName::LeftEar, 70.0, -195.0),
    (JointName::RightEar, -70.0, -195.0),
    (JointName::Neck, 0.0, 0.0),
    (JointName::LeftShoulder, 160.0, 20.0),
    (JointName::RightShoulder, -160.0, 20.0),
    (JointName::LeftHip, 120.0, 420.0),
];

/// One recording of `duration` seconds at `fps`.
///
/// All randomness comes from `seed`; the same arguments always give the same
/// recording.
pub fn generate_recording(
    participant_id: &str,
    profile: &SignerProfile,
    duration: f64,
    fps: f64,
    seed: u64,
    noise: &NoiseConfig,
) -> Result<Recording> {
    if !(duration > 0.0 && fps > 0.0 && duration.is_finite() && fps.is_finite()) {
        return Err(Error::InvalidArgument(format!("duration and fps must be positive, got {duration} s at {fps} fps")));
    }
    let n = (duration * fps).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Wrists: held still during holds, oscillating on a clock that pauses with them.
    let schedule = hold_schedule(n, profile.pause_fraction_target, fps, &mut rng);
    let mut clock = Vec::with_capacity(n);
    let mut tau = 0.0;
    for &hold in &schedule {
        clock.push(tau);
        if !hold {
            tau += 1.0 / fps;
        }
    }
    let amp = profile.amplitude_scale;
    let base_freq = if amp > 0.0 { profile.base_speed / (4.0 * amp) } else { 0.0 };
    let wrists: Vec<(Vec<f64>, Vec<f64>)> = (0..2)
        .map(|_| {
            let x = oscillation(&clock, amp, base_freq, &mut rng);
            let y = oscillation(&clock, amp, base_freq * uniform(&mut rng, (0.8, 1.2)), &mut rng);
            (x, y)
        })
        .collect();

    // Elbows: distance from the neck with the target spread and skew.
    let elbows: Vec<Vec<f64>> = (0..2)
        .map(|_| {
            let shape = skewed_transform(profile.elbow_skew_target);
            ar1(n, ELBOW_AR, &mut rng)
                .into_iter()
                .map(|u| ELBOW_BASE + profile.elbow_std * shape(u))
                .collect()
        })
        .collect();
    let elbow_angles = [uniform(&mut rng, (0.9, 1.2)), std::f64::consts::PI - uniform(&mut rng, (0.9, 1.2))];

    // Face: lip opening and brow height as persistent reflected walks.
    let lip = reflected_walk(n, profile.facial_activity_level, LIP_RANGE, &mut rng);
    let brow = reflected_walk(n, 0.5 * profile.facial_activity_level, BROW_RANGE, &mut rng);
    let template = face_template(NECK.0, NECK.1 - 240.0);

    let jitter = |rng: &mut ChaCha8Rng| -> f64 {
        if noise.jitter_sigma > 0.0 {
            noise.jitter_sigma * Distribution::<f64>::sample(&StandardNormal, rng)
        } else {
            0.0
        }
    };
    let hand_centres = [(NECK.0 + 150.0, NECK.1 + 230.0), (NECK.0 - 150.0, NECK.1 + 230.0)];

    let mut pose = Vec::with_capacity(n);
    let mut face = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fps;
        let mut joints = [Joint::MISSING; JOINT_COUNT];
        for (name, dx, dy) in FIXED_JOINTS {
            let conf = quantize(rng.random_range(0.7..=1.0));
            joints[name.index()] = Joint::new(quantize(NECK.0 + dx + jitter(&mut rng)), quantize(NECK.1 + dy + jitter(&mut rng)), conf);
        }
        let conf = quantize(rng.random_range(0.7..=1.0));
        joints[JointName::RightHip.index()] =
            Joint::new(quantize(NECK.0 - 120.0 + jitter(&mut rng)), quantize(NECK.1 + 420.0 + jitter(&mut rng)), conf);
        for side in 0..2 {
            let (wrist, elbow) = if side == 0 {
                (JointName::LeftWrist, JointName::LeftElbow)
            } else {
                (JointName::RightWrist, JointName::RightElbow)
            };
            let (cx, cy) = hand_centres[side];
            let (wx, wy) = (&wrists[side].0, &wrists[side].1);
            let jx = jitter(&mut rng);
            let jy = jitter(&mut rng);
            let conf = quantize(rng.random_range(0.6..=1.0));
            let missing = rng.random::<f64>() < noise.joint_dropout;
            joints[wrist.index()] = if missing {
                Joint::MISSING
            } else {
                Joint::new(quantize(cx + wx[i] + jx), quantize(cy + wy[i] + jy), conf)
            };
            let d = elbows[side][i];
            let a = elbow_angles[side];
            let jx = jitter(&mut rng);
            let jy = jitter(&mut rng);
            let conf = quantize(rng.random_range(0.6..=1.0));
            let missing = rng.random::<f64>() < noise.joint_dropout;
            joints[elbow.index()] = if missing {
                Joint::MISSING
            } else {
                Joint::new(quantize(NECK.0 + d * a.cos() + jx), quantize(NECK.1 + d * a.sin() + jy), conf)
            };
        }
        pose.push(PoseFrame::new(t, joints));

        if rng.random::<f64>() < noise.face_dropout {
            face.push(FaceFrame::undetected(t));
            continue;
        }
        let landmarks = template
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| {
                let dy = if is_brow(k) {
                    -brow[i]
                } else if is_lower_lip(k) {
                    lip[i]
                } else {
                    0.0
                };
                Point::new(quantize(x + jitter(&mut rng)), quantize(y + dy + jitter(&mut rng)))
            })
            .collect();
        face.push(FaceFrame::detected(t, landmarks));
    }

    Ok(Recording {
        participant_id: participant_id.to_string(),
        label: Some(profile.label),
        fps,
        pose,
        face,
    })
}

/// Who is in a cohort and how each recording is seeded, without the frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortMember {
    pub participant_id: String,
    pub profile: SignerProfile,
    pub seed: u64,
}

/// Draws labels and profiles for `n` participants; `round(n * mci_fraction)`
/// of them are MCI, in shuffled order. Ids run `"1"..="n"`.
pub fn plan_cohort(n: usize, mci_fraction: f64, seed: u64, profiles: &ProfileSet) -> Result<Vec<CohortMember>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("a cohort needs at least 2 participants, got {n}")));
    }
    if !(mci_fraction > 0.0 && mci_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("mci_fraction must be in (0, 1), got {mci_fraction}")));
    }
    profiles.validate()?;
    let n_mci = (n as f64 * mci_fraction).round() as usize;
    let mut labels: Vec<Label> = (0..n).map(|i| if i < n_mci { Label::Mci } else { Label::Healthy }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, streams::COHORT, 0));
    labels.shuffle(&mut rng);
    Ok(labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| CohortMember {
            participant_id: (i + 1).to_string(),
            profile: profiles.for_label(label).sample(label, &mut rng),
            seed: derive_seed(seed, streams::RECORDING, i as u64),
        })
        .collect())
}

impl CohortMember {
    pub fn generate(&self, duration: f64, fps: f64, noise: &NoiseConfig) -> Result<Recording> {
        generate_recording(&self.participant_id, &self.profile, duration, fps, self.seed, noise)
    }
}

/// Full cohort of 20-minute, 25 fps recordings held in memory. For large
/// cohorts prefer [`plan_cohort`] and generate one member at a time.
pub fn generate_cohort(n: usize, mci_fraction: f64, seed: u64, profiles: &ProfileSet, noise: &NoiseConfig) -> Result<Vec<Recording>> {
    plan_cohort(n, mci_fraction, seed, profiles)?
        .iter()
        .map(|m| m.generate(DEFAULT_DURATION, DEFAULT_FPS, noise))
        .collect()
}

pub fn recording_file_name(participant_id: &str) -> String {
    format!("participant_{participant_id}.json")
}

pub fn write_manifest(path: &Path, members: &[CohortMember]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "participant_id",
        "label",
        "file",
        "seed",
        "amplitude_scale",
        "pause_fraction_target",
        "base_speed",
        "facial_activity_level",
        "elbow_std",
        "elbow_skew_target",
    ])?;
    for m in members {
        let p = &m.profile;
        w.write_record([
            m.participant_id.clone(),
            p.label.to_string(),
            recording_file_name(&m.participant_id),
            m.seed.to_string(),
            p.amplitude_scale.to_string(),
            p.pause_fraction_target.to_string(),
            p.base_speed.to_string(),
            p.facial_activity_level.to_string(),
            p.elbow_std.to_string(),
            p.elbow_skew_target.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elbow::{elbow_distances, elbow_distribution, ElbowVariant};
    use crate::facial::facial_activity;
    use crate::keypoints::{Clip, Side};
    use crate::trajectory::{envelope_stats, wrist_trajectory};

    fn profile(label: Label) -> SignerProfile {
        SignerProfile {
            label,
            amplitude_scale: 100.0,
            pause_fraction_target: 0.3,
            base_speed: 200.0,
            facial_activity_level: 1.0,
            elbow_std: 15.0,
            elbow_skew_target: 0.0,
        }
    }

    #[test]
    fn cohort_class_counts() {
        let plan = plan_cohort(40, 0.475, 7, &ProfileSet::default()).unwrap();
        assert_eq!(plan.iter().filter(|m| m.profile.label == Label::Mci).count(), 19);
        let plan = plan_cohort(2, 0.5, 7, &ProfileSet::default()).unwrap();
        assert_eq!(plan.iter().filter(|m| m.profile.label == Label::Mci).count(), 1);
        assert!(plan_cohort(1, 0.5, 7, &ProfileSet::default()).is_err());
        assert!(plan_cohort(10, 1.0, 7, &ProfileSet::default()).is_err());
    }

    #[test]
    fn profiles_respect_class_ranges() {
        for m in plan_cohort(40, 0.5, 3, &ProfileSet::default()).unwrap() {
            let p = m.profile;
            match p.label {
                Label::Mci => assert!(p.amplitude_scale <= 100.0 && p.elbow_skew_target >= 0.6),
                Label::Healthy => assert!(p.amplitude_scale >= 120.0 && p.elbow_skew_target == 0.0),
            }
        }
    }

    #[test]
    fn recording_is_deterministic() {
        let p = profile(Label::Healthy);
        let a = generate_recording("1", &p, 10.0, 25.0, 42, &NoiseConfig::default()).unwrap();
        let b = generate_recording("1", &p, 10.0, 25.0, 42, &NoiseConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pose.len(), 250);
        a.validate().unwrap();
    }

    #[test]
    fn zero_activity_gives_zero_d3() {
        let p = SignerProfile {
            facial_activity_level: 0.0,
            ..profile(Label::Mci)
        };
        let r = generate_recording("1", &p, 20.0, 25.0, 1, &NoiseConfig::none()).unwrap();
        assert_eq!(facial_activity(&r.face).unwrap().d3, 0.0);
    }

    #[test]
    fn zero_amplitude_is_one_long_pause() {
        let p = SignerProfile {
            amplitude_scale: 0.0,
            ..profile(Label::Mci)
        };
        let r = generate_recording("1", &p, 20.0, 25.0, 1, &NoiseConfig::none()).unwrap();
        let clip = Clip::from_recording(&r);
        let s = envelope_stats(&wrist_trajectory(&clip, Side::Left, 0), 5.0).unwrap();
        assert_eq!((s.x_amplitude, s.y_amplitude, s.pause_fraction), (0.0, 0.0, 1.0));
    }

    #[test]
    fn pause_and_amplitude_targets() {
        let p = profile(Label::Healthy);
        let r = generate_recording("1", &p, 300.0, 25.0, 5, &NoiseConfig::none()).unwrap();
        let clip = Clip::from_recording(&r);
        let s = envelope_stats(&wrist_trajectory(&clip, Side::Right, 0), 5.0).unwrap();
        assert!((s.pause_fraction - 0.3).abs() <= 0.05, "{}", s.pause_fraction);
        assert!((s.x_amplitude - 200.0).abs() <= 20.0, "{}", s.x_amplitude);
    }

    #[test]
    fn lognormal_skew_is_inverted() {
        let f = skewed_transform(1.0);
        // third standardised moment by quadrature over the standard normal
        let (mut m2, mut m3) = (0.0f64, 0.0f64);
        let h = 1e-3;
        let mut u: f64 = -9.0;
        while u < 9.0 {
            let w = (-u * u / 2.0).exp() / (std::f64::consts::TAU).sqrt() * h;
            let z = f(u);
            m2 += w * z * z;
            m3 += w * z * z * z;
            u += h;
        }
        assert!((m2 - 1.0).abs() < 1e-3, "{m2}");
        assert!((m3 / m2.powf(1.5) - 1.0).abs() < 1e-2, "{m3}");
    }

    #[test]
    fn elbow_skew_is_reproduced() {
        let p = SignerProfile {
            elbow_skew_target: 1.0,
            ..profile(Label::Mci)
        };
        let r = generate_recording("1", &p, 1200.0, 25.0, 11, &NoiseConfig::none()).unwrap();
        let clip = Clip::from_recording(&r);
        let d = elbow_distribution(&elbow_distances(&clip, Side::Left, ElbowVariant::Euclidean).unwrap(), 20).unwrap();
        assert!((d.skewness - 1.0).abs() <= 0.3, "{}", d.skewness);
        assert!((d.std - 15.0).abs() <= 2.0, "{}", d.std);
    }

    #[test]
    fn profile_set_toml_round_trip() {
        let set = ProfileSet::hard();
        let text = set.to_toml().unwrap();
        let back: ProfileSet = toml::from_str(&text).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn derive_seed_separates_streams() {
        assert_ne!(derive_seed(1, 1, 0), derive_seed(1, 2, 0));
        assert_ne!(derive_seed(1, 1, 0), derive_seed(1, 1, 1));
        assert_eq!(derive_seed(9, 3, 4), derive_seed(9, 3, 4));
    }
}
