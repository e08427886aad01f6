//! Keypoint streams: canonical joint naming, keypoint file ingestion, clip
//! segmentation and short-gap interpolation.
//!
//! A keypoint file holds one recording as a single JSON document:
//!
//! ```json
//! {
//!   "participant_id": "7",
//!   "label": 0,
//!   "fps": 25.0,
//!   "pose": [[0.0, [[x, y, c], ... 14 joints]], ...],
//!   "face": [[0.0, [[x, y], ... 68 points]], [0.04, null], ...]
//! }
//! ```
//!
//! `label` is `0` (MCI), `1` (Healthy) or `null`. Pose joints follow the order
//! of [`JointName::ALL`]; a joint with confidence `0` is missing. A `null`
//! face entry means no face was detected in that frame.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const JOINT_COUNT: usize = 14;
pub const LANDMARK_COUNT: usize = 68;

/// Upper-body joints in canonical file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointName {
    LeftEye,
    RightEye,
    Nose,
    LeftEar,
    RightEar,
    Neck,
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftWrist,
    RightWrist,
    LeftHip,
    RightHip,
}

impl JointName {
    pub const ALL: [JointName; JOINT_COUNT] = [
        JointName::LeftEye,
        JointName::RightEye,
        JointName::Nose,
        JointName::LeftEar,
        JointName::RightEar,
        JointName::Neck,
        JointName::LeftShoulder,
        JointName::RightShoulder,
        JointName::LeftElbow,
        JointName::RightElbow,
        JointName::LeftWrist,
        JointName::RightWrist,
        JointName::LeftHip,
        JointName::RightHip,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JointName::LeftEye => "left_eye",
            JointName::RightEye => "right_eye",
            JointName::Nose => "nose",
            JointName::LeftEar => "left_ear",
            JointName::RightEar => "right_ear",
            JointName::Neck => "neck",
            JointName::LeftShoulder => "left_shoulder",
            JointName::RightShoulder => "right_shoulder",
            JointName::LeftElbow => "left_elbow",
            JointName::RightElbow => "right_elbow",
            JointName::LeftWrist => "left_wrist",
            JointName::RightWrist => "right_wrist",
            JointName::LeftHip => "left_hip",
            JointName::RightHip => "right_hip",
        }
    }
}

/// Body side for paired joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn wrist(self) -> JointName {
        match self {
            Side::Left => JointName::LeftWrist,
            Side::Right => JointName::RightWrist,
        }
    }

    pub fn elbow(self) -> JointName {
        match self {
            Side::Left => JointName::LeftElbow,
            Side::Right => JointName::RightElbow,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Joint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Joint {
    pub const MISSING: Joint = Joint {
        x: 0.0,
        y: 0.0,
        confidence: 0.0,
    };

    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        Self { x, y, confidence }
    }

    pub fn is_missing(&self) -> bool {
        self.confidence <= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    pub timestamp: f64,
    pub joints: [Joint; JOINT_COUNT],
}

impl PoseFrame {
    pub fn new(timestamp: f64, joints: [Joint; JOINT_COUNT]) -> Self {
        Self { timestamp, joints }
    }

    pub fn joint(&self, name: JointName) -> &Joint {
        &self.joints[name.index()]
    }

    pub fn joint_mut(&mut self, name: JointName) -> &mut Joint {
        &mut self.joints[name.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One frame of 68-point facial landmarks. `None` when no face was detected.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFrame {
    pub timestamp: f64,
    pub landmarks: Option<Vec<Point>>,
}

impl FaceFrame {
    pub fn detected(timestamp: f64, landmarks: Vec<Point>) -> Self {
        Self {
            timestamp,
            landmarks: Some(landmarks),
        }
    }

    pub fn undetected(timestamp: f64) -> Self {
        Self {
            timestamp,
            landmarks: None,
        }
    }

    pub fn is_detected(&self) -> bool {
        self.landmarks.is_some()
    }
}

/// Ground-truth class. MCI is class 0 and Healthy class 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Mci = 0,
    Healthy = 1,
}

impl Label {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Label::Mci),
            1 => Some(Label::Healthy),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Mci => "MCI",
            Label::Healthy => "Healthy",
        }
    }

    /// Target value for the healthy-probability output.
    pub fn target(self) -> f64 {
        f64::from(self.code())
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.code())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let code = u8::deserialize(d)?;
        Label::from_code(code)
            .ok_or_else(|| serde::de::Error::custom(format!("label must be 0 or 1, got {code}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub participant_id: String,
    pub label: Option<Label>,
    pub fps: f64,
    pub pose: Vec<PoseFrame>,
    pub face: Vec<FaceFrame>,
}

impl Recording {
    /// Time span covered by the recording, `None` when it has no frames.
    ///
    /// The span runs from the first timestamp to one frame period past the
    /// last one, so 30000 frames at 25 fps span exactly 1200 s.
    pub fn span(&self) -> Option<(f64, f64)> {
        let first = [self.pose.first().map(|f| f.timestamp), self.face.first().map(|f| f.timestamp)];
        let last = [self.pose.last().map(|f| f.timestamp), self.face.last().map(|f| f.timestamp)];
        let start = first.iter().flatten().copied().reduce(f64::min)?;
        let end = last.iter().flatten().copied().reduce(f64::max)?;
        Some((start, end + 1.0 / self.fps))
    }

    pub fn duration(&self) -> f64 {
        self.span().map_or(0.0, |(s, e)| e - s)
    }

    /// Check the invariants of a recording (positive fps, ordered streams,
    /// landmark counts, confidence ranges).
    pub fn validate(&self) -> Result<()> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::Schema {
                field: "fps".into(),
                message: format!("must be positive, got {}", self.fps),
            });
        }
        for (i, frame) in self.pose.iter().enumerate() {
            for (j, joint) in frame.joints.iter().enumerate() {
                if !(0.0..=1.0).contains(&joint.confidence) {
                    return Err(Error::frame(
                        i,
                        format!("joint {} confidence {} outside [0, 1]", JointName::ALL[j].as_str(), joint.confidence),
                    ));
                }
            }
        }
        for (i, frame) in self.face.iter().enumerate() {
            if let Some(points) = &frame.landmarks {
                if points.len() != LANDMARK_COUNT {
                    return Err(Error::frame(
                        i,
                        format!("face: expected {LANDMARK_COUNT} landmarks, found {}", points.len()),
                    ));
                }
            }
        }
        check_increasing("pose", self.pose.iter().map(|f| f.timestamp))?;
        check_increasing("face", self.face.iter().map(|f| f.timestamp))?;
        Ok(())
    }
}

fn check_increasing(stream: &'static str, ts: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for (frame, t) in ts.enumerate() {
        if !(t > prev) {
            return Err(Error::Ordering { stream, frame });
        }
        prev = t;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RawRecording {
    participant_id: String,
    label: Option<Label>,
    fps: f64,
    pose: Vec<RawPoseFrame>,
    face: Vec<RawFaceFrame>,
}

#[derive(Serialize, Deserialize)]
struct RawPoseFrame(f64, Vec<Vec<f64>>);

#[derive(Serialize, Deserialize)]
struct RawFaceFrame(f64, Option<Vec<Vec<f64>>>);

impl RawRecording {
    fn into_recording(self) -> Result<Recording> {
        let mut pose = Vec::with_capacity(self.pose.len());
        for (i, RawPoseFrame(ts, joints)) in self.pose.into_iter().enumerate() {
            if !ts.is_finite() {
                return Err(Error::frame(i, "timestamp is not finite"));
            }
            if joints.len() != JOINT_COUNT {
                return Err(Error::frame(
                    i,
                    format!("expected {JOINT_COUNT} joints, found {}", joints.len()),
                ));
            }
            let mut parsed = [Joint::MISSING; JOINT_COUNT];
            for (j, values) in joints.iter().enumerate() {
                let name = JointName::ALL[j].as_str();
                let &[x, y, c] = values.as_slice() else {
                    return Err(Error::frame(
                        i,
                        format!("joint {name}: expected [x, y, confidence], found {} values", values.len()),
                    ));
                };
                if !(x.is_finite() && y.is_finite()) {
                    return Err(Error::frame(i, format!("joint {name}: non-finite coordinate")));
                }
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::frame(
                        i,
                        format!("joint {name}: confidence {c} outside [0, 1]"),
                    ));
                }
                parsed[j] = Joint::new(x, y, c);
            }
            pose.push(PoseFrame::new(ts, parsed));
        }

        let mut face = Vec::with_capacity(self.face.len());
        for (i, RawFaceFrame(ts, points)) in self.face.into_iter().enumerate() {
            if !ts.is_finite() {
                return Err(Error::frame(i, "face: timestamp is not finite"));
            }
            let landmarks = match points {
                None => None,
                Some(points) => {
                    if points.len() != LANDMARK_COUNT {
                        return Err(Error::frame(
                            i,
                            format!("face: expected {LANDMARK_COUNT} landmarks, found {}", points.len()),
                        ));
                    }
                    let mut parsed = Vec::with_capacity(LANDMARK_COUNT);
                    for (k, values) in points.iter().enumerate() {
                        let &[x, y] = values.as_slice() else {
                            return Err(Error::frame(
                                i,
                                format!("face: landmark {}: expected [x, y], found {} values", k + 1, values.len()),
                            ));
                        };
                        if !(x.is_finite() && y.is_finite()) {
                            return Err(Error::frame(i, format!("face: landmark {}: non-finite coordinate", k + 1)));
                        }
                        parsed.push(Point::new(x, y));
                    }
                    Some(parsed)
                }
            };
            face.push(FaceFrame { timestamp: ts, landmarks });
        }

        let recording = Recording {
            participant_id: self.participant_id,
            label: self.label,
            fps: self.fps,
            pose,
            face,
        };
        recording.validate()?;
        Ok(recording)
    }

    fn from_recording(rec: &Recording) -> Self {
        RawRecording {
            participant_id: rec.participant_id.clone(),
            label: rec.label,
            fps: rec.fps,
            pose: rec
                .pose
                .iter()
                .map(|f| {
                    RawPoseFrame(
                        f.timestamp,
                        f.joints.iter().map(|j| vec![j.x, j.y, j.confidence]).collect(),
                    )
                })
                .collect(),
            face: rec
                .face
                .iter()
                .map(|f| {
                    RawFaceFrame(
                        f.timestamp,
                        f.landmarks
                            .as_ref()
                            .map(|pts| pts.iter().map(|p| vec![p.x, p.y]).collect()),
                    )
                })
                .collect(),
        }
    }
}

/// Parse a keypoint document from a string.
pub fn parse_keypoint_str(text: &str) -> Result<Recording> {
    let raw: RawRecording = serde_json::from_str(text)?;
    raw.into_recording()
}

pub fn parse_keypoint_file(path: &Path) -> Result<Recording> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let raw: RawRecording = serde_json::from_reader(BufReader::new(file))?;
    raw.into_recording()
}

pub fn recording_to_string(rec: &Recording) -> Result<String> {
    Ok(serde_json::to_string(&RawRecording::from_recording(rec))?)
}

pub fn write_keypoint_file(path: &Path, rec: &Recording) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer(&mut out, &RawRecording::from_recording(rec))?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// A time window of a recording, the unit of classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub clip_id: String,
    pub participant_id: String,
    pub label: Option<Label>,
    pub fps: f64,
    /// Window bounds in seconds, `[start, end)`.
    pub start: f64,
    pub end: f64,
    pub pose: Vec<PoseFrame>,
    pub face: Vec<FaceFrame>,
}

impl Clip {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// Treat a whole recording as a single clip numbered `1`.
    pub fn from_recording(rec: &Recording) -> Self {
        let (start, end) = rec.span().unwrap_or((0.0, 0.0));
        Clip {
            clip_id: format!("{}_1", rec.participant_id),
            participant_id: rec.participant_id.clone(),
            label: rec.label,
            fps: rec.fps,
            start,
            end,
            pose: rec.pose.clone(),
            face: rec.face.clone(),
        }
    }
}

const WINDOW_EPS: f64 = 1e-9;

/// Cut a recording into consecutive non-overlapping windows of `clip_len`
/// seconds. A trailing remainder is kept as a shorter final clip when it is
/// at least half a window long and dropped otherwise.
pub fn segment(rec: &Recording, clip_len: f64) -> Result<Vec<Clip>> {
    if !(clip_len.is_finite() && clip_len > 0.0) {
        return Err(Error::InvalidArgument(format!("clip_len must be positive, got {clip_len}")));
    }
    let Some((start, end)) = rec.span() else {
        return Ok(Vec::new());
    };
    let duration = end - start;
    let full = (duration / clip_len + WINDOW_EPS).floor() as usize;
    let remainder = duration - full as f64 * clip_len;
    let mut bounds: Vec<(f64, f64)> = (0..full)
        .map(|k| (start + k as f64 * clip_len, start + (k + 1) as f64 * clip_len))
        .collect();
    if remainder > WINDOW_EPS * clip_len && remainder + WINDOW_EPS * clip_len >= clip_len / 2.0 {
        bounds.push((start + full as f64 * clip_len, end));
    }

    let mut pose = rec.pose.iter().peekable();
    let mut face = rec.face.iter().peekable();
    let clips = bounds
        .into_iter()
        .enumerate()
        .map(|(k, (ws, we))| {
            // frames of a dropped remainder are never consumed
            let cut = we - WINDOW_EPS * clip_len;
            let mut clip_pose = Vec::new();
            while let Some(f) = pose.next_if(|f| f.timestamp < cut) {
                clip_pose.push(f.clone());
            }
            let mut clip_face = Vec::new();
            while let Some(f) = face.next_if(|f| f.timestamp < cut) {
                clip_face.push(f.clone());
            }
            Clip {
                clip_id: format!("{}_{}", rec.participant_id, k + 1),
                participant_id: rec.participant_id.clone(),
                label: rec.label,
                fps: rec.fps,
                start: ws,
                end: we,
                pose: clip_pose,
                face: clip_face,
            }
        })
        .collect();
    Ok(clips)
}

/// Fill runs of missing joints of length at most `max_gap` frames by linear
/// interpolation (in time) between the detections bracketing the run.
/// Runs touching either end of the sequence are left missing. Filled joints
/// take the smaller of the two bracketing confidences.
pub fn interpolate_gaps(seq: &[PoseFrame], max_gap: usize) -> Vec<PoseFrame> {
    let mut out = seq.to_vec();
    if max_gap == 0 {
        return out;
    }
    for j in 0..JOINT_COUNT {
        let mut i = 0;
        while i < out.len() {
            if !out[i].joints[j].is_missing() {
                i += 1;
                continue;
            }
            let run_start = i;
            while i < out.len() && out[i].joints[j].is_missing() {
                i += 1;
            }
            let run_end = i; // exclusive
            if run_start == 0 || run_end == out.len() || run_end - run_start > max_gap {
                continue;
            }
            let (t0, a) = (out[run_start - 1].timestamp, out[run_start - 1].joints[j]);
            let (t1, b) = (out[run_end].timestamp, out[run_end].joints[j]);
            let confidence = a.confidence.min(b.confidence);
            for frame in &mut out[run_start..run_end] {
                let w = (frame.timestamp - t0) / (t1 - t0);
                frame.joints[j] = Joint::new(a.x + w * (b.x - a.x), a.y + w * (b.y - a.y), confidence);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(ts: f64, fill: Joint) -> PoseFrame {
        PoseFrame::new(ts, [fill; JOINT_COUNT])
    }

    fn recording_of(n_frames: usize, fps: f64) -> Recording {
        Recording {
            participant_id: "1".into(),
            label: Some(Label::Healthy),
            fps,
            pose: (0..n_frames)
                .map(|i| frame(i as f64 / fps, Joint::new(i as f64, 0.0, 1.0)))
                .collect(),
            face: Vec::new(),
        }
    }

    fn pose_json(frames: &[usize]) -> String {
        let joint = "[1.0,2.0,0.9]";
        let body: Vec<String> = frames
            .iter()
            .enumerate()
            .map(|(i, &n)| format!("[{}, [{}]]", i as f64 * 0.04, vec![joint; n].join(",")))
            .collect();
        format!(
            r#"{{"participant_id":"3","label":1,"fps":25.0,"pose":[{}],"face":[]}}"#,
            body.join(",")
        )
    }

    #[test]
    fn parses_well_formed_file() {
        let rec = parse_keypoint_str(&pose_json(&[14, 14])).unwrap();
        assert_eq!(rec.pose.len(), 2);
        assert_eq!(rec.label, Some(Label::Healthy));
        assert_eq!(rec.pose[1].joint(JointName::Neck).x, 1.0);
        let again = parse_keypoint_str(&recording_to_string(&rec).unwrap()).unwrap();
        assert_eq!(again, rec);
    }

    #[test]
    fn rejects_wrong_joint_count_with_frame_index() {
        let err = parse_keypoint_str(&pose_json(&[14, 14, 14, 14, 14, 13])).unwrap_err();
        assert_eq!(err.to_string(), "frame 5: expected 14 joints, found 13");
    }

    #[test]
    fn rejects_short_joint_triplet() {
        let text = pose_json(&[14]).replacen("[1.0,2.0,0.9]", "[1.0,2.0]", 1);
        let err = parse_keypoint_str(&text).unwrap_err();
        assert!(err.to_string().starts_with("frame 0: joint left_eye"), "{err}");
    }

    #[test]
    fn empty_frame_list_is_valid() {
        let rec =
            parse_keypoint_str(r#"{"participant_id":"x","label":null,"fps":30,"pose":[],"face":[]}"#).unwrap();
        assert!(rec.pose.is_empty() && rec.face.is_empty());
        assert_eq!(rec.label, None);
    }

    #[test]
    fn rejects_non_monotonic_timestamps() {
        let text = r#"{"participant_id":"x","label":0,"fps":25,"pose":[],
            "face":[[0.0,null],[0.04,null],[0.04,null]]}"#;
        let err = parse_keypoint_str(text).unwrap_err();
        assert!(matches!(err, Error::Ordering { stream: "face", frame: 2 }), "{err}");
    }

    #[test]
    fn rejects_bad_face_and_fps() {
        let text = r#"{"participant_id":"x","label":0,"fps":25,"pose":[],"face":[[0.0,[[1,2],[3,4]]]]}"#;
        assert!(parse_keypoint_str(text).unwrap_err().to_string().contains("expected 68 landmarks"));
        let text = r#"{"participant_id":"x","label":0,"fps":0,"pose":[],"face":[]}"#;
        assert!(parse_keypoint_str(text).is_err());
        let text = r#"{"participant_id":"x","label":2,"fps":25,"pose":[],"face":[]}"#;
        assert!(parse_keypoint_str(text).is_err());
    }

    #[test]
    fn segments_twenty_minutes_into_five_clips() {
        let rec = recording_of(20 * 60 * 5, 5.0);
        let clips = segment(&rec, 240.0).unwrap();
        assert_eq!(clips.len(), 5);
        assert!(clips.iter().all(|c| (c.duration() - 240.0).abs() < 1e-9));
        assert_eq!(clips[0].clip_id, "1_1");
        assert_eq!(clips[4].clip_id, "1_5");
        assert!(clips.iter().all(|c| c.pose.len() == 1200));
    }

    #[test]
    fn keeps_remainder_of_exactly_half_a_window() {
        // 18 min = 4 full windows + 2 min, and 2 min = clip_len / 2
        let rec = recording_of(18 * 60 * 5, 5.0);
        let clips = segment(&rec, 240.0).unwrap();
        assert_eq!(clips.len(), 5);
        assert!((clips[4].duration() - 120.0).abs() < 1e-9);
        assert_eq!(clips[4].pose.len(), 600);
    }

    #[test]
    fn drops_short_remainder_and_keeps_single_short_window() {
        let rec = recording_of((17.5 * 60.0 * 5.0) as usize, 5.0);
        assert_eq!(segment(&rec, 240.0).unwrap().len(), 4);

        let rec = recording_of(3 * 60 * 5, 5.0);
        let clips = segment(&rec, 240.0).unwrap();
        assert_eq!(clips.len(), 1);
        assert!((clips[0].duration() - 180.0).abs() < 1e-9);
        assert_eq!(clips[0].pose.len(), 900);
    }

    #[test]
    fn segment_edge_cases() {
        let rec = recording_of(0, 25.0);
        assert!(segment(&rec, 240.0).unwrap().is_empty());
        assert!(segment(&rec, 0.0).is_err());
    }

    fn wrist_seq(points: &[Option<(f64, f64)>]) -> Vec<PoseFrame> {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut f = frame(i as f64, Joint::new(5.0, 5.0, 1.0));
                *f.joint_mut(JointName::LeftWrist) = match p {
                    Some((x, y)) => Joint::new(*x, *y, 0.8),
                    None => Joint::MISSING,
                };
                f
            })
            .collect()
    }

    #[test]
    fn interpolates_single_missing_frame() {
        let seq = wrist_seq(&[Some((0.0, 0.0)), None, Some((2.0, 2.0))]);
        let out = interpolate_gaps(&seq, 5);
        let w = out[1].joint(JointName::LeftWrist);
        assert_eq!((w.x, w.y), (1.0, 1.0));
        assert!(!w.is_missing());
    }

    #[test]
    fn leaves_unbracketed_and_long_runs() {
        let seq = wrist_seq(&[None, None, Some((1.0, 1.0)), Some((2.0, 2.0))]);
        assert_eq!(interpolate_gaps(&seq, 5), seq);

        let seq = wrist_seq(&[Some((0.0, 0.0)), None, None, None, Some((4.0, 0.0))]);
        assert_eq!(interpolate_gaps(&seq, 2), seq);
        let filled = interpolate_gaps(&seq, 3);
        assert_eq!(filled[2].joint(JointName::LeftWrist).x, 2.0);
    }
}
