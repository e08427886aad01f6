//! Wrist trajectories, speed and sign-space envelope statistics, and the
//! left-over-right trajectory plot images.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keypoints::{interpolate_gaps, Clip, Side};

/// Default speed below which a sample counts as a pause, in pixels/s.
pub const DEFAULT_PAUSE_EPS: f64 = 5.0;
/// Per-hand plot size; two stacked plots give a 1400 x 1558 image.
pub const DEFAULT_PLOT_WIDTH: usize = 1400;
pub const DEFAULT_PLOT_HEIGHT: usize = 779;

const PLOT_MARGIN: f64 = 0.05;
const X_COLOR: [u8; 3] = [31, 119, 180];
const Y_COLOR: [u8; 3] = [255, 127, 14];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub hand: Side,
    pub clip_id: String,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn new(hand: Side, clip_id: impl Into<String>, samples: Vec<TrajectorySample>) -> Self {
        Self {
            hand,
            clip_id: clip_id.into(),
            samples,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "x", "y"])?;
        for s in &self.samples {
            w.write_record([s.t.to_string(), s.x.to_string(), s.y.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Extract the wrist path of one hand. Short detection gaps (up to `max_gap`
/// frames) are filled first; frames where the wrist is still missing are
/// skipped. An all-missing clip yields an empty trajectory.
pub fn wrist_trajectory(clip: &Clip, hand: Side, max_gap: usize) -> Trajectory {
    let joint = hand.wrist();
    let frames = interpolate_gaps(&clip.pose, max_gap);
    let samples = frames
        .iter()
        .filter_map(|f| {
            let j = f.joint(joint);
            (!j.is_missing()).then_some(TrajectorySample {
                t: f.timestamp,
                x: j.x,
                y: j.y,
            })
        })
        .collect();
    Trajectory::new(hand, clip.clip_id.clone(), samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Velocity {
    pub t: f64,
    pub vx: f64,
    pub vy: f64,
}

impl Velocity {
    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

/// Forward-difference velocities, stamped with the earlier sample's time.
pub fn speed_series(traj: &Trajectory) -> Vec<Velocity> {
    traj.samples
        .windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            Velocity {
                t: w[0].t,
                vx: (w[1].x - w[0].x) / dt,
                vy: (w[1].y - w[0].y) / dt,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeStats {
    /// Peak-to-peak extent per axis, in pixels.
    pub x_amplitude: f64,
    pub y_amplitude: f64,
    /// Mean absolute per-axis speed, in pixels/s.
    pub mean_speed_x: f64,
    pub mean_speed_y: f64,
    /// Fraction of velocity samples slower than the pause threshold.
    pub pause_fraction: f64,
}

pub fn envelope_stats(traj: &Trajectory, pause_eps: f64) -> Result<EnvelopeStats> {
    if traj.samples.len() < 2 {
        return Err(Error::Insufficient("samples"));
    }
    let extent = |f: fn(&TrajectorySample) -> f64| {
        let (lo, hi) = traj
            .samples
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    let v = speed_series(traj);
    let n = v.len() as f64;
    Ok(EnvelopeStats {
        x_amplitude: extent(|s| s.x),
        y_amplitude: extent(|s| s.y),
        mean_speed_x: v.iter().map(|v| v.vx.abs()).sum::<f64>() / n,
        mean_speed_y: v.iter().map(|v| v.vy.abs()).sum::<f64>() / n,
        pause_fraction: v.iter().filter(|v| v.speed() < pause_eps).count() as f64 / n,
    })
}

/// Mean and population standard deviation of the speed magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedStats {
    pub mean_speed: f64,
    pub std_speed: f64,
}

pub fn speed_stats(traj: &Trajectory) -> Result<SpeedStats> {
    let speeds: Vec<f64> = speed_series(traj).iter().map(Velocity::speed).collect();
    if speeds.is_empty() {
        return Err(Error::Insufficient("samples"));
    }
    let n = speeds.len() as f64;
    let mean = speeds.iter().sum::<f64>() / n;
    let var = speeds.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    Ok(SpeedStats {
        mean_speed: mean,
        std_speed: var.sqrt(),
    })
}

/// An 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    /// Clip id plus the hand name or `stacked`.
    pub provenance: String,
}

impl TrajectoryImage {
    pub const CHANNELS: usize = 3;

    pub fn blank(width: usize, height: usize, provenance: impl Into<String>) -> Self {
        Self {
            width,
            height,
            pixels: vec![255; width * height * Self::CHANNELS],
            provenance: provenance.into(),
        }
    }

    pub fn pixel(&self, col: usize, row: usize) -> [u8; 3] {
        let i = (row * self.width + col) * Self::CHANNELS;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, col: i64, row: i64, color: [u8; 3]) {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return;
        }
        let i = (row as usize * self.width + col as usize) * Self::CHANNELS;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    pub fn is_blank(&self) -> bool {
        self.pixels.iter().all(|&p| p == 255)
    }

    /// Luma in `[0, 1]`, row-major.
    pub fn to_grayscale(&self) -> Vec<f64> {
        self.pixels
            .chunks_exact(Self::CHANNELS)
            .map(|p| (0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2])) / 255.0)
            .collect()
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut encoder = png::Encoder::new(BufWriter::new(file), self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&self.pixels)?;
        writer.finish()?;
        Ok(())
    }
}

/// Maps data coordinates onto the plot raster with a 5% margin on each side.
struct PlotScale {
    t0: f64,
    t_span: f64,
    v0: f64,
    v_span: f64,
    width: usize,
    height: usize,
}

impl PlotScale {
    fn new(samples: &[TrajectorySample], width: usize, height: usize) -> Self {
        let t0 = samples.first().map_or(0.0, |s| s.t);
        let t1 = samples.last().map_or(0.0, |s| s.t);
        let (v0, v1) = samples
            .iter()
            .flat_map(|s| [s.x, s.y])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Self {
            t0,
            t_span: t1 - t0,
            v0,
            v_span: v1 - v0,
            width,
            height,
        }
    }

    fn col(&self, t: f64) -> i64 {
        let frac = if self.t_span > 0.0 { (t - self.t0) / self.t_span } else { 0.5 };
        ((self.width - 1) as f64 * (PLOT_MARGIN + (1.0 - 2.0 * PLOT_MARGIN) * frac)).round() as i64
    }

    /// Larger values are drawn higher up.
    fn row(&self, v: f64) -> i64 {
        let frac = if self.v_span > 0.0 { (v - self.v0) / self.v_span } else { 0.5 };
        ((self.height - 1) as f64 * (1.0 - PLOT_MARGIN - (1.0 - 2.0 * PLOT_MARGIN) * frac)).round() as i64
    }
}

fn draw_line(img: &mut TrajectoryImage, (c0, r0): (i64, i64), (c1, r1): (i64, i64), color: [u8; 3]) {
    let (dc, dr) = ((c1 - c0).abs(), -(r1 - r0).abs());
    let (sc, sr) = ((c1 - c0).signum(), (r1 - r0).signum());
    let (mut c, mut r, mut err) = (c0, r0, dc + dr);
    loop {
        // 2-pixel stroke
        for (oc, or) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            img.put(c + oc, r + or, color);
        }
        if c == c1 && r == r1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dr {
            err += dr;
            c += sc;
        }
        if e2 <= dc {
            err += dc;
            r += sr;
        }
    }
}

/// Plot x(t) and y(t) of a trajectory as two polylines on a white canvas.
/// Time maps to columns, and both coordinates share one value axis spanning
/// their joint extent. Rendering is fully deterministic.
pub fn render_trajectory_plot(traj: &Trajectory, width: usize, height: usize) -> Result<TrajectoryImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!("plot size must be positive, got {width}x{height}")));
    }
    let mut img = TrajectoryImage::blank(width, height, format!("{}:{}", traj.clip_id, traj.hand.as_str()));
    if traj.is_empty() {
        return Ok(img);
    }
    let scale = PlotScale::new(&traj.samples, width, height);
    for (pick, color) in [(0usize, X_COLOR), (1, Y_COLOR)] {
        let points: Vec<(i64, i64)> = traj
            .samples
            .iter()
            .map(|s| (scale.col(s.t), scale.row(if pick == 0 { s.x } else { s.y })))
            .collect();
        if points.len() == 1 {
            draw_line(&mut img, points[0], points[0], color);
        }
        for w in points.windows(2) {
            draw_line(&mut img, w[0], w[1], color);
        }
    }
    Ok(img)
}

/// The same plot as vector graphics.
pub fn render_trajectory_svg(traj: &Trajectory, width: usize, height: usize) -> String {
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if !traj.is_empty() && width > 0 && height > 0 {
        let scale = PlotScale::new(&traj.samples, width, height);
        for (pick, color) in [(0usize, X_COLOR), (1, Y_COLOR)] {
            let pts: Vec<String> = traj
                .samples
                .iter()
                .map(|s| format!("{},{}", scale.col(s.t), scale.row(if pick == 0 { s.x } else { s.y })))
                .collect();
            let _ = writeln!(
                svg,
                "<polyline fill=\"none\" stroke=\"rgb({},{},{})\" stroke-width=\"2\" points=\"{}\"/>",
                color[0],
                color[1],
                color[2],
                pts.join(" ")
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Vertically stack `top` over `bottom` (left hand over right hand).
pub fn stack_images(top: &TrajectoryImage, bottom: &TrajectoryImage) -> Result<TrajectoryImage> {
    if top.width != bottom.width {
        return Err(Error::WidthMismatch(top.width, bottom.width));
    }
    let mut pixels = Vec::with_capacity(top.pixels.len() + bottom.pixels.len());
    pixels.extend_from_slice(&top.pixels);
    pixels.extend_from_slice(&bottom.pixels);
    let clip = top.provenance.split(':').next().unwrap_or_default();
    Ok(TrajectoryImage {
        width: top.width,
        height: top.height + bottom.height,
        pixels,
        provenance: format!("{clip}:stacked"),
    })
}

/// Bilinear resize with pixel-centre alignment.
pub fn resize_bilinear(img: &TrajectoryImage, width: usize, height: usize) -> TrajectoryImage {
    let mut out = TrajectoryImage::blank(width, height, img.provenance.clone());
    if img.width == 0 || img.height == 0 {
        return out;
    }
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    for row in 0..height {
        let fy = ((row as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f64);
        let (y0, wy) = (fy.floor() as usize, fy - fy.floor());
        let y1 = (y0 + 1).min(img.height - 1);
        for col in 0..width {
            let fx = ((col as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f64);
            let (x0, wx) = (fx.floor() as usize, fx - fx.floor());
            let x1 = (x0 + 1).min(img.width - 1);
            let (a, b, c, d) = (img.pixel(x0, y0), img.pixel(x1, y0), img.pixel(x0, y1), img.pixel(x1, y1));
            let mut px = [0u8; 3];
            for k in 0..3 {
                let top = f64::from(a[k]) * (1.0 - wx) + f64::from(b[k]) * wx;
                let bot = f64::from(c[k]) * (1.0 - wx) + f64::from(d[k]) * wx;
                px[k] = (top * (1.0 - wy) + bot * wy).round() as u8;
            }
            out.put(col as i64, row as i64, px);
        }
    }
    out
}

/// Render both hands of a clip and stack left over right.
pub fn stacked_clip_image(clip: &Clip, max_gap: usize, width: usize, height: usize) -> Result<TrajectoryImage> {
    let left = render_trajectory_plot(&wrist_trajectory(clip, Side::Left, max_gap), width, height)?;
    let right = render_trajectory_plot(&wrist_trajectory(clip, Side::Right, max_gap), width, height)?;
    stack_images(&left, &right)
}

pub fn write_svg(path: &Path, svg: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(svg.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keypoints::{Joint, JointName, PoseFrame, JOINT_COUNT};

    fn traj(points: &[(f64, f64, f64)]) -> Trajectory {
        Trajectory::new(
            Side::Left,
            "1_1",
            points.iter().map(|&(t, x, y)| TrajectorySample { t, x, y }).collect(),
        )
    }

    fn clip_with_wrist(points: &[Option<(f64, f64)>]) -> Clip {
        let pose = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut f = PoseFrame::new(i as f64 * 0.04, [Joint::new(1.0, 1.0, 1.0); JOINT_COUNT]);
                *f.joint_mut(JointName::LeftWrist) = p.map_or(Joint::MISSING, |(x, y)| Joint::new(x, y, 0.9));
                f
            })
            .collect();
        Clip {
            clip_id: "4_2".into(),
            participant_id: "4".into(),
            label: None,
            fps: 25.0,
            start: 0.0,
            end: points.len() as f64 * 0.04,
            pose,
            face: Vec::new(),
        }
    }

    #[test]
    fn extracts_wrist_samples() {
        let clip = clip_with_wrist(&[Some((100.0, 200.0)); 4]);
        let t = wrist_trajectory(&clip, Side::Left, 5);
        assert_eq!(t.samples.len(), 4);
        assert!(t.samples.iter().all(|s| s.x == 100.0 && s.y == 200.0));

        let clip = clip_with_wrist(&[Some((0.0, 0.0)), Some((3.0, 4.0)), Some((6.0, 8.0))]);
        let xs: Vec<_> = wrist_trajectory(&clip, Side::Left, 5).samples.iter().map(|s| (s.x, s.y)).collect();
        assert_eq!(xs, vec![(0.0, 0.0), (3.0, 4.0), (6.0, 8.0)]);
    }

    #[test]
    fn fills_missing_wrist_via_interpolation() {
        let clip = clip_with_wrist(&[Some((0.0, 0.0)), None, Some((4.0, 2.0))]);
        let t = wrist_trajectory(&clip, Side::Left, 1);
        assert_eq!(t.samples.len(), 3);
        assert!((t.samples[1].x - 2.0).abs() < 1e-12 && (t.samples[1].y - 1.0).abs() < 1e-12);
        assert_eq!(wrist_trajectory(&clip, Side::Left, 0).samples.len(), 2);
        assert!(wrist_trajectory(&clip_with_wrist(&[None, None]), Side::Left, 5).is_empty());
    }

    #[test]
    fn speed_examples() {
        let v = speed_series(&traj(&[(0.0, 0.0, 0.0), (1.0, 3.0, 4.0)]));
        assert_eq!(v, vec![Velocity { t: 0.0, vx: 3.0, vy: 4.0 }]);
        let v = speed_series(&traj(&[(0.0, 0.0, 0.0), (0.5, 1.0, 0.0)]));
        assert_eq!((v[0].vx, v[0].vy), (2.0, 0.0));
        let v = speed_series(&traj(&[(0.0, 5.0, 5.0), (0.1, 5.0, 5.0), (0.2, 5.0, 5.0)]));
        assert!(v.iter().all(|v| v.vx == 0.0 && v.vy == 0.0));
        assert!(speed_series(&traj(&[(0.0, 1.0, 1.0)])).is_empty());
    }

    #[test]
    fn envelope_examples() {
        let e = envelope_stats(&traj(&[(0.0, 7.0, 7.0), (1.0, 7.0, 7.0), (2.0, 7.0, 7.0)]), 5.0).unwrap();
        assert_eq!((e.x_amplitude, e.y_amplitude, e.pause_fraction), (0.0, 0.0, 1.0));

        let e = envelope_stats(&traj(&[(0.0, 10.0, 0.0), (1.0, 110.0, 0.0), (2.0, 10.0, 0.0)]), 5.0).unwrap();
        assert_eq!(e.x_amplitude, 100.0);
        assert_eq!(e.mean_speed_x, 100.0);
        assert_eq!(e.pause_fraction, 0.0);

        assert!(matches!(envelope_stats(&traj(&[(0.0, 1.0, 1.0)]), 5.0), Err(Error::Insufficient(_))));
    }

    #[test]
    fn sinusoid_has_no_pauses_below_min_speed() {
        // x = 50 sin(t), y = 50 cos(t): |v| = 50 for every t analytically; the
        // forward-difference speed over dt is 100 sin(dt/2)/dt.
        let dt = 0.01;
        let samples: Vec<_> = (0..2000)
            .map(|i| {
                let t = i as f64 * dt;
                (t, 50.0 * t.sin(), 50.0 * t.cos())
            })
            .collect();
        let discrete = 100.0 * (dt / 2.0).sin() / dt;
        let e = envelope_stats(&traj(&samples), discrete - 1e-6).unwrap();
        assert_eq!(e.pause_fraction, 0.0);
        let e = envelope_stats(&traj(&samples), discrete + 1e-6).unwrap();
        assert_eq!(e.pause_fraction, 1.0);
    }

    #[test]
    fn empty_trajectory_renders_blank() {
        let img = render_trajectory_plot(&traj(&[]), 40, 30).unwrap();
        assert_eq!(img.pixels.len(), 40 * 30 * 3);
        assert!(img.is_blank());
        assert!(render_trajectory_plot(&traj(&[]), 0, 30).is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let t = traj(&[(0.0, 1.0, 9.0), (0.5, 4.0, 2.0), (1.0, -3.0, 5.0), (2.0, 8.0, 8.0)]);
        let a = render_trajectory_plot(&t, 120, 80).unwrap();
        let b = render_trajectory_plot(&t, 120, 80).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_blank());
    }

    #[test]
    fn constant_trajectory_draws_two_horizontal_lines() {
        let (w, h) = (101usize, 61usize);
        let t = traj(&[(0.0, 100.0, 200.0), (1.0, 100.0, 200.0), (2.0, 100.0, 200.0)]);
        let img = render_trajectory_plot(&t, w, h).unwrap();
        // value axis spans [100, 200]: x sits on the bottom margin, y on the top
        let x_row = ((h - 1) as f64 * 0.95).round() as usize;
        let y_row = ((h - 1) as f64 * 0.05).round() as usize;
        let c0 = ((w - 1) as f64 * 0.05).round() as usize;
        let c1 = ((w - 1) as f64 * 0.95).round() as usize;
        for row in 0..h {
            for col in 0..w {
                let on_stroke = |r: usize| (row == r || row == r + 1) && col >= c0 && col <= c1 + 1;
                let expected = if on_stroke(y_row) {
                    Y_COLOR
                } else if on_stroke(x_row) {
                    X_COLOR
                } else {
                    [255, 255, 255]
                };
                assert_eq!(img.pixel(col, row), expected, "pixel ({col}, {row})");
            }
        }
    }

    #[test]
    fn stacking_layout() {
        let mut top = TrajectoryImage::blank(10, 10, "1_1:left");
        top.pixels.fill(0);
        let bottom = TrajectoryImage::blank(10, 10, "1_1:right");
        let s = stack_images(&top, &bottom).unwrap();
        assert_eq!((s.width, s.height), (10, 20));
        assert!((0..10).all(|r| s.pixel(3, r) == [0, 0, 0]));
        assert!((10..20).all(|r| s.pixel(3, r) == [255, 255, 255]));
        assert_eq!(s.provenance, "1_1:stacked");

        let blank = TrajectoryImage::blank(10, 10, "a");
        assert!(stack_images(&blank, &blank).unwrap().is_blank());
        assert!(stack_images(&blank, &TrajectoryImage::blank(9, 10, "b")).is_err());
    }

    #[test]
    fn default_geometry_stacks_to_1400_by_1558() {
        let t = traj(&[(0.0, 1.0, 2.0), (1.0, 3.0, 1.0)]);
        let l = render_trajectory_plot(&t, DEFAULT_PLOT_WIDTH, DEFAULT_PLOT_HEIGHT).unwrap();
        let s = stack_images(&l, &l).unwrap();
        assert_eq!((s.width, s.height), (1400, 1558));
        assert_eq!(s.pixels.len(), 1400 * 1558 * 3);
    }

    #[test]
    fn resize_preserves_uniform_images() {
        let mut img = TrajectoryImage::blank(50, 40, "x");
        img.pixels.fill(100);
        let small = resize_bilinear(&img, 8, 8);
        assert!(small.pixels.iter().all(|&p| p == 100));
        assert_eq!(small.to_grayscale().len(), 64);
    }
}
