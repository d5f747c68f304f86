//! SVG plots: overhead episode views and training curves.

use std::fmt::Write as _;

use proxemo_core::gait::EmotionClass;
use proxemo_core::navsim::Segment;

use crate::reports::{EpisodeTrace, HistoryRow};

const PX_PER_M: f64 = 60.0;
const MARGIN_M: f64 = 1.0;
/// Draw a comfort circle every this many steps.
const CIRCLE_EVERY: usize = 10;

fn emotion_color(e: Option<EmotionClass>) -> &'static str {
    match e {
        Some(EmotionClass::Angry) => "#d62728",
        Some(EmotionClass::Sad) => "#1f77b4",
        Some(EmotionClass::Happy) => "#2ca02c",
        Some(EmotionClass::Neutral) => "#7f7f7f",
        None => "#ff7f0e",
    }
}

struct Frame {
    min: [f64; 2],
    max: [f64; 2],
}

impl Frame {
    fn around(points: impl Iterator<Item = [f64; 2]>) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        if !min[0].is_finite() {
            min = [0.0; 2];
            max = [1.0; 2];
        }
        Self {
            min: [min[0] - MARGIN_M, min[1] - MARGIN_M],
            max: [max[0] + MARGIN_M, max[1] + MARGIN_M],
        }
    }

    fn size(&self) -> (f64, f64) {
        ((self.max[0] - self.min[0]) * PX_PER_M, (self.max[1] - self.min[1]) * PX_PER_M)
    }

    /// World metres to SVG pixels, y up.
    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        ((p[0] - self.min[0]) * PX_PER_M, (self.max[1] - p[1]) * PX_PER_M)
    }
}

fn polyline(out: &mut String, frame: &Frame, points: &[[f64; 2]], style: &str) {
    if points.is_empty() {
        return;
    }
    let coords: Vec<String> = points
        .iter()
        .map(|&p| {
            let (x, y) = frame.px(p);
            format!("{x:.1},{y:.1}")
        })
        .collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
}

fn circle(out: &mut String, frame: &Frame, c: [f64; 2], r: f64, style: &str) {
    let (x, y) = frame.px(c);
    let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="{:.1}" {style}/>"#, r * PX_PER_M);
}

/// Overhead view: walls, robot path, pedestrian paths and the comfort
/// distance in force drawn around each pedestrian every few steps.
pub fn episode_svg(trace: &EpisodeTrace, walls: &[Segment]) -> String {
    let goal = trace.goal();
    let points = trace
        .robot
        .iter()
        .copied()
        .chain(trace.pedestrians.values().flatten().map(|r| r.1))
        .chain(walls.iter().flat_map(|w| [w.a, w.b]))
        .chain(goal);
    let frame = Frame::around(points);
    let (w, h) = frame.size();
    let mut s = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    s.push('\n');
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for wall in walls {
        let (x1, y1) = frame.px(wall.a);
        let (x2, y2) = frame.px(wall.b);
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="black" stroke-width="3"/>"#
        );
    }
    for records in trace.pedestrians.values() {
        for (k, &(_, p, comfort, emotion)) in records.iter().enumerate() {
            if k % CIRCLE_EVERY == 0 && comfort > 0.0 {
                let style = format!(
                    r#"fill="none" stroke="{}" stroke-dasharray="4 3" stroke-opacity="0.6""#,
                    emotion_color(emotion)
                );
                circle(&mut s, &frame, p, comfort, &style);
            }
        }
        let path: Vec<[f64; 2]> = records.iter().map(|r| r.1).collect();
        polyline(&mut s, &frame, &path, r##"stroke="#ff7f0e" stroke-width="2""##);
    }
    polyline(&mut s, &frame, &trace.robot, r##"stroke="#17becf" stroke-width="2.5""##);
    let radius = trace.robot_radius();
    if let (Some(&first), Some(&last)) = (trace.robot.first(), trace.robot.last()) {
        circle(&mut s, &frame, first, radius, r##"fill="none" stroke="#17becf""##);
        circle(&mut s, &frame, last, radius, r##"fill="#17becf" fill-opacity="0.4""##);
    }
    if let Some(g) = goal {
        let (x, y) = frame.px(g);
        let _ = writeln!(
            s,
            r#"<path d="M{:.1},{:.1} l12,12 m0,-12 l-12,12" stroke="green" stroke-width="2"/>"#,
            x - 6.0,
            y - 6.0
        );
    }
    let label: Vec<String> = ["scenario", "mode", "outcome"]
        .iter()
        .filter_map(|k| trace.meta.get(*k).map(|v| format!("{k}: {v}")))
        .collect();
    let _ = writeln!(
        s,
        r#"<text x="8" y="18" font-family="sans-serif" font-size="13">{}</text>"#,
        label.join("  ")
    );
    s + "</svg>\n"
}

/// Loss (left scale) and accuracies (0 to 1, right scale) per epoch.
pub fn history_svg(rows: &[HistoryRow]) -> String {
    let (w, h, pad) = (640.0, 360.0, 40.0);
    let n = rows.len().max(2) as f64 - 1.0;
    let max_loss = rows.iter().map(|r| r.1).fold(0.0, f64::max).max(1e-12);
    let x = |i: usize| pad + (w - 2.0 * pad) * i as f64 / n;
    let y = |v: f64| h - pad - (h - 2.0 * pad) * v;
    let line = |vals: Vec<(usize, f64)>, color: &str| {
        let pts: Vec<String> = vals.iter().map(|&(i, v)| format!("{:.1},{:.1}", x(i), y(v))).collect();
        format!(r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "))
    };
    let mut s = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    s.push('\n');
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(s, "{}", line(rows.iter().enumerate().map(|(i, r)| (i, r.1 / max_loss)).collect(), "#d62728"));
    let _ = writeln!(s, "{}", line(rows.iter().enumerate().map(|(i, r)| (i, r.2)).collect(), "#1f77b4"));
    let val: Vec<(usize, f64)> = rows.iter().enumerate().filter_map(|(i, r)| r.3.map(|v| (i, v / 100.0))).collect();
    if !val.is_empty() {
        let _ = writeln!(s, "{}", line(val, "#2ca02c"));
    }
    let _ = writeln!(
        s,
        r##"<text x="{pad}" y="24" font-family="sans-serif" font-size="13"><tspan fill="#d62728">loss (max {max_loss:.3})</tspan> <tspan fill="#1f77b4">train accuracy</tspan> <tspan fill="#2ca02c">held-out accuracy</tspan></text>"##
    );
    s + "</svg>\n"
}
