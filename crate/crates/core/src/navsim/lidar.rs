//! Ray casting against walls and pedestrian discs.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::{Pose2, SensorConfig, World};
use crate::proxemics::LidarScan;

/// Smallest positive `t` with `origin + t dir` on the circle, if any.
fn ray_circle(origin: [f64; 2], dir: [f64; 2], center: [f64; 2], radius: f64) -> Option<f64> {
    let f = [origin[0] - center[0], origin[1] - center[1]];
    let b = f[0] * dir[0] + f[1] * dir[1];
    let c = f[0] * f[0] + f[1] * f[1] - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let root = libm::sqrt(disc);
    [-b - root, -b + root].into_iter().find(|&t| t > 0.0)
}

fn ray_segment(origin: [f64; 2], dir: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<f64> {
    let e = [b[0] - a[0], b[1] - a[1]];
    let denom = dir[0] * e[1] - dir[1] * e[0];
    if denom == 0.0 {
        return None;
    }
    let w = [a[0] - origin[0], a[1] - origin[1]];
    let t = (w[0] * e[1] - w[1] * e[0]) / denom;
    let u = (w[0] * dir[1] - w[1] * dir[0]) / denom;
    (t > 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
}

/// Scan from `pose` at time `t`. Beam `i` points at `2 pi i / beams` in the
/// robot frame; misses report `max_range`.
pub fn raycast_lidar(world: &World, pose: &Pose2, t: f64, sensor: &SensorConfig) -> LidarScan {
    let n = sensor.beams;
    let origin = pose.position();
    let discs: Vec<([f64; 2], f64)> = world
        .pedestrians
        .iter()
        .map(|p| (p.position(t), p.spec.radius))
        .collect();
    let mut angles = Vec::with_capacity(n);
    let mut ranges = Vec::with_capacity(n);
    let mut hits = Vec::with_capacity(n);
    for i in 0..n {
        let a = TAU * i as f64 / n as f64;
        let (s, c) = libm::sincos(pose.heading + a);
        let dir = [c, s];
        let mut best = sensor.max_range;
        let mut who = None;
        for seg in &world.obstacles {
            if let Some(t) = ray_segment(origin, dir, seg.a, seg.b) {
                if t < best {
                    best = t;
                    who = None;
                }
            }
        }
        for (id, &(center, radius)) in discs.iter().enumerate() {
            if let Some(t) = ray_circle(origin, dir, center, radius) {
                if t < best {
                    best = t;
                    who = Some(id);
                }
            }
        }
        angles.push(a);
        ranges.push(best.max(1e-9));
        hits.push(who);
    }
    LidarScan::new(angles, ranges, sensor.max_range, hits).expect("ranges are clamped to (0, max]")
}
