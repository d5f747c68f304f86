//! Skeleton buffering and per-pedestrian emotion estimates.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Pose2, World};
use crate::embedding::gait_to_image;
use crate::error::{bail, Result};
use crate::gait::{view_group_of, Gait, Pose, ViewGroup, N_FRAMES, N_JOINTS};
use crate::model::ProxEmoNet;
use crate::nn::SoftmaxGrid;
use crate::proxemics::LidarScan;
use crate::rng::standard_normal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptionConfig {
    /// Skeleton tracker rate in Hz; must be a whole multiple of `1 / dt`.
    pub frame_rate: f64,
    /// Full horizontal camera field of view in radians.
    pub field_of_view: f64,
    /// Standard deviation of per-coordinate tracking noise in metres.
    pub skeleton_noise: f64,
    /// Steps of LIDAR track history used for velocity estimates.
    pub velocity_window: usize,
    /// The comfort distance in force is the largest value seen over this
    /// many recent steps (1 disables the hold).
    pub comfort_hold: usize,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            frame_rate: 30.0,
            field_of_view: 120f64.to_radians(),
            skeleton_noise: 0.0,
            velocity_window: 5,
            comfort_hold: 20,
        }
    }
}

impl PerceptionConfig {
    pub fn validate(&self, dt: f64) -> Result<()> {
        let per_step = self.frame_rate * dt;
        if !(per_step >= 1.0 && (per_step - libm::round(per_step)).abs() < 1e-9) {
            bail!(Config, "frame rate {} gives a fractional frame count per step", self.frame_rate);
        }
        if !(self.field_of_view > 0.0) || !(self.skeleton_noise >= 0.0) {
            bail!(Config, "field of view must be positive and noise non-negative");
        }
        if self.velocity_window == 0 || self.comfort_hold == 0 {
            bail!(Config, "velocity window and comfort hold must be at least one step");
        }
        Ok(())
    }

    fn frames_per_step(&self, dt: f64) -> usize {
        libm::round(self.frame_rate * dt) as usize
    }
}

/// Where emotion estimates come from.
#[derive(Debug, Clone, Copy)]
pub enum PerceptionMode<'a> {
    /// Run the classifier on buffered skeletons.
    ProxEmo(&'a ProxEmoNet),
    /// One-hot grid built from the pedestrian's true emotion and the true
    /// walking direction relative to the camera.
    Oracle,
    /// No emotion information; people are treated as plain obstacles.
    NoEmotion,
}

impl PerceptionMode<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            PerceptionMode::ProxEmo(_) => "proxemo",
            PerceptionMode::Oracle => "oracle",
            PerceptionMode::NoEmotion => "no-emotion",
        }
    }
}

/// View group of a pedestrian heading `ped_heading` seen by a camera looking
/// along `robot_heading` (both world-frame radians).
pub fn true_view_group(ped_heading: f64, robot_heading: f64) -> ViewGroup {
    view_group_of(180.0 - (ped_heading - robot_heading).to_degrees())
}

/// Express world-frame skeleton frames in the camera frame of `robot`.
pub fn camera_frame_gait(
    frames: &[[[f64; 3]; N_JOINTS]],
    robot: &Pose2,
    frame_rate: f64,
) -> Result<Gait> {
    let poses = frames
        .iter()
        .map(|joints| {
            Pose(joints.map(|[x, y, h]| {
                let [fwd, left] = robot.to_local([x, y]);
                [left, h, fwd]
            }))
        })
        .collect();
    Gait::new(poses, frame_rate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// `None` when the mode supplies no emotion information.
    pub grid: Option<SoftmaxGrid>,
    pub visible: bool,
    /// A full 75-frame window was available.
    pub warm: bool,
    /// `grid` is the uniform placeholder used before any prediction exists.
    pub provisional: bool,
    /// World-frame velocity from the LIDAR track; zero until two scans agree.
    pub velocity: [f64; 2],
}

#[derive(Debug, Clone, Default)]
struct Track {
    frames: VecDeque<[[f64; 3]; N_JOINTS]>,
    last: Option<SoftmaxGrid>,
    centers: VecDeque<(usize, [f64; 2])>,
}

/// Centre of the radius-`radius` circle best fitting the returns on person
/// `id`, in the world frame. Starts behind the closest return and refines by
/// Gauss-Newton on the radial residuals.
fn disc_center(scan: &LidarScan, robot: &Pose2, id: usize, radius: f64) -> Option<[f64; 2]> {
    let points: Vec<[f64; 2]> = scan
        .returns()
        .filter(|(_, who)| *who == Some(id))
        .map(|(p, _)| p)
        .collect();
    let near = points
        .iter()
        .copied()
        .min_by(|a, b| libm::hypot(a[0], a[1]).total_cmp(&libm::hypot(b[0], b[1])))?;
    let d = libm::hypot(near[0], near[1]);
    let mut c = [near[0] * (d + radius) / d, near[1] * (d + radius) / d];
    if points.len() >= 2 {
        for _ in 0..10 {
            // Normal equations of the 2x2 least-squares step.
            let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for p in &points {
                let (dx, dy) = (c[0] - p[0], c[1] - p[1]);
                let r = libm::hypot(dx, dy);
                if r == 0.0 {
                    continue;
                }
                let (jx, jy) = (dx / r, dy / r);
                let res = r - radius;
                a11 += jx * jx;
                a12 += jx * jy;
                a22 += jy * jy;
                b1 += jx * res;
                b2 += jy * res;
            }
            let det = a11 * a22 - a12 * a12;
            if det.abs() < 1e-12 {
                break;
            }
            let step = [(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det];
            c = [c[0] - step[0], c[1] - step[1]];
            if libm::hypot(step[0], step[1]) < 1e-9 {
                break;
            }
        }
    }
    Some(robot.to_world(c))
}

/// Per-pedestrian skeleton buffers and latest estimates.
#[derive(Debug, Clone)]
pub struct Perception {
    config: PerceptionConfig,
    dt: f64,
    frames_per_step: usize,
    tracks: Vec<Track>,
    rng: ChaCha8Rng,
}

impl Perception {
    pub fn new(pedestrians: usize, config: PerceptionConfig, dt: f64, seed: u64) -> Result<Self> {
        config.validate(dt)?;
        Ok(Self {
            config,
            dt,
            frames_per_step: config.frames_per_step(dt),
            tracks: (0..pedestrians).map(|_| Track::default()).collect(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn buffered(&self, id: usize) -> usize {
        self.tracks[id].frames.len()
    }

    /// Update tracks for simulation step `step` and return one observation
    /// per pedestrian.
    pub fn observe(
        &mut self,
        world: &World,
        robot: &Pose2,
        step: usize,
        scan: &LidarScan,
        mode: PerceptionMode<'_>,
    ) -> Result<Vec<Observation>> {
        let n = self.frames_per_step;
        let last_frame = step * n;
        let first_frame = (last_frame + 1).saturating_sub(n);
        let seen = scan.people();
        let mut out = Vec::with_capacity(world.pedestrians.len());
        for (id, ped) in world.pedestrians.iter().enumerate() {
            let [fwd, left] = robot.to_local(ped.position(step as f64 * n as f64 / self.config.frame_rate));
            let bearing = libm::atan2(left, fwd);
            let visible = seen.binary_search(&id).is_ok()
                && bearing.abs() <= self.config.field_of_view / 2.0;
            let track = &mut self.tracks[id];
            if visible {
                for f in first_frame..=last_frame {
                    let mut joints = ped.skeleton(f as f64 / self.config.frame_rate);
                    if self.config.skeleton_noise > 0.0 {
                        for v in joints.iter_mut().flatten() {
                            *v += self.config.skeleton_noise * standard_normal(&mut self.rng);
                        }
                    }
                    if track.frames.len() == N_FRAMES {
                        track.frames.pop_front();
                    }
                    track.frames.push_back(joints);
                }
            } else {
                track.frames.clear();
            }
            match disc_center(scan, robot, id, ped.spec.radius) {
                Some(c) => {
                    if track.centers.len() > self.config.velocity_window {
                        track.centers.pop_front();
                    }
                    track.centers.push_back((step, c));
                }
                None => track.centers.clear(),
            }
            let velocity = match (track.centers.front(), track.centers.back()) {
                (Some(&(s0, a)), Some(&(s1, b))) if s1 > s0 => {
                    let span = (s1 - s0) as f64 * self.dt;
                    [(b[0] - a[0]) / span, (b[1] - a[1]) / span]
                }
                _ => [0.0; 2],
            };
            let warm = track.frames.len() == N_FRAMES;
            let (grid, provisional) = match mode {
                PerceptionMode::NoEmotion => (None, false),
                PerceptionMode::Oracle => (
                    Some(SoftmaxGrid::one_hot(
                        ped.spec.emotion,
                        true_view_group(ped.spec.heading, robot.heading),
                    )),
                    false,
                ),
                PerceptionMode::ProxEmo(net) => {
                    if warm {
                        let frames: Vec<_> = track.frames.iter().copied().collect();
                        let gait = camera_frame_gait(&frames, robot, self.config.frame_rate)?;
                        let image = gait_to_image(&gait, net.config().input_size)?;
                        let grid = net.forward(&image)?;
                        track.last = Some(grid);
                        (Some(grid), false)
                    } else {
                        match track.last {
                            Some(last) if !visible => (Some(last), false),
                            _ => (Some(SoftmaxGrid::uniform()), true),
                        }
                    }
                }
            };
            out.push(Observation {
                grid,
                visible,
                warm,
                provisional,
                velocity,
            });
        }
        Ok(out)
    }
}
