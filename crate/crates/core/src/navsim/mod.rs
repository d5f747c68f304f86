//! Planar navigation among walking pedestrians.
//!
//! World frame: `x`, `y` on the floor, heights along a third axis. The robot
//! frame has `x` forward and `y` to the left. The robot's camera uses the
//! gait convention (`Y` up, `Z` along the robot's heading), which makes its
//! `X` axis point to the robot's left so that world-to-camera is a proper
//! rotation.

mod episode;
mod lidar;
mod perception;
mod planner;
mod scenarios;

pub use episode::{
    clearance_report, count_violations, run_episode, ClearanceReport, EpisodeLog, Outcome,
    PedestrianRecord, StepRecord,
};
pub use lidar::raycast_lidar;
pub use perception::{
    camera_frame_gait, true_view_group, Observation, Perception, PerceptionConfig,
    PerceptionMode,
};
pub use planner::{
    fuse_for_planning, plan_step, ActionClass, FusedScene, MovingSet, PlannerAction, PlannerConfig,
};
pub use scenarios::{back_approach, empty_corridor, front_approach};

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::gait::{EmotionClass, GaitGenerator, Pose, N_JOINTS};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Express a world point in this pose's frame (x forward, y left).
    pub fn to_local(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = libm::sincos(self.heading);
        let (dx, dy) = (p[0] - self.x, p[1] - self.y);
        [c * dx + s * dy, -s * dx + c * dy]
    }

    pub fn to_world(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = libm::sincos(self.heading);
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }
}

/// Static wall between two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn new(a: [f64; 2], b: [f64; 2]) -> Self {
        Self { a, b }
    }

    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        let (ux, uy) = (self.b[0] - self.a[0], self.b[1] - self.a[1]);
        let len2 = ux * ux + uy * uy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p[0] - self.a[0]) * ux + (p[1] - self.a[1]) * uy) / len2).clamp(0.0, 1.0)
        };
        libm::hypot(p[0] - (self.a[0] + t * ux), p[1] - (self.a[1] + t * uy))
    }
}

/// A pedestrian walking a straight line at constant speed while replaying
/// a synthetic gait.
#[derive(Debug, Clone, PartialEq)]
pub struct PedestrianSpec {
    pub emotion: EmotionClass,
    pub start: [f64; 2],
    pub heading: f64,
    /// Ground speed in m/s; `None` uses the gait's own walking speed.
    pub speed: Option<f64>,
    pub radius: f64,
    pub gait_seed: u64,
}

impl PedestrianSpec {
    pub fn new(emotion: EmotionClass, start: [f64; 2], heading: f64) -> Self {
        Self {
            emotion,
            start,
            heading,
            speed: None,
            radius: 0.3,
            gait_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pedestrian {
    pub spec: PedestrianSpec,
    pub generator: GaitGenerator,
}

impl Pedestrian {
    pub fn new(spec: PedestrianSpec) -> Self {
        let generator = GaitGenerator::from_seed(spec.emotion, spec.gait_seed);
        Self { spec, generator }
    }

    pub fn speed(&self) -> f64 {
        self.spec.speed.unwrap_or_else(|| self.generator.speed())
    }

    pub fn position(&self, t: f64) -> [f64; 2] {
        let (s, c) = libm::sincos(self.spec.heading);
        let d = self.speed() * t;
        [self.spec.start[0] + d * c, self.spec.start[1] + d * s]
    }

    /// Joint positions at time `t` as `[x, y, height]` in the world frame.
    pub fn skeleton(&self, t: f64) -> [[f64; 3]; N_JOINTS] {
        let Pose(local) = self.generator.pose_in_place(t);
        let [px, py] = self.position(t);
        let (s, c) = libm::sincos(self.spec.heading);
        // Local X is the walker's right, local -Z its facing direction.
        local.map(|[x, y, z]| [px + x * s - z * c, py - x * c - z * s, y])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSpec {
    pub start: Pose2,
    pub radius: f64,
    pub max_speed: f64,
    pub max_yaw_rate: f64,
    pub max_accel: f64,
    pub max_yaw_accel: f64,
}

impl Default for RobotSpec {
    fn default() -> Self {
        Self {
            start: Pose2::default(),
            radius: 0.25,
            max_speed: 1.0,
            max_yaw_rate: 1.5,
            max_accel: 1.0,
            max_yaw_accel: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RobotState {
    pub pose: Pose2,
    pub v: f64,
    pub omega: f64,
}

impl RobotState {
    /// Explicit Euler step of unicycle kinematics.
    pub fn integrate(&self, v: f64, omega: f64, dt: f64) -> Self {
        let (s, c) = libm::sincos(self.pose.heading);
        Self {
            pose: Pose2 {
                x: self.pose.x + v * c * dt,
                y: self.pose.y + v * s * dt,
                heading: self.pose.heading + omega * dt,
            },
            v,
            omega,
        }
    }
}

/// Sensor settings shared by LIDAR and camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig {
    pub beams: usize,
    pub max_range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            beams: 360,
            max_range: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub obstacles: Vec<Segment>,
    pub pedestrians: Vec<PedestrianSpec>,
    pub robot: RobotSpec,
    pub goal: [f64; 2],
    pub goal_tolerance: f64,
    pub dt: f64,
    pub max_steps: usize,
    pub seed: u64,
    pub sensor: SensorConfig,
    pub perception: PerceptionConfig,
    pub planner: PlannerConfig,
}

impl Scenario {
    pub fn new(name: &str, goal: [f64; 2]) -> Self {
        Self {
            name: name.into(),
            obstacles: Vec::new(),
            pedestrians: Vec::new(),
            robot: RobotSpec::default(),
            goal,
            goal_tolerance: 0.2,
            dt: 0.1,
            max_steps: 1000,
            seed: 0,
            sensor: SensorConfig::default(),
            perception: PerceptionConfig::default(),
            planner: PlannerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            bail!(Config, "time step must be positive");
        }
        if self.max_steps == 0 {
            bail!(Config, "max_steps must be positive");
        }
        let r = &self.robot;
        if !(r.radius > 0.0 && r.max_speed > 0.0 && r.max_yaw_rate > 0.0)
            || !(r.max_accel > 0.0 && r.max_yaw_accel > 0.0)
        {
            bail!(Config, "robot limits must be positive");
        }
        if self.sensor.beams == 0 || !(self.sensor.max_range > 0.0) {
            bail!(Config, "sensor needs beams and a positive range");
        }
        if !(self.goal_tolerance > 0.0) {
            bail!(Config, "goal tolerance must be positive");
        }
        self.perception.validate(self.dt)?;
        self.planner.validate()?;
        let start = r.start.position();
        for (i, p) in self.pedestrians.iter().enumerate() {
            if !(p.radius > 0.0) || p.speed.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
                bail!(Config, "pedestrian {i} needs a positive radius and finite speed");
            }
            if dist(p.start, start) < p.radius + r.radius {
                bail!(Config, "pedestrian {i} starts overlapping the robot");
            }
        }
        if self.obstacles.iter().any(|s| s.distance_to(start) < r.radius) {
            bail!(Config, "robot starts overlapping a wall");
        }
        Ok(())
    }
}

/// Obstacles and pedestrians, evaluated at any time.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub obstacles: Vec<Segment>,
    pub pedestrians: Vec<Pedestrian>,
}

impl World {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            obstacles: s.obstacles.clone(),
            pedestrians: s.pedestrians.iter().cloned().map(Pedestrian::new).collect(),
        }
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pose_frames_round_trip() {
        let pose = Pose2::new(1.0, -2.0, 0.7);
        let p = [3.5, 0.25];
        let back = pose.to_world(pose.to_local(p));
        assert!(dist(back, p) < 1e-12);
        let ahead = Pose2::new(0.0, 0.0, core::f64::consts::FRAC_PI_2).to_local([0.0, 2.0]);
        assert!(dist(ahead, [2.0, 0.0]) < 1e-12);
    }

    #[test]
    fn segment_distance() {
        let s = Segment::new([0.0, 0.0], [2.0, 0.0]);
        assert_eq!(s.distance_to([1.0, 1.0]), 1.0);
        assert_eq!(s.distance_to([3.0, 0.0]), 1.0);
        assert_eq!(Segment::new([1.0, 1.0], [1.0, 1.0]).distance_to([1.0, 2.0]), 1.0);
    }

    #[test]
    fn pedestrian_walks_along_heading_and_stands_upright() {
        let mut spec = PedestrianSpec::new(EmotionClass::Sad, [1.0, 2.0], core::f64::consts::PI);
        spec.speed = Some(0.5);
        let p = Pedestrian::new(spec);
        let at = p.position(2.0);
        assert!(dist(at, [0.0, 2.0]) < 1e-12);
        let sk = p.skeleton(2.0);
        // Pelvis over the walking position, head above it.
        assert!(dist([sk[0][0], sk[0][1]], at) < 0.2);
        assert!(sk[3][2] > sk[0][2]);
    }

    #[test]
    fn unicycle_step() {
        let s = RobotState::default().integrate(1.0, 0.5, 0.1);
        assert!((s.pose.x - 0.1).abs() < 1e-12);
        assert!((s.pose.heading - 0.05).abs() < 1e-12);
    }

    #[test]
    fn overlapping_start_is_rejected() {
        let mut s = Scenario::new("bad", [5.0, 0.0]);
        s.pedestrians.push(PedestrianSpec::new(EmotionClass::Happy, [0.3, 0.0], 0.0));
        assert!(s.validate().is_err());
        s.pedestrians[0].start = [3.0, 0.0];
        assert!(s.validate().is_ok());
    }
}
