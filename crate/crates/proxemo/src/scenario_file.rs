//! Scenario files (TOML). Angles are radians, lengths metres, times seconds.
//! Only `goal` is required; everything else falls back to the defaults of
//! the simulator.
//!
//! ```toml
//! name = "hallway"
//! goal = [12.0, 0.0]
//! max_steps = 600
//!
//! [robot]
//! start = [0.0, 0.0]
//! heading = 0.0
//!
//! [[obstacles]]
//! a = [0.0, 2.0]
//! b = [12.0, 2.0]
//!
//! [[pedestrians]]
//! emotion = "sad"
//! start = [9.0, 0.1]
//! heading = 3.141592653589793
//! speed = 0.6
//! gait_seed = 1
//!
//! [planner]
//! resolution = 0.05
//! ```

use std::path::Path;

use proxemo_core::navsim::{
    PedestrianSpec, PerceptionConfig, PlannerConfig, Pose2, RobotSpec, Scenario, Segment, SensorConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{read_text, write_bytes, CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub goal: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub robot: RobotTable,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub obstacles: Vec<WallTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pedestrians: Vec<PedestrianTable>,
    #[serde(default)]
    pub sensor: SensorTable,
    #[serde(default)]
    pub perception: PerceptionTable,
    #[serde(default)]
    pub planner: PlannerTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallTable {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianTable {
    pub emotion: String,
    pub start: [f64; 2],
    pub heading: f64,
    /// Omitted: the walker's natural gait speed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gait_seed: Option<u64>,
}

// Optional-field tables; `apply` overwrites only what the file sets.
macro_rules! table {
    ($name:ident for $target:ty { $($field:ident : $ty:ty),* $(,)? }) => {
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            fn apply(&self, target: &mut $target) {
                $( if let Some(v) = self.$field.clone() { target.$field = v; } )*
            }

            fn from_target(target: &$target) -> Self {
                Self { $( $field: Some(target.$field.clone()), )* }
            }
        }
    };
}

table!(SensorTable for SensorConfig { beams: usize, max_range: f64 });
table!(PerceptionTable for PerceptionConfig {
    frame_rate: f64,
    field_of_view: f64,
    skeleton_noise: f64,
    velocity_window: usize,
    comfort_hold: usize,
});
table!(PlannerTable for PlannerConfig {
    linear_samples: usize,
    angular_samples: usize,
    horizon: f64,
    resolution: f64,
    safety_margin: f64,
    progress_weight: f64,
    clearance_weight: f64,
    velocity_weight: f64,
    clearance_cap: f64,
});

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_yaw_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_accel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_yaw_accel: Option<f64>,
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> std::result::Result<Scenario, String> {
        let mut s = Scenario::new(self.name.as_deref().unwrap_or("scenario"), self.goal);
        if let Some(v) = self.goal_tolerance {
            s.goal_tolerance = v;
        }
        if let Some(v) = self.dt {
            s.dt = v;
        }
        if let Some(v) = self.max_steps {
            s.max_steps = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        let r = &self.robot;
        let mut robot = RobotSpec::default();
        let [x, y] = r.start.unwrap_or([0.0, 0.0]);
        robot.start = Pose2::new(x, y, r.heading.unwrap_or(0.0));
        for (dst, src) in [
            (&mut robot.radius, r.radius),
            (&mut robot.max_speed, r.max_speed),
            (&mut robot.max_yaw_rate, r.max_yaw_rate),
            (&mut robot.max_accel, r.max_accel),
            (&mut robot.max_yaw_accel, r.max_yaw_accel),
        ] {
            if let Some(v) = src {
                *dst = v;
            }
        }
        s.robot = robot;
        s.obstacles = self.obstacles.iter().map(|w| Segment::new(w.a, w.b)).collect();
        for (i, p) in self.pedestrians.iter().enumerate() {
            let emotion = p.emotion.parse().map_err(|e| format!("pedestrian {i}: {e}"))?;
            let mut spec = PedestrianSpec::new(emotion, p.start, p.heading);
            spec.speed = p.speed;
            if let Some(r) = p.radius {
                spec.radius = r;
            }
            if let Some(g) = p.gait_seed {
                spec.gait_seed = g;
            }
            s.pedestrians.push(spec);
        }
        self.sensor.apply(&mut s.sensor);
        self.perception.apply(&mut s.perception);
        self.planner.apply(&mut s.planner);
        Ok(s)
    }

    /// Fully spelled-out file for `s`.
    pub fn from_scenario(s: &Scenario) -> Self {
        let r = &s.robot;
        Self {
            name: Some(s.name.clone()),
            goal: s.goal,
            goal_tolerance: Some(s.goal_tolerance),
            dt: Some(s.dt),
            max_steps: Some(s.max_steps),
            seed: Some(s.seed),
            robot: RobotTable {
                start: Some(r.start.position()),
                heading: Some(r.start.heading),
                radius: Some(r.radius),
                max_speed: Some(r.max_speed),
                max_yaw_rate: Some(r.max_yaw_rate),
                max_accel: Some(r.max_accel),
                max_yaw_accel: Some(r.max_yaw_accel),
            },
            obstacles: s.obstacles.iter().map(|w| WallTable { a: w.a, b: w.b }).collect(),
            pedestrians: s
                .pedestrians
                .iter()
                .map(|p| PedestrianTable {
                    emotion: p.emotion.name().to_string(),
                    start: p.start,
                    heading: p.heading,
                    speed: p.speed,
                    radius: Some(p.radius),
                    gait_seed: Some(p.gait_seed),
                })
                .collect(),
            sensor: SensorTable::from_target(&s.sensor),
            perception: PerceptionTable::from_target(&s.perception),
            planner: PlannerTable::from_target(&s.planner),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises to TOML")
    }
}

pub fn parse(text: &str, path: &Path) -> Result<Scenario> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
    let scenario = file
        .to_scenario()
        .map_err(|m| CliError::Config(format!("{}: {m}", path.display())))?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load(path: &Path) -> Result<Scenario> {
    parse(&read_text(path)?, path)
}

pub fn save(path: &Path, scenario: &Scenario) -> Result<()> {
    write_bytes(path, ScenarioFile::from_scenario(scenario).to_toml().as_bytes())
}
