//! Built-in scenarios used by tests and the command line.

use core::f64::consts::PI;

use super::{PedestrianSpec, Scenario};
use crate::gait::EmotionClass;

/// No obstacles, goal 8 m ahead.
pub fn empty_corridor() -> Scenario {
    let mut s = Scenario::new("empty", [8.0, 0.0]);
    s.max_steps = 300;
    s
}

/// A pedestrian walks head-on toward the robot, slightly off its line.
pub fn front_approach(emotion: EmotionClass) -> Scenario {
    let mut s = Scenario::new("front-approach", [12.0, 0.0]);
    let mut ped = PedestrianSpec::new(emotion, [9.0, 0.1], PI);
    ped.speed = Some(0.6);
    ped.gait_seed = 1;
    s.pedestrians.push(ped);
    s.max_steps = 600;
    s
}

/// The robot overtakes a slower pedestrian walking away from it.
pub fn back_approach(emotion: EmotionClass) -> Scenario {
    let mut s = Scenario::new("back-approach", [12.0, 0.0]);
    let mut ped = PedestrianSpec::new(emotion, [2.5, 0.1], 0.0);
    ped.speed = Some(0.4);
    ped.gait_seed = 1;
    s.pedestrians.push(ped);
    s.max_steps = 600;
    s
}
