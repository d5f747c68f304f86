//! The closed perception-planning loop and its summary metrics.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use super::perception::Perception;
use super::planner::{fuse_for_planning, plan_step, ActionClass};
use super::{dist, raycast_lidar, Pose2, RobotState, Scenario, World};
use crate::error::{bail, Error, Result};
use crate::gait::{EmotionClass, ViewGroup};
use crate::proxemics::{comfort_space, inflation_radius};

use super::perception::PerceptionMode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PedestrianRecord {
    pub id: usize,
    pub position: [f64; 2],
    /// Centre-to-centre distance to the robot.
    pub distance: f64,
    /// Distance from the robot's edge to the pedestrian's centre.
    pub clearance: f64,
    /// Comfort distance in force (metres): the largest estimate over the
    /// recent hold window, restarted when the first real estimate replaces
    /// the warm-up placeholder.
    pub comfort: f64,
    /// Inflation radius applied to this person's returns, held like `comfort`.
    pub inflation: f64,
    pub predicted: Option<(EmotionClass, ViewGroup)>,
    pub confidence: f64,
    pub visible: bool,
    pub warm: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub pose: Pose2,
    pub v: f64,
    pub omega: f64,
    pub action: ActionClass,
    pub pedestrians: Vec<PedestrianRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    GoalReached,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::GoalReached => "goal",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub scenario: String,
    pub mode: String,
    pub robot_radius: f64,
    pub start: Pose2,
    pub goal: [f64; 2],
    pub steps: Vec<StepRecord>,
    /// Robot pose after the last command.
    pub final_pose: Pose2,
    pub outcome: Outcome,
}

/// Simulate `scenario` until the goal, a collision or `max_steps`.
pub fn run_episode(scenario: &Scenario, mode: PerceptionMode<'_>) -> Result<EpisodeLog> {
    scenario.validate()?;
    let world = World::from_scenario(scenario);
    let dt = scenario.dt;
    let spec = &scenario.robot;
    let mut perception = Perception::new(
        world.pedestrians.len(),
        scenario.perception,
        dt,
        scenario.seed,
    )?;
    let mut state = RobotState {
        pose: spec.start,
        v: 0.0,
        omega: 0.0,
    };
    let mut steps = Vec::new();
    let mut outcome = Outcome::Timeout;
    let hold = scenario.perception.comfort_hold;
    // Per person: whether the last grid was provisional, and recent
    // (comfort, inflation) pairs.
    let mut recent: Vec<(bool, VecDeque<(f64, f64)>)> =
        world.pedestrians.iter().map(|_| (false, VecDeque::new())).collect();

    for step in 0..scenario.max_steps {
        let t = step as f64 * dt;
        if dist(state.pose.position(), scenario.goal) <= scenario.goal_tolerance {
            outcome = Outcome::GoalReached;
            break;
        }
        let scan = raycast_lidar(&world, &state.pose, t, &scenario.sensor);
        let observations = perception.observe(&world, &state.pose, step, &scan, mode)?;

        let mut records = Vec::with_capacity(world.pedestrians.len());
        let mut radii = Vec::with_capacity(world.pedestrians.len());
        let (sin_h, cos_h) = libm::sincos(state.pose.heading);
        let velocities: Vec<[f64; 2]> = observations
            .iter()
            .map(|o| {
                let [vx, vy] = o.velocity;
                [cos_h * vx + sin_h * vy, -sin_h * vx + cos_h * vy]
            })
            .collect();
        for (id, (ped, obs)) in world.pedestrians.iter().zip(&observations).enumerate() {
            let estimate = obs.grid.as_ref().map_or(0.0, comfort_space);
            let inflation = match inflation_radius(estimate, &scan.human_ranges(id)) {
                Ok(r) => r,
                Err(Error::NoHuman) => 0.0,
                Err(e) => return Err(e),
            };
            let (was_provisional, history) = &mut recent[id];
            if *was_provisional && !obs.provisional {
                history.clear();
            }
            *was_provisional = obs.provisional;
            if history.len() == hold {
                history.pop_front();
            }
            history.push_back((estimate, inflation));
            let (comfort, inflation) = history
                .iter()
                .fold((0.0, 0.0), |(c, r), &(ci, ri)| (f64::max(c, ci), f64::max(r, ri)));
            radii.push(inflation);
            let position = ped.position(t);
            let distance = dist(position, state.pose.position());
            records.push(PedestrianRecord {
                id,
                position,
                distance,
                clearance: distance - spec.radius,
                comfort,
                inflation,
                predicted: obs.grid.map(|g| g.argmax()),
                confidence: obs.grid.map_or(0.0, |g| g.max_prob()),
                visible: obs.visible,
                warm: obs.warm,
            });
        }

        let goal = state.pose.to_local(scenario.goal);
        let velocity = |id: usize| velocities[id];
        let comfort_set = fuse_for_planning(&scan, |id| radii[id], velocity, spec, &scenario.planner)?;
        let action = plan_step(
            &state,
            spec,
            goal,
            &comfort_set,
            || fuse_for_planning(&scan, |_| 0.0, velocity, spec, &scenario.planner),
            &scenario.planner,
            dt,
        )?;
        steps.push(StepRecord {
            step,
            time: t,
            pose: state.pose,
            v: action.v,
            omega: action.omega,
            action: action.class,
            pedestrians: records,
        });
        state = state.integrate(action.v, action.omega, dt);

        let t_next = t + dt;
        let p = state.pose.position();
        let hit_person = world
            .pedestrians
            .iter()
            .any(|q| dist(q.position(t_next), p) < q.spec.radius + spec.radius);
        let hit_wall = world.obstacles.iter().any(|s| s.distance_to(p) < spec.radius);
        if hit_person || hit_wall {
            outcome = Outcome::Collision;
            break;
        }
    }
    if outcome == Outcome::Timeout && dist(state.pose.position(), scenario.goal) <= scenario.goal_tolerance {
        outcome = Outcome::GoalReached;
    }
    Ok(EpisodeLog {
        scenario: scenario.name.clone(),
        mode: mode.name().into(),
        robot_radius: spec.radius,
        start: spec.start,
        goal: scenario.goal,
        steps,
        final_pose: state.pose,
        outcome,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearanceReport {
    pub steps: usize,
    pub outcome: Outcome,
    /// Smallest robot-edge to pedestrian-centre distance over the episode.
    pub min_clearance: Option<f64>,
    /// Mean over steps of the closest pedestrian's clearance.
    pub mean_clearance: Option<f64>,
    /// Steps on which some pedestrian's clearance was below its comfort distance.
    pub comfort_violations: usize,
    pub path_length: f64,
    /// Largest distance of the robot from the straight start-goal line.
    pub max_deviation: f64,
    pub action_counts: [usize; 3],
}

/// Steps on which any pedestrian's clearance falls below `comfort(record)`.
pub fn count_violations(log: &EpisodeLog, comfort: impl Fn(&PedestrianRecord) -> f64) -> usize {
    log.steps
        .iter()
        .filter(|s| s.pedestrians.iter().any(|p| p.clearance < comfort(p)))
        .count()
}

fn line_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let len = libm::hypot(ux, uy);
    if len == 0.0 {
        return dist(a, p);
    }
    ((p[0] - a[0]) * uy - (p[1] - a[1]) * ux).abs() / len
}

pub fn clearance_report(log: &EpisodeLog) -> Result<ClearanceReport> {
    if log.steps.is_empty() {
        bail!(InvalidInput, "episode log has no steps");
    }
    let nearest: Vec<f64> = log
        .steps
        .iter()
        .filter_map(|s| s.pedestrians.iter().map(|p| p.clearance).reduce(f64::min))
        .collect();
    let mut path: Vec<[f64; 2]> = log.steps.iter().map(|s| s.pose.position()).collect();
    path.push(log.final_pose.position());
    let path_length = path.windows(2).map(|w| dist(w[0], w[1])).sum();
    let start = log.start.position();
    let max_deviation = path
        .iter()
        .map(|&p| line_distance(start, log.goal, p))
        .fold(0.0, f64::max);
    let mut action_counts = [0; 3];
    for s in &log.steps {
        action_counts[s.action as usize] += 1;
    }
    Ok(ClearanceReport {
        steps: log.steps.len(),
        outcome: log.outcome,
        min_clearance: nearest.iter().copied().reduce(f64::min),
        mean_clearance: (!nearest.is_empty()).then(|| nearest.iter().sum::<f64>() / nearest.len() as f64),
        comfort_violations: count_violations(log, |p| p.comfort),
        path_length,
        max_deviation,
        action_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navsim::{back_approach, empty_corridor, front_approach};
    use crate::proxemics::ComfortConstants;
    use alloc::vec;

    fn record(clearance: f64, comfort: f64) -> PedestrianRecord {
        PedestrianRecord {
            id: 0,
            position: [0.0; 2],
            distance: clearance + 0.25,
            clearance,
            comfort,
            inflation: 0.0,
            predicted: None,
            confidence: 0.0,
            visible: true,
            warm: false,
        }
    }

    fn hand_log() -> EpisodeLog {
        let step = |i: usize, x: f64, y: f64, peds: Vec<PedestrianRecord>| StepRecord {
            step: i,
            time: i as f64 * 0.1,
            pose: Pose2::new(x, y, 0.0),
            v: 1.0,
            omega: 0.0,
            action: ActionClass::Comfort,
            pedestrians: peds,
        };
        EpisodeLog {
            scenario: "hand".into(),
            mode: "oracle".into(),
            robot_radius: 0.25,
            start: Pose2::default(),
            goal: [3.0, 0.0],
            steps: vec![
                step(0, 0.0, 0.0, vec![record(2.0, 1.0)]),
                step(1, 1.0, 0.5, vec![record(0.8, 1.0)]),
                step(2, 2.0, 0.0, vec![record(1.1, 1.0)]),
            ],
            final_pose: Pose2::new(3.0, 0.0, 0.0),
            outcome: Outcome::GoalReached,
        }
    }

    #[test]
    fn hand_built_log_summary() {
        let r = clearance_report(&hand_log()).unwrap();
        assert_eq!(r.steps, 3);
        assert_eq!(r.min_clearance, Some(0.8));
        assert!((r.mean_clearance.unwrap() - (2.0 + 0.8 + 1.1) / 3.0).abs() < 1e-12);
        assert_eq!(r.comfort_violations, 1);
        let leg = libm::hypot(1.0, 0.5);
        assert!((r.path_length - (2.0 * leg + 1.0)).abs() < 1e-12);
        assert_eq!(r.max_deviation, 0.5);
        assert_eq!(r.action_counts, [3, 0, 0]);
    }

    #[test]
    fn violations_shrink_with_comfort() {
        let log = hand_log();
        let mut prev = usize::MAX;
        for c in [3.0, 2.0, 1.5, 1.0, 0.9, 0.5, 0.0] {
            let n = count_violations(&log, |_| c);
            assert!(n <= prev);
            prev = n;
        }
        assert_eq!(prev, 0);
    }

    #[test]
    fn empty_log_is_an_error() {
        let mut log = hand_log();
        log.steps.clear();
        assert!(clearance_report(&log).is_err());
    }

    #[test]
    fn empty_world_goes_straight() {
        let s = empty_corridor();
        let log = run_episode(&s, PerceptionMode::NoEmotion).unwrap();
        assert_eq!(log.outcome, Outcome::GoalReached);
        let r = clearance_report(&log).unwrap();
        assert_eq!(r.comfort_violations, 0);
        assert_eq!(r.min_clearance, None);
        let euclid = dist(s.robot.start.position(), s.goal);
        assert!(r.path_length <= 1.05 * euclid);
    }

    #[test]
    fn episodes_are_deterministic_and_safe() {
        let s = front_approach(EmotionClass::Angry);
        let a = run_episode(&s, PerceptionMode::Oracle).unwrap();
        let b = run_episode(&s, PerceptionMode::Oracle).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.outcome, Outcome::GoalReached);
        for step in &a.steps {
            for p in &step.pedestrians {
                assert!(p.distance >= a.robot_radius + 0.3);
            }
        }
    }

    #[test]
    fn swerving_does_not_shrink_the_comfort_in_force() {
        let log = run_episode(&front_approach(EmotionClass::Sad), PerceptionMode::Oracle).unwrap();
        let c = ComfortConstants::default().sad / 100.0;
        for step in &log.steps {
            assert!((step.pedestrians[0].comfort - c).abs() < 1e-12, "step {}", step.step);
        }
    }

    #[test]
    fn back_approach_has_no_comfort_radius() {
        let log = run_episode(&back_approach(EmotionClass::Sad), PerceptionMode::Oracle).unwrap();
        assert_eq!(log.outcome, Outcome::GoalReached);
        for step in &log.steps {
            assert_eq!(step.pedestrians[0].comfort, 0.0);
        }
    }
}
