//! Velocity-sampling local planner over the fused admissible set.
//!
//! Candidates `(v, omega)` come from the dynamic window reachable within one
//! step. Each is rolled out at constant velocity over the horizon and
//! rejected if any rolled-out position falls in the blocked region at the
//! time it is reached; people's inflated returns drift with their estimated
//! velocity over the rollout. Scores:
//!
//! | term      | definition                                             | weight |
//! |-----------|--------------------------------------------------------|--------|
//! | progress  | reduction of goal distance / (max speed x horizon)     | 1.0    |
//! | clearance | min signed distance to the comfort set, capped at 1 m  | 0.2    |
//! | velocity  | v / max speed                                          | 0.1    |

use alloc::vec::Vec;

use super::{RobotSpec, RobotState};
use crate::error::{bail, Result};
use crate::proxemics::{AdmissibleSet, LidarScan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub linear_samples: usize,
    pub angular_samples: usize,
    /// Rollout length in seconds.
    pub horizon: f64,
    /// Occupancy grid cell size in metres.
    pub resolution: f64,
    /// Extra distance kept from every return on top of the robot radius.
    pub safety_margin: f64,
    pub progress_weight: f64,
    pub clearance_weight: f64,
    pub velocity_weight: f64,
    pub clearance_cap: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            linear_samples: 7,
            angular_samples: 21,
            horizon: 2.0,
            resolution: 0.05,
            safety_margin: 0.05,
            progress_weight: 1.0,
            clearance_weight: 0.2,
            velocity_weight: 0.1,
            clearance_cap: 1.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.linear_samples < 2 || self.angular_samples < 2 {
            bail!(Config, "planner needs at least two samples per axis");
        }
        if !(self.horizon > 0.0 && self.resolution > 0.0 && self.clearance_cap > 0.0) {
            bail!(Config, "planner horizon, resolution and clearance cap must be positive");
        }
        if !(self.safety_margin >= 0.0) {
            bail!(Config, "safety margin must be non-negative");
        }
        Ok(())
    }
}

/// Which admissible set the chosen command satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionClass {
    /// Respects every person's comfort space.
    Comfort,
    /// Collision-free only.
    Safe,
    /// Nothing admissible; stop in place.
    Stop,
}

impl ActionClass {
    pub fn name(&self) -> &'static str {
        match self {
            ActionClass::Comfort => "comfort",
            ActionClass::Safe => "safe",
            ActionClass::Stop => "stop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerAction {
    pub v: f64,
    pub omega: f64,
    pub class: ActionClass,
}

/// Inflated returns of one person, drifting at a constant robot-frame velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingSet {
    pub set: AdmissibleSet,
    pub velocity: [f64; 2],
}

/// Static obstacles plus one moving set per person seen in the scan.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedScene {
    pub obstacles: AdmissibleSet,
    pub people: Vec<MovingSet>,
}

impl FusedScene {
    /// Whether robot-frame point `p` is blocked `tau` seconds from now.
    /// Static obstacles use the raster; people's disks are tested exactly.
    pub fn is_blocked(&self, p: [f64; 2], tau: f64) -> bool {
        self.obstacles.is_blocked(p)
            || self.people.iter().any(|m| {
                m.set.is_blocked_exact([p[0] - m.velocity[0] * tau, p[1] - m.velocity[1] * tau])
            })
    }

    /// Exact distance to the nearest inflated boundary at time `tau`.
    pub fn signed_distance(&self, p: [f64; 2], tau: f64) -> f64 {
        self.people
            .iter()
            .map(|m| m.set.signed_distance([p[0] - m.velocity[0] * tau, p[1] - m.velocity[1] * tau]))
            .fold(self.obstacles.signed_distance(p), f64::min)
    }
}

/// Fuse a scan for planning. Returns on person `id` grow by
/// `robot radius + margin + inflation(id)` and move with `velocity(id)`
/// (robot frame); other returns grow by `robot radius + margin`.
pub fn fuse_for_planning(
    scan: &LidarScan,
    inflation: impl Fn(usize) -> f64,
    velocity: impl Fn(usize) -> [f64; 2],
    robot: &RobotSpec,
    config: &PlannerConfig,
) -> Result<FusedScene> {
    let base = robot.radius + config.safety_margin;
    let reach = robot.max_speed * config.horizon + 2.0 * config.resolution;
    let static_disks = scan
        .returns()
        .filter(|(_, id)| id.is_none())
        .map(|(p, _)| (p, base))
        .collect();
    let obstacles = AdmissibleSet::from_disks(static_disks, reach, config.resolution)?;
    let people = scan
        .people()
        .into_iter()
        .map(|id| {
            let v = velocity(id);
            let radius = base + inflation(id);
            let disks = scan
                .returns()
                .filter(|(_, who)| *who == Some(id))
                .map(|(p, _)| (p, radius))
                .collect();
            let extent = reach + libm::hypot(v[0], v[1]) * config.horizon;
            Ok(MovingSet {
                set: AdmissibleSet::from_disks(disks, extent, config.resolution)?,
                velocity: v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FusedScene { obstacles, people })
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl DoubleEndedIterator<Item = f64> {
    (0..n).map(move |i| {
        if n == 1 || hi <= lo {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

/// Positions visited by a constant-velocity rollout from the robot-frame origin.
fn rollout(v: f64, omega: f64, dt: f64, steps: usize) -> Vec<[f64; 2]> {
    let mut s = RobotState::default();
    (0..steps)
        .map(|_| {
            s = s.integrate(v, omega, dt);
            s.pose.position()
        })
        .collect()
}

/// Choose one command. `goal` is in the robot frame; `comfort` is the
/// comfort-inflated scene and `safe` builds the plain collision scene on
/// demand.
pub fn plan_step(
    state: &RobotState,
    robot: &RobotSpec,
    goal: [f64; 2],
    comfort: &FusedScene,
    safe: impl FnOnce() -> Result<FusedScene>,
    config: &PlannerConfig,
    dt: f64,
) -> Result<PlannerAction> {
    let steps = libm::ceil(config.horizon / dt).max(1.0) as usize;
    let v_lo = (state.v - robot.max_accel * dt).max(0.0);
    let v_hi = (state.v + robot.max_accel * dt).min(robot.max_speed);
    let w_lo = (state.omega - robot.max_yaw_accel * dt).max(-robot.max_yaw_rate);
    let w_hi = (state.omega + robot.max_yaw_accel * dt).min(robot.max_yaw_rate);
    // Fastest first; turning rates ordered by magnitude so ties favour
    // going straight.
    let vs: Vec<f64> = linspace(v_lo, v_hi, config.linear_samples).rev().collect();
    let mut ws: Vec<f64> = linspace(w_lo, w_hi, config.angular_samples).collect();
    ws.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));

    let goal_dist = libm::hypot(goal[0], goal[1]);
    let span = robot.max_speed * config.horizon;
    let score = |v: f64, path: &[[f64; 2]]| {
        let end = path[path.len() - 1];
        let progress = (goal_dist - libm::hypot(goal[0] - end[0], goal[1] - end[1])) / span;
        let clearance = path
            .iter()
            .enumerate()
            .map(|(i, &p)| comfort.signed_distance(p, (i + 1) as f64 * dt))
            .fold(config.clearance_cap, f64::min);
        config.progress_weight * progress
            + config.clearance_weight * clearance / config.clearance_cap
            + config.velocity_weight * v / robot.max_speed
    };

    let pick = |scene: &FusedScene| -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for &v in &vs {
            for &w in &ws {
                let path = rollout(v, w, dt, steps);
                let blocked = path
                    .iter()
                    .enumerate()
                    .any(|(i, &p)| scene.is_blocked(p, (i + 1) as f64 * dt));
                if blocked {
                    continue;
                }
                let s = score(v, &path);
                if best.is_none_or(|(b, _, _)| s > b) {
                    best = Some((s, v, w));
                }
            }
        }
        best.map(|(_, v, w)| (v, w))
    };

    if let Some((v, omega)) = pick(comfort) {
        return Ok(PlannerAction { v, omega, class: ActionClass::Comfort });
    }
    if let Some((v, omega)) = pick(&safe()?) {
        return Ok(PlannerAction { v, omega, class: ActionClass::Safe });
    }
    Ok(PlannerAction { v: 0.0, omega: 0.0, class: ActionClass::Stop })
}
