//! Synthetic gait generator standing in for recorded walking datasets.
//!
//! A sinusoidal limb-swing model: legs and arms swing in the sagittal plane
//! with the stride phase, the pelvis bobs twice per stride, and the torso and
//! head hold an emotion-dependent pitch. Each emotion has its own parameter
//! row (see [`EmotionProfile::of`]); per-subject jitter and the starting phase
//! come from the seed, and `noise` adds isotropic Gaussian joint noise.
//!
//! | emotion | stride s | speed m/s | arm swing | elbow | torso pitch | head pitch | shoulders | knee |
//! |---------|----------|-----------|-----------|-------|-------------|------------|-----------|------|
//! | angry   | 0.80     | 1.60      | 0.70      | 0.90  | 0.14        | 0.05       | 1.15      | 0.65 |
//! | sad     | 1.35     | 0.70      | 0.10      | 0.10  | 0.30        | 0.45       | 0.88      | 0.30 |
//! | happy   | 0.95     | 1.45      | 0.55      | 0.35  | -0.04       | -0.12      | 1.08      | 0.55 |
//! | neutral | 1.05     | 1.20      | 0.32      | 0.20  | 0.02        | 0.04       | 1.00      | 0.45 |
//!
//! Angles are radians; positive pitch leans forward (towards `-Z`).

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmotionClass, Gait, GaitSource, LabeledGait, Pose, ViewGroup, N_FRAMES};
use crate::rng::standard_normal;

pub const DEFAULT_FRAME_RATE: f64 = 30.0;

const NOMINAL_HEIGHT: f64 = 1.70;
const JITTER: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionProfile {
    /// Seconds per full stride (two steps).
    pub stride_period: f64,
    /// Forward walking speed in m/s.
    pub speed: f64,
    pub arm_swing: f64,
    pub elbow_flex: f64,
    pub torso_pitch: f64,
    pub head_pitch: f64,
    /// Multiplier on shoulder width; larger is a more expanded posture.
    pub shoulder_scale: f64,
    pub knee_flex: f64,
}

impl EmotionProfile {
    pub const fn of(emotion: EmotionClass) -> Self {
        let r = match emotion {
            EmotionClass::Angry => [0.80, 1.60, 0.70, 0.90, 0.14, 0.05, 1.15, 0.65],
            EmotionClass::Sad => [1.35, 0.70, 0.10, 0.10, 0.30, 0.45, 0.88, 0.30],
            EmotionClass::Happy => [0.95, 1.45, 0.55, 0.35, -0.04, -0.12, 1.08, 0.55],
            EmotionClass::Neutral => [1.05, 1.20, 0.32, 0.20, 0.02, 0.04, 1.00, 0.45],
        };
        Self {
            stride_period: r[0],
            speed: r[1],
            arm_swing: r[2],
            elbow_flex: r[3],
            torso_pitch: r[4],
            head_pitch: r[5],
            shoulder_scale: r[6],
            knee_flex: r[7],
        }
    }

    fn jittered(&self, rng: &mut impl Rng) -> Self {
        let mut j = |v: f64| v * (1.0 + JITTER * rng.gen_range(-1.0..=1.0));
        Self {
            stride_period: j(self.stride_period),
            speed: j(self.speed),
            arm_swing: j(self.arm_swing),
            elbow_flex: j(self.elbow_flex),
            torso_pitch: j(self.torso_pitch),
            head_pitch: j(self.head_pitch),
            shoulder_scale: j(self.shoulder_scale),
            knee_flex: j(self.knee_flex),
        }
    }
}

/// A continuous-time walker: one subject with fixed proportions and style.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitGenerator {
    pub emotion: EmotionClass,
    pub profile: EmotionProfile,
    /// Body height in metres.
    pub height: f64,
    /// Stride phase offset in seconds.
    pub phase: f64,
}

impl GaitGenerator {
    pub fn nominal(emotion: EmotionClass) -> Self {
        Self {
            emotion,
            profile: EmotionProfile::of(emotion),
            height: NOMINAL_HEIGHT,
            phase: 0.0,
        }
    }

    /// Subject jitter and start phase drawn from `seed`.
    pub fn from_seed(emotion: EmotionClass, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = EmotionProfile::of(emotion).jittered(&mut rng);
        let height = NOMINAL_HEIGHT * rng.gen_range(0.92..=1.08);
        let phase = rng.gen_range(0.0..profile.stride_period);
        Self {
            emotion,
            profile,
            height,
            phase,
        }
    }

    pub fn speed(&self) -> f64 {
        self.profile.speed
    }

    /// Pose at time `t` with the pelvis held over the origin (walking in place).
    pub fn pose_in_place(&self, t: f64) -> Pose {
        let p = &self.profile;
        let h = self.height;
        let phi = TAU * (t + self.phase) / p.stride_period;

        let thigh = 0.245 * h;
        let shin = 0.246 * h;
        let upper_arm = 0.172 * h;
        let forearm = 0.157 * h;
        let shoulder_half = 0.11 * h * p.shoulder_scale;
        let hip_half = 0.058 * h;

        // hip swing amplitude follows the step length of this speed and cadence
        let step = p.speed * p.stride_period / 2.0;
        let leg_swing = libm::asin((step / (2.0 * (thigh + shin))).min(0.9));

        let bob = 0.012 * h * libm::cos(2.0 * phi) * (p.speed / 1.2);
        let sway = 0.008 * h * libm::sin(phi);
        let pelvis = [sway, thigh + shin - 0.01 * h + bob, 0.0];

        let torso = p.torso_pitch;
        let up = [0.0, libm::cos(torso), -libm::sin(torso)];
        let spine = add(pelvis, scale(up, 0.16 * h));
        let neck = add(spine, scale(up, 0.15 * h));
        let head_dir = [0.0, libm::cos(torso + p.head_pitch), -libm::sin(torso + p.head_pitch)];
        let head = add(neck, scale(head_dir, 0.10 * h));

        // sagittal-plane limb direction: angle 0 hangs straight down, positive swings forward
        let limb = |a: f64| [0.0, -libm::cos(a), -libm::sin(a)];

        let mut pose = Pose::default();
        pose.0[0] = pelvis;
        pose.0[1] = spine;
        pose.0[2] = neck;
        pose.0[3] = head;

        for (side, sign, swing) in [(0usize, 1.0, libm::sin(phi)), (1, -1.0, -libm::sin(phi))] {
            let base = 4 + 3 * side;
            let shoulder = add(neck, [sign * shoulder_half, -0.02 * h, 0.0]);
            let a = p.arm_swing * swing + 0.5 * torso;
            let elbow = add(shoulder, scale(limb(a), upper_arm));
            let flex = p.elbow_flex * (0.6 + 0.4 * swing.max(0.0));
            let hand = add(elbow, scale(limb(a + flex), forearm));
            pose.0[base] = shoulder;
            pose.0[base + 1] = elbow;
            pose.0[base + 2] = hand;
        }

        for (side, sign, offset) in [(0usize, 1.0, PI), (1, -1.0, 0.0)] {
            let base = 10 + 3 * side;
            let leg_phase = phi + offset;
            let hip = add(pelvis, [sign * hip_half, -0.02 * h, 0.0]);
            let a = leg_swing * libm::sin(leg_phase);
            let knee = add(hip, scale(limb(a), thigh));
            // knee bends most while the leg swings through
            let bend = p.knee_flex * 0.5 * (1.0 + libm::cos(leg_phase));
            let foot = add(knee, scale(limb(a - bend), shin));
            pose.0[base] = hip;
            pose.0[base + 1] = knee;
            pose.0[base + 2] = foot;
        }
        pose
    }

    /// Pose at time `t` including forward travel along `-Z` from `t = 0`.
    pub fn pose_walking(&self, t: f64) -> Pose {
        let mut pose = self.pose_in_place(t);
        let dz = -self.profile.speed * t;
        pose.0.iter_mut().for_each(|j| j[2] += dz);
        pose
    }

    /// Sample a 75-frame window starting at `t = 0`.
    pub fn sample(&self, frame_rate: f64, noise: f64, rng: &mut impl Rng) -> Gait {
        let frames: Vec<Pose> = (0..N_FRAMES)
            .map(|k| {
                let mut pose = self.pose_walking(k as f64 / frame_rate);
                if noise > 0.0 {
                    for v in pose.0.iter_mut().flatten() {
                        *v += noise * standard_normal(rng);
                    }
                }
                pose
            })
            .collect();
        Gait::new(frames, frame_rate).expect("generator output is finite")
    }
}

/// Deterministic labelled walk for `(emotion, seed, noise)`.
///
/// `noise` is the standard deviation of per-coordinate joint noise in metres;
/// negative values are treated as zero. The result is unrotated, hence front.
pub fn synthesize_gait(emotion: EmotionClass, seed: u64, noise: f64) -> LabeledGait {
    let generator = GaitGenerator::from_seed(emotion, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let gait = generator.sample(DEFAULT_FRAME_RATE, noise.max(0.0), &mut rng);
    LabeledGait {
        gait,
        emotion,
        view_group: ViewGroup::Front,
        source: GaitSource::Synthetic,
    }
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::{bone_lengths, distance};

    #[test]
    fn synthesis_is_deterministic() {
        let a = synthesize_gait(EmotionClass::Happy, 1, 0.0);
        let b = synthesize_gait(EmotionClass::Happy, 1, 0.0);
        assert_eq!(a.gait.to_flat(), b.gait.to_flat());
        assert_eq!(a.view_group, ViewGroup::Front);

        let c = synthesize_gait(EmotionClass::Happy, 1, 0.05);
        let d = synthesize_gait(EmotionClass::Happy, 1, 0.05);
        assert_eq!(c.gait, d.gait);
        assert_ne!(a.gait, c.gait);
    }

    #[test]
    fn sad_is_slouched_and_slow() {
        let sad = EmotionProfile::of(EmotionClass::Sad);
        let happy = EmotionProfile::of(EmotionClass::Happy);
        assert!(sad.torso_pitch > happy.torso_pitch);
        assert!(sad.speed < happy.speed);

        // and the generated walks show it: forward lean of neck over pelvis, travel distance
        let lean = |e| {
            let g = GaitGenerator::nominal(e);
            let p = g.pose_in_place(0.0);
            p.0[0][2] - p.0[2][2]
        };
        assert!(lean(EmotionClass::Sad) > lean(EmotionClass::Happy));
        let travel = |e| {
            let g = synthesize_gait(e, 4, 0.0).gait;
            g.frames()[0].0[0][2] - g.frames()[N_FRAMES - 1].0[0][2]
        };
        assert!(travel(EmotionClass::Sad) < travel(EmotionClass::Happy));
    }

    #[test]
    fn emotions_are_pairwise_separated() {
        let gaits: Vec<Gait> = EmotionClass::ALL
            .iter()
            .map(|&e| synthesize_gait(e, 0, 0.0).gait)
            .collect();
        for i in 0..4 {
            for k in (i + 1)..4 {
                let mut total = 0.0;
                for (pa, pb) in gaits[i].frames().iter().zip(gaits[k].frames()) {
                    for j in 0..16 {
                        total += distance(&pa.0[j], &pb.0[j]);
                    }
                }
                let mean = total / (N_FRAMES * 16) as f64;
                assert!(mean > 0.05, "emotions {i} and {k} too close: {mean}");
            }
        }
    }

    #[test]
    fn bones_are_rigid_over_time() {
        let g = GaitGenerator::from_seed(EmotionClass::Angry, 9);
        let first = bone_lengths(&g.pose_in_place(0.0));
        for k in 1..50 {
            let now = bone_lengths(&g.pose_in_place(k as f64 * 0.037));
            for (a, b) in first.iter().zip(now.iter()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn feet_stay_near_ground() {
        for e in EmotionClass::ALL {
            let g = GaitGenerator::nominal(e);
            for k in 0..40 {
                let p = g.pose_in_place(k as f64 / 30.0);
                for foot in [12, 15] {
                    assert!(p.0[foot][1] > -0.1 && p.0[foot][1] < 0.35, "{e}: {:?}", p.0[foot]);
                }
            }
        }
    }
}
