//! Skeletal gait data model.
//!
//! A gait is a fixed 75-frame sequence of 16-joint poses. Coordinates are
//! metres in a camera-style frame: `Y` is up and an unrotated walker moves
//! towards the camera along `-Z` with its left side on `+X`.

mod augment;
mod synth;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{bail, Error, Result};

pub use augment::{
    augment_gait, generate_augmentation_set, rotate_translate_pose, view_group_of, Augmented,
    AUGMENTATION_ANGLE_STEP_DEG, AUGMENTATION_DEPTHS_M,
};
pub use synth::{synthesize_gait, EmotionProfile, GaitGenerator, DEFAULT_FRAME_RATE};

pub const N_FRAMES: usize = 75;
pub const N_JOINTS: usize = 16;

pub type Vec3 = [f64; 3];

/// Joint names, indexed by joint id.
pub const JOINT_NAMES: [&str; N_JOINTS] = [
    "pelvis",
    "spine",
    "neck",
    "head",
    "left_shoulder",
    "left_elbow",
    "left_hand",
    "right_shoulder",
    "right_elbow",
    "right_hand",
    "left_hip",
    "left_knee",
    "left_foot",
    "right_hip",
    "right_knee",
    "right_foot",
];

/// Parent-child bone list of the 16-joint tree rooted at the pelvis.
pub const SKELETON_EDGES: [(usize, usize); N_JOINTS - 1] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (2, 4),
    (4, 5),
    (5, 6),
    (2, 7),
    (7, 8),
    (8, 9),
    (0, 10),
    (10, 11),
    (11, 12),
    (0, 13),
    (13, 14),
    (14, 15),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Joint {
    pub index: usize,
    pub position: Vec3,
}

/// One skeleton: 16 joint positions indexed by joint id.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose(pub [Vec3; N_JOINTS]);

impl Pose {
    pub fn joint(&self, index: usize) -> Joint {
        Joint {
            index,
            position: self.0[index],
        }
    }

    pub fn joints(&self) -> impl Iterator<Item = Joint> + '_ {
        (0..N_JOINTS).map(move |i| self.joint(i))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Pose {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= factor);
        out
    }
}

/// Euclidean length of every bone in [`SKELETON_EDGES`] order.
pub fn bone_lengths(pose: &Pose) -> [f64; N_JOINTS - 1] {
    let mut out = [0.0; N_JOINTS - 1];
    for (len, &(a, b)) in out.iter_mut().zip(SKELETON_EDGES.iter()) {
        *len = distance(&pose.0[a], &pose.0[b]);
    }
    out
}

pub(crate) fn distance(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    libm::sqrt(dx * dx + dy * dy + dz * dz)
}

/// A validated 75-frame gait cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Gait {
    frames: Vec<Pose>,
    frame_rate: f64,
}

impl Gait {
    /// Non-finite coordinates are rejected here rather than repaired later.
    pub fn new(frames: Vec<Pose>, frame_rate: f64) -> Result<Self> {
        if frames.len() != N_FRAMES {
            bail!(
                InvalidInput,
                "gait needs exactly {N_FRAMES} frames, got {}",
                frames.len()
            );
        }
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            bail!(InvalidInput, "frame rate must be positive, got {frame_rate}");
        }
        if let Some(t) = frames.iter().position(|p| !p.is_finite()) {
            bail!(InvalidInput, "frame {t} has non-finite coordinates");
        }
        Ok(Self { frames, frame_rate })
    }

    /// Build from a flat row-major `(frame, joint, xyz)` buffer.
    pub fn from_flat(values: &[f64], frame_rate: f64) -> Result<Self> {
        if values.len() != N_FRAMES * N_JOINTS * 3 {
            bail!(
                InvalidInput,
                "expected {} values, got {}",
                N_FRAMES * N_JOINTS * 3,
                values.len()
            );
        }
        let frames = values
            .chunks_exact(N_JOINTS * 3)
            .map(|f| {
                let mut pose = Pose::default();
                for (j, xyz) in f.chunks_exact(3).enumerate() {
                    pose.0[j] = [xyz[0], xyz[1], xyz[2]];
                }
                pose
            })
            .collect();
        Self::new(frames, frame_rate)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.frames
            .iter()
            .flat_map(|p| p.0.iter().flatten().copied())
            .collect()
    }

    pub fn frames(&self) -> &[Pose] {
        &self.frames
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    /// Per-axis `(min, max)` over every frame and joint.
    pub fn bounds(&self) -> [(f64, f64); 3] {
        let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 3];
        for p in self.frames.iter().flat_map(|f| f.0.iter()) {
            for axis in 0..3 {
                b[axis].0 = b[axis].0.min(p[axis]);
                b[axis].1 = b[axis].1.max(p[axis]);
            }
        }
        b
    }

    pub(crate) fn map_poses(&self, mut f: impl FnMut(&Pose) -> Result<Pose>) -> Result<Gait> {
        let frames = self.frames.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Gait::new(frames, self.frame_rate)
    }
}

macro_rules! label_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident = $idx:expr, $text:expr;)* }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant = $idx,)*
        }

        impl $name {
            pub const ALL: [$name; 4] = [$($name::$variant,)*];

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(i: usize) -> Option<Self> {
                Self::ALL.get(i).copied()
            }

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)*
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let lower = s.trim();
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name().eq_ignore_ascii_case(lower))
                    .ok_or_else(|| {
                        Error::InvalidInput(alloc::format!(
                            concat!("unknown ", stringify!($name), " '{}'"),
                            s
                        ))
                    })
            }
        }
    };
}

label_enum! {
    /// Perceived emotion, in network row order.
    EmotionClass {
        Angry = 0, "angry";
        Sad = 1, "sad";
        Happy = 2, "happy";
        Neutral = 3, "neutral";
    }
}

label_enum! {
    /// Walking direction relative to the camera, in network column order.
    ViewGroup {
        Front = 0, "front";
        Right = 1, "right";
        Back = 2, "back";
        Left = 3, "left";
    }
}

pub const N_EMOTIONS: usize = 4;
pub const N_VIEW_GROUPS: usize = 4;

/// Rotation about `Y` (degrees) followed by a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationParams {
    theta_deg: f64,
    pub translation: Vec3,
}

impl AugmentationParams {
    pub fn new(theta_deg: f64, translation: Vec3) -> Self {
        Self {
            theta_deg: normalize_degrees(theta_deg),
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, [0.0; 3])
    }

    /// Always in `[0, 360)`.
    pub fn theta_deg(&self) -> f64 {
        self.theta_deg
    }

    /// Parameters of the inverse map, so that applying `self` then
    /// `self.inverse()` is the identity.
    pub fn inverse(&self) -> Self {
        let back = Self::new(-self.theta_deg, [0.0; 3]);
        let t = augment::rotate_point(&self.translation, &back);
        Self::new(-self.theta_deg, [-t[0], -t[1], -t[2]])
    }
}

pub(crate) fn normalize_degrees(theta: f64) -> f64 {
    let r = theta % 360.0;
    let t = if r < 0.0 { r + 360.0 } else { r };
    // tiny negative inputs round up to exactly 360
    if t >= 360.0 {
        0.0
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaitSource {
    Synthetic,
    File,
}

impl GaitSource {
    pub fn name(self) -> &'static str {
        match self {
            GaitSource::Synthetic => "synthetic",
            GaitSource::File => "file",
        }
    }
}

impl FromStr for GaitSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "synthetic" => Ok(GaitSource::Synthetic),
            "file" => Ok(GaitSource::File),
            other => bail!(InvalidInput, "unknown gait source '{other}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGait {
    pub gait: Gait,
    pub emotion: EmotionClass,
    pub view_group: ViewGroup,
    pub source: GaitSource,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ramp_pose(k: f64) -> Pose {
        let mut p = Pose::default();
        for (j, v) in p.0.iter_mut().enumerate() {
            *v = [j as f64 * 0.1 + k, 1.0 + j as f64 * 0.05, -(j as f64) * 0.02];
        }
        p
    }

    #[test]
    fn gait_rejects_wrong_frame_count() {
        let err = Gait::new(vec![ramp_pose(0.0); 10], 30.0).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn gait_rejects_non_finite() {
        let mut frames = vec![ramp_pose(0.0); N_FRAMES];
        frames[40].0[3][1] = f64::NAN;
        assert!(Gait::new(frames, 30.0).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let frames: Vec<_> = (0..N_FRAMES).map(|t| ramp_pose(t as f64)).collect();
        let g = Gait::new(frames, 25.0).unwrap();
        let back = Gait::from_flat(&g.to_flat(), 25.0).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn bone_lengths_scale_linearly() {
        let p = ramp_pose(0.3);
        let a = bone_lengths(&p);
        let b = bone_lengths(&p.scaled(2.0));
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((2.0 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pose_has_zero_bones() {
        assert!(bone_lengths(&Pose::default()).iter().all(|&l| l == 0.0));
    }

    #[test]
    fn skeleton_is_a_tree() {
        let mut seen = [false; N_JOINTS];
        seen[0] = true;
        for &(parent, child) in SKELETON_EDGES.iter() {
            assert!(seen[parent], "parent {parent} listed before it is reached");
            assert!(!seen[child], "joint {child} has two parents");
            seen[child] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn labels_parse_and_index() {
        assert_eq!("SAD".parse::<EmotionClass>().unwrap(), EmotionClass::Sad);
        assert_eq!(EmotionClass::Happy.index(), 2);
        assert_eq!(ViewGroup::from_index(2), Some(ViewGroup::Back));
        assert!("bored".parse::<EmotionClass>().is_err());
    }

    #[test]
    fn theta_is_normalized() {
        assert_eq!(AugmentationParams::new(-90.0, [0.0; 3]).theta_deg(), 270.0);
        assert_eq!(AugmentationParams::new(720.0, [0.0; 3]).theta_deg(), 0.0);
        assert_eq!(AugmentationParams::new(-1e-20, [0.0; 3]).theta_deg(), 0.0);
    }
}
