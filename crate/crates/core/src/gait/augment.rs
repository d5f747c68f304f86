//! Multi-view augmentation: rotation about the vertical axis plus translation.

use alloc::vec::Vec;

use super::{normalize_degrees, AugmentationParams, Gait, Pose, Vec3, ViewGroup};
use crate::error::{bail, Result};

pub const AUGMENTATION_ANGLE_STEP_DEG: f64 = 5.0;
pub const AUGMENTATION_DEPTHS_M: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90°.
fn sin_cos_deg(theta: f64) -> (f64, f64) {
    let t = normalize_degrees(theta);
    match t {
        0.0 => (0.0, 1.0),
        90.0 => (1.0, 0.0),
        180.0 => (0.0, -1.0),
        270.0 => (-1.0, 0.0),
        _ => {
            let r = t.to_radians();
            (libm::sin(r), libm::cos(r))
        }
    }
}

pub(crate) fn rotate_point(p: &Vec3, params: &AugmentationParams) -> Vec3 {
    let (s, c) = sin_cos_deg(params.theta_deg());
    let [x, y, z] = *p;
    let t = params.translation;
    [c * x - s * z + t[0], y + t[1], s * x + c * z + t[2]]
}

/// Rotate every joint about `Y` by `theta` and translate by `T`:
///
/// ```text
/// | cos θ  0  -sin θ |   | x |   | Tx |
/// |   0    1     0   | * | y | + | Ty |
/// | sin θ  0   cos θ |   | z |   | Tz |
/// ```
pub fn rotate_translate_pose(pose: &Pose, params: &AugmentationParams) -> Result<Pose> {
    if !pose.is_finite() {
        bail!(InvalidInput, "pose has non-finite coordinates");
    }
    if !params.translation.iter().all(|v| v.is_finite()) {
        bail!(InvalidInput, "translation is not finite");
    }
    let mut out = Pose::default();
    for (dst, src) in out.0.iter_mut().zip(pose.0.iter()) {
        *dst = rotate_point(src, params);
    }
    Ok(out)
}

pub fn augment_gait(gait: &Gait, params: &AugmentationParams) -> Result<Gait> {
    gait.map_poses(|p| rotate_translate_pose(p, params))
}

/// Half-open 90° arcs centred on 0°, 90°, 180° and 270°.
///
/// Front covers `[315, 360) ∪ [0, 45)`, right `[45, 135)`, back `[135, 225)`
/// and left `[225, 315)`. Non-finite angles map to front.
pub fn view_group_of(theta_deg: f64) -> ViewGroup {
    if !theta_deg.is_finite() {
        return ViewGroup::Front;
    }
    let shifted = normalize_degrees(theta_deg + 45.0);
    let sector = (shifted / 90.0) as usize;
    ViewGroup::ALL[sector.min(3)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub gait: Gait,
    pub view_group: ViewGroup,
    pub params: AugmentationParams,
}

/// The full 72 angle × 4 depth expansion, ordered by `(theta, T_z)`.
pub fn generate_augmentation_set(gait: &Gait) -> Result<Vec<Augmented>> {
    let n_angles = (360.0 / AUGMENTATION_ANGLE_STEP_DEG) as usize;
    let mut out = Vec::with_capacity(n_angles * AUGMENTATION_DEPTHS_M.len());
    for a in 0..n_angles {
        let theta = a as f64 * AUGMENTATION_ANGLE_STEP_DEG;
        for &tz in AUGMENTATION_DEPTHS_M.iter() {
            let params = AugmentationParams::new(theta, [0.0, 0.0, tz]);
            out.push(Augmented {
                gait: augment_gait(gait, &params)?,
                view_group: view_group_of(theta),
                params,
            });
        }
    }
    Ok(out)
}
