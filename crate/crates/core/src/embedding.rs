//! Gait-to-image embedding: rows are time steps, columns are joints, and the
//! colour channels carry the normalised coordinates `R = z`, `G = y`, `B = x`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::gait::{Gait, Pose, N_FRAMES, N_JOINTS};

pub const CHANNELS: usize = 3;
/// Network input edge length used by the full-size model.
pub const DEFAULT_INPUT_SIZE: usize = 244;

/// Channel-major RGB image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl GaitImage {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            bail!(InvalidArgument, "image dimensions must be nonzero");
        }
        if data.len() != CHANNELS * height * width {
            bail!(
                Shape,
                "expected {} values for {CHANNELS}x{height}x{width}, got {}",
                CHANNELS * height * width,
                data.len()
            );
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            bail!(InvalidInput, "pixel value {v} outside [0, 1]");
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn uniform(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; CHANNELS * height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, channel: usize, row: usize, col: usize) -> f64 {
        self.data[(channel * self.height + row) * self.width + col]
    }

    pub fn channel(&self, channel: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[channel * n..(channel + 1) * n]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Per-gait, per-axis min-max scaling into `[0, 1]`; constant axes map to 0.5.
pub fn normalize_gait(gait: &Gait) -> Gait {
    let bounds = gait.bounds();
    let map = |v: f64, axis: usize| {
        let (lo, hi) = bounds[axis];
        let span = hi - lo;
        if span > 0.0 {
            ((v - lo) / span).clamp(0.0, 1.0)
        } else {
            0.5
        }
    };
    gait.map_poses(|p| {
        let mut out = Pose::default();
        for (dst, src) in out.0.iter_mut().zip(p.0.iter()) {
            *dst = [map(src[0], 0), map(src[1], 1), map(src[2], 2)];
        }
        Ok(out)
    })
    .expect("normalised coordinates are finite")
}

/// Raw `75 x 16` embedding of an already normalised gait.
pub fn embed_gait(gait: &Gait) -> Result<GaitImage> {
    let plane = N_FRAMES * N_JOINTS;
    let mut data = vec![0.0; CHANNELS * plane];
    for (t, pose) in gait.frames().iter().enumerate() {
        for (j, &[x, y, z]) in pose.0.iter().enumerate() {
            let at = t * N_JOINTS + j;
            data[at] = z;
            data[plane + at] = y;
            data[2 * plane + at] = x;
        }
    }
    GaitImage::new(N_FRAMES, N_JOINTS, data)
}

/// Bilinear resize to `size x size` with corner pixels aligned. Refuses to
/// shrink either axis; see [`resize`] for the unrestricted version.
pub fn upscale(image: &GaitImage, size: usize) -> Result<GaitImage> {
    if size < image.height || size < image.width {
        bail!(
            InvalidArgument,
            "target size {size} is smaller than source {}x{}",
            image.height,
            image.width
        );
    }
    resize(image, size)
}

/// Bilinear resample to `size x size` with corner pixels aligned, so every
/// output value is a convex combination of source pixels. Shrinking an axis
/// interpolates without prefiltering.
pub fn resize(image: &GaitImage, size: usize) -> Result<GaitImage> {
    if size == 0 {
        bail!(InvalidArgument, "target size must be positive");
    }
    let rows = axis_weights(image.height, size);
    let cols = axis_weights(image.width, size);
    let mut data = Vec::with_capacity(CHANNELS * size * size);
    for c in 0..CHANNELS {
        let src = image.channel(c);
        for &(r0, r1, fr) in &rows {
            for &(c0, c1, fc) in &cols {
                let top = lerp(src[r0 * image.width + c0], src[r0 * image.width + c1], fc);
                let bottom = lerp(src[r1 * image.width + c0], src[r1 * image.width + c1], fc);
                data.push(lerp(top, bottom, fr));
            }
        }
    }
    GaitImage::new(size, size, data)
}

/// Clamped so rounding never leaves `[min(a, b), max(a, b)]`.
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (a + (b - a) * t).clamp(a.min(b), a.max(b))
}

fn axis_weights(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    (0..dst)
        .map(|i| {
            if src == 1 || dst == 1 {
                return (0, 0, 0.0);
            }
            let pos = i as f64 * (src - 1) as f64 / (dst - 1) as f64;
            let lo = (pos as usize).min(src - 1);
            let hi = (lo + 1).min(src - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect()
}

/// Normalise, embed and resize: the full gait-to-network-input path.
/// Sizes below 75 shrink the time axis.
pub fn gait_to_image(gait: &Gait, size: usize) -> Result<GaitImage> {
    resize(&embed_gait(&normalize_gait(gait))?, size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::{augment_gait, synthesize_gait, AugmentationParams, EmotionClass};
    use proptest::prelude::*;

    fn constant_gait(p: [f64; 3]) -> Gait {
        Gait::new(vec![Pose([p; N_JOINTS]); N_FRAMES], 30.0).unwrap()
    }

    #[test]
    fn unit_cube_gait_is_unchanged() {
        let mut frames = vec![Pose::default(); N_FRAMES];
        for (t, f) in frames.iter_mut().enumerate() {
            for j in 0..N_JOINTS {
                let s = (t * N_JOINTS + j) as f64 / (N_FRAMES * N_JOINTS - 1) as f64;
                f.0[j] = [s, 1.0 - s, (s * 7.0) % 1.0];
            }
        }
        frames[0].0[0][2] = 0.0;
        frames[1].0[0][2] = 1.0;
        let g = Gait::new(frames, 30.0).unwrap();
        assert_eq!(normalize_gait(&g), g);
    }

    #[test]
    fn constant_gait_maps_to_half() {
        let n = normalize_gait(&constant_gait([3.0, -1.0, 7.5]));
        assert!(n.to_flat().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn symmetric_range_centre_maps_to_half() {
        let mut frames = vec![Pose::default(); N_FRAMES];
        frames[0].0[0][0] = -2.0;
        frames[1].0[0][0] = 2.0;
        let n = normalize_gait(&Gait::new(frames, 30.0).unwrap());
        assert_eq!(n.frames()[5].0[3][0], 0.5);
        assert_eq!(n.frames()[0].0[0][0], 0.0);
        assert_eq!(n.frames()[1].0[0][0], 1.0);
    }

    #[test]
    fn uniform_gait_gives_uniform_image() {
        let img = embed_gait(&constant_gait([0.5; 3])).unwrap();
        assert_eq!((img.height(), img.width()), (N_FRAMES, N_JOINTS));
        assert_eq!(img.data().len(), 3600);
        assert!(img.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn channels_follow_z_y_x() {
        let g = normalize_gait(&synthesize_gait(EmotionClass::Sad, 2, 0.01).gait);
        let img = embed_gait(&g).unwrap();
        assert_eq!(img.get(0, 3, 7), g.frames()[3].0[7][2]);
        for t in 0..N_FRAMES {
            for j in 0..N_JOINTS {
                let [x, y, z] = g.frames()[t].0[j];
                assert_eq!(img.get(0, t, j), z);
                assert_eq!(img.get(1, t, j), y);
                assert_eq!(img.get(2, t, j), x);
            }
        }
    }

    #[test]
    fn embedding_rejects_unnormalised_values() {
        assert!(embed_gait(&constant_gait([2.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn upscale_constant_and_identity() {
        let flat = GaitImage::uniform(N_FRAMES, N_JOINTS, 0.5).unwrap();
        let big = upscale(&flat, DEFAULT_INPUT_SIZE).unwrap();
        assert_eq!((big.height(), big.width()), (244, 244));
        assert!(big.data().iter().all(|&v| (v - 0.5).abs() < 1e-15));

        let g = normalize_gait(&synthesize_gait(EmotionClass::Angry, 8, 0.0).gait);
        let square = upscale(&embed_gait(&g).unwrap(), 80).unwrap();
        assert_eq!(upscale(&square, 80).unwrap(), square);
    }

    #[test]
    fn upscale_rejects_shrinking() {
        let img = GaitImage::uniform(N_FRAMES, N_JOINTS, 0.1).unwrap();
        assert!(matches!(upscale(&img, 64), Err(crate::Error::InvalidArgument(_))));
    }

    #[test]
    fn resize_shrinks_time_axis_and_keeps_corners() {
        let g = synthesize_gait(EmotionClass::Sad, 4, 0.0).gait;
        let raw = embed_gait(&normalize_gait(&g)).unwrap();
        let small = resize(&raw, 64).unwrap();
        assert_eq!((small.height(), small.width()), (64, 64));
        for c in 0..3 {
            assert_eq!(small.get(c, 0, 0), raw.get(c, 0, 0));
            assert_eq!(small.get(c, 63, 63), raw.get(c, N_FRAMES - 1, N_JOINTS - 1));
        }
        let (lo, hi) = raw.min_max();
        let (a, b) = small.min_max();
        assert!(a >= lo && b <= hi);
        assert_eq!(resize(&raw, 244).unwrap(), upscale(&raw, 244).unwrap());
        assert!(resize(&raw, 0).is_err());
    }

    #[test]
    fn two_tone_upscale_is_bracketed() {
        let mut data = vec![0.2; 3 * 4 * 4];
        for c in 0..3 {
            for r in 0..4 {
                for k in 2..4 {
                    data[(c * 4 + r) * 4 + k] = 0.9;
                }
            }
        }
        let img = GaitImage::new(4, 4, data).unwrap();
        let up = upscale(&img, 31).unwrap();
        let (lo, hi) = up.min_max();
        assert!(lo >= 0.2 && hi <= 0.9);
        assert!(up.data().iter().any(|&v| v > 0.2 && v < 0.9));
    }

    #[test]
    fn distinct_gaits_give_distinct_images() {
        let g = synthesize_gait(EmotionClass::Happy, 1, 0.0).gait;
        let h = augment_gait(&g, &AugmentationParams::new(10.0, [0.0; 3])).unwrap();
        let a = embed_gait(&normalize_gait(&g)).unwrap();
        let b = embed_gait(&normalize_gait(&h)).unwrap();
        assert_ne!(a, b);
    }

    proptest! {
        #[test]
        fn upscale_stays_within_source_range(
            values in proptest::collection::vec(0.0f64..=1.0, 3 * 5 * 3),
            size in 5usize..40,
        ) {
            let img = GaitImage::new(5, 3, values).unwrap();
            let (lo, hi) = img.min_max();
            let up = upscale(&img, size).unwrap();
            let (ulo, uhi) = up.min_max();
            prop_assert!(ulo >= lo - 1e-15 && uhi <= hi + 1e-15);
        }
    }
}
