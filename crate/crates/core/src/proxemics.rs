//! Emotion-dependent comfort space, inflation radius and the fused
//! admissible set used by the planner.
//!
//! All lengths are metres; the comfort table is stored in centimetres and
//! converted on lookup.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Error, Result};
use crate::gait::{EmotionClass, ViewGroup, N_EMOTIONS, N_VIEW_GROUPS};
use crate::nn::SoftmaxGrid;

/// Per-emotion comfort distances in centimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComfortConstants {
    pub happy: f64,
    pub sad: f64,
    pub angry: f64,
    pub neutral: f64,
}

impl Default for ComfortConstants {
    fn default() -> Self {
        Self {
            happy: 90.04,
            sad: 112.71,
            angry: 99.75,
            neutral: 92.03,
        }
    }
}

impl ComfortConstants {
    pub fn centimetres(&self, emotion: EmotionClass) -> f64 {
        match emotion {
            EmotionClass::Happy => self.happy,
            EmotionClass::Sad => self.sad,
            EmotionClass::Angry => self.angry,
            EmotionClass::Neutral => self.neutral,
        }
    }

    pub fn metres(&self, emotion: EmotionClass) -> f64 {
        self.centimetres(emotion) / 100.0
    }
}

/// Share of the comfort distance that applies for a given walking direction.
pub fn view_group_constant(view: ViewGroup) -> f64 {
    match view {
        ViewGroup::Front => 1.0,
        ViewGroup::Right | ViewGroup::Left => 0.5,
        ViewGroup::Back => 0.0,
    }
}

/// Comfort distance for a prediction grid with the default constants.
pub fn comfort_space(grid: &SoftmaxGrid) -> f64 {
    comfort_space_with(grid, &ComfortConstants::default())
}

/// `v_g * sum_j c_j m_j / sum_j m_j`, where `m_j` is the largest probability
/// of emotion `j` over view groups and `g` is the view group of the grid's
/// argmax cell.
pub fn comfort_space_with(grid: &SoftmaxGrid, constants: &ComfortConstants) -> f64 {
    let (mut weighted, mut total) = (0.0, 0.0);
    for emotion in EmotionClass::ALL {
        let m = grid.emotion_max(emotion);
        weighted += constants.metres(emotion) * m;
        total += m;
    }
    let (_, view) = grid.argmax();
    view_group_constant(view) * weighted / total
}

/// Validating entry point for raw probability tables.
pub fn comfort_space_from_probs(probs: [[f64; N_VIEW_GROUPS]; N_EMOTIONS]) -> Result<f64> {
    Ok(comfort_space(&SoftmaxGrid::from_probs(probs)?))
}

/// `max(0, c - (max(dh) - min(dh)))` where `dh` holds the ranges of beams
/// that hit the person.
pub fn inflation_radius(comfort: f64, human_ranges: &[f64]) -> Result<f64> {
    if human_ranges.is_empty() {
        return Err(Error::NoHuman);
    }
    if !comfort.is_finite() || human_ranges.iter().any(|d| !d.is_finite()) {
        bail!(InvalidInput, "comfort distance and ranges must be finite");
    }
    let lo = human_ranges.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = human_ranges.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((comfort - (hi - lo)).max(0.0))
}

/// A planar range scan in the sensor frame (x forward, y left).
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    angles: Vec<f64>,
    ranges: Vec<f64>,
    max_range: f64,
    /// Id of the person hit by each beam, if any.
    hits: Vec<Option<usize>>,
}

impl LidarScan {
    pub fn new(
        angles: Vec<f64>,
        ranges: Vec<f64>,
        max_range: f64,
        hits: Vec<Option<usize>>,
    ) -> Result<Self> {
        if !(max_range > 0.0 && max_range.is_finite()) {
            bail!(InvalidArgument, "max range must be positive, got {max_range}");
        }
        if angles.len() != ranges.len() || hits.len() != ranges.len() {
            bail!(
                Shape,
                "{} angles, {} ranges and {} hit labels",
                angles.len(),
                ranges.len(),
                hits.len()
            );
        }
        if angles.iter().any(|a| !a.is_finite()) {
            bail!(InvalidInput, "beam angles must be finite");
        }
        if let Some(r) = ranges.iter().find(|&&r| !(r > 0.0 && r <= max_range)) {
            bail!(InvalidInput, "range {r} outside (0, {max_range}]");
        }
        Ok(Self {
            angles,
            ranges,
            max_range,
            hits,
        })
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    pub fn hits(&self) -> &[Option<usize>] {
        &self.hits
    }

    /// Whether each beam's nearest return is a person.
    pub fn human_mask(&self) -> Vec<bool> {
        self.hits.iter().map(Option::is_some).collect()
    }

    /// True when beam `i` returned before max range.
    pub fn is_return(&self, i: usize) -> bool {
        self.ranges[i] < self.max_range
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        let (s, c) = libm::sincos(self.angles[i]);
        [self.ranges[i] * c, self.ranges[i] * s]
    }

    /// Cartesian returns (beams that hit something) with their person ids.
    pub fn returns(&self) -> impl Iterator<Item = ([f64; 2], Option<usize>)> + '_ {
        (0..self.len())
            .filter(|&i| self.is_return(i))
            .map(|i| (self.point(i), self.hits[i]))
    }

    /// Ranges of beams that hit person `id`.
    pub fn human_ranges(&self, id: usize) -> Vec<f64> {
        (0..self.len())
            .filter(|&i| self.hits[i] == Some(id))
            .map(|i| self.ranges[i])
            .collect()
    }

    /// Distinct person ids seen in the scan, ascending.
    pub fn people(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.hits.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Square boolean grid centred on the sensor, `cells[row * side + col]`
/// with cell `(row, col)` centred at
/// `(-half + (col + 0.5) res, -half + (row + 0.5) res)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    half_extent: f64,
    side: usize,
    cells: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(half_extent: f64, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            bail!(InvalidArgument, "grid resolution must be positive, got {resolution}");
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            bail!(InvalidArgument, "grid extent must be positive, got {half_extent}");
        }
        let side = libm::ceil(2.0 * half_extent / resolution) as usize;
        Ok(Self {
            resolution,
            half_extent: side as f64 * resolution / 2.0,
            side,
            cells: vec![false; side * side],
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn cell_center(&self, row: usize, col: usize) -> [f64; 2] {
        [
            -self.half_extent + (col as f64 + 0.5) * self.resolution,
            -self.half_extent + (row as f64 + 0.5) * self.resolution,
        ]
    }

    pub fn cell_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let col = libm::floor((p[0] + self.half_extent) / self.resolution);
        let row = libm::floor((p[1] + self.half_extent) / self.resolution);
        let n = self.side as f64;
        if col >= 0.0 && row >= 0.0 && col < n && row < n {
            Some((row as usize, col as usize))
        } else {
            None
        }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.side + col]
    }

    /// Points outside the grid are reported free.
    pub fn is_occupied(&self, p: [f64; 2]) -> bool {
        self.cell_of(p).is_some_and(|(r, c)| self.get(r, c))
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    /// Mark every cell whose centre lies within `radius` of `center`, plus
    /// the cell containing `center` itself.
    pub fn fill_disk(&mut self, center: [f64; 2], radius: f64) {
        if let Some((r, c)) = self.cell_of(center) {
            self.cells[r * self.side + c] = true;
        }
        let res = self.resolution;
        let to_index = |v: f64| libm::floor((v + self.half_extent) / res);
        let max = self.side as f64 - 1.0;
        let c0 = to_index(center[0] - radius).max(0.0);
        let c1 = to_index(center[0] + radius).min(max);
        let r0 = to_index(center[1] - radius).max(0.0);
        let r1 = to_index(center[1] + radius).min(max);
        if c0 > c1 || r0 > r1 {
            return;
        }
        let r2 = radius * radius;
        for row in r0 as usize..=r1 as usize {
            for col in c0 as usize..=c1 as usize {
                let [x, y] = self.cell_center(row, col);
                let (dx, dy) = (x - center[0], y - center[1]);
                if dx * dx + dy * dy <= r2 {
                    self.cells[row * self.side + col] = true;
                }
            }
        }
    }
}

/// A union of closed disks around scan returns (`M = L + disk(r)`), stored
/// both exactly and rasterised.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleSet {
    disks: Vec<([f64; 2], f64)>,
    grid: OccupancyGrid,
}

impl AdmissibleSet {
    /// Rasterise `disks` (centre, radius) over a square of half-width
    /// `half_extent` around the sensor.
    pub fn from_disks(disks: Vec<([f64; 2], f64)>, half_extent: f64, resolution: f64) -> Result<Self> {
        if let Some((_, r)) = disks.iter().find(|(_, r)| !(*r >= 0.0 && r.is_finite())) {
            bail!(InvalidArgument, "inflation radius must be non-negative, got {r}");
        }
        let mut grid = OccupancyGrid::new(half_extent, resolution)?;
        for &(c, r) in &disks {
            grid.fill_disk(c, r);
        }
        Ok(Self { disks, grid })
    }

    pub fn disks(&self) -> &[([f64; 2], f64)] {
        &self.disks
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    /// Rasterised membership test (fast, within one cell of exact).
    pub fn is_blocked(&self, p: [f64; 2]) -> bool {
        self.grid.is_occupied(p)
    }

    /// Exact membership in the disk union.
    pub fn is_blocked_exact(&self, p: [f64; 2]) -> bool {
        self.disks.iter().any(|&(c, r)| {
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            dx * dx + dy * dy <= r * r
        })
    }

    /// Distance from `p` to the nearest disk boundary (negative inside).
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        self.disks
            .iter()
            .map(|&(c, r)| libm::hypot(p[0] - c[0], p[1] - c[1]) - r)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Dilate every scan return by `radius`, rasterised at `resolution` over
/// the scan's sensing range.
pub fn proxemic_fusion(scan: &LidarScan, radius: f64, resolution: f64) -> Result<AdmissibleSet> {
    proxemic_fusion_with(scan, |_| radius, scan.max_range(), resolution)
}

/// Like [`proxemic_fusion`] but each return gets its own radius chosen from
/// the id of the person it hit (`None` for static obstacles).
pub fn proxemic_fusion_with(
    scan: &LidarScan,
    radius: impl Fn(Option<usize>) -> f64,
    half_extent: f64,
    resolution: f64,
) -> Result<AdmissibleSet> {
    let disks = scan.returns().map(|(p, id)| (p, radius(id))).collect();
    AdmissibleSet::from_disks(disks, half_extent, resolution)
}
