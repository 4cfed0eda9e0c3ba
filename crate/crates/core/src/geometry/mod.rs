//! Lane geometry: camera projection of 3D lane polylines and resampling of
//! the projected curves onto a fixed set of image rows.

mod camera;
mod resample;
pub mod synthetic;

pub use camera::{project_polyline, CameraModel, LanePolyline3D};
pub use resample::{extract_lane_mask, resample_lane};

use crate::error::{Error, Result};

/// Default number of lanes kept per scene.
pub const DEFAULT_MAX_LANES: usize = 4;
/// Default frame geometry used for projection and image scoring.
pub const FRAME_WIDTH: u32 = 768;
pub const FRAME_HEIGHT: u32 = 256;

/// Uniformly spaced image rows on which lanes are sampled, inclusive of both
/// endpoints. Row 0 is the top of the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowGrid {
    y_top: f64,
    y_bottom: f64,
    samples: usize,
}

impl RowGrid {
    pub fn new(y_top: f64, y_bottom: f64, samples: usize) -> Result<Self> {
        if !(y_top.is_finite() && y_bottom.is_finite()) {
            return Err(Error::param("row grid bounds must be finite"));
        }
        if y_top < 0.0 || y_top >= y_bottom {
            return Err(Error::param(format!(
                "row grid needs 0 <= y_top < y_bottom, got [{y_top}, {y_bottom}]"
            )));
        }
        if samples < 2 {
            return Err(Error::param(format!(
                "row grid needs at least 2 samples, got {samples}"
            )));
        }
        Ok(Self {
            y_top,
            y_bottom,
            samples,
        })
    }

    pub fn y_top(&self) -> f64 {
        self.y_top
    }

    pub fn y_bottom(&self) -> f64 {
        self.y_bottom
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Image row of sample `i`, counting from the top.
    pub fn row(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            return self.y_bottom;
        }
        self.y_top + (self.y_bottom - self.y_top) * i as f64 / (self.samples - 1) as f64
    }

    pub fn rows(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples).map(|i| self.row(i))
    }

    /// Checks that the grid lies inside an image of the given height.
    pub fn check_height(&self, height: u32) -> Result<()> {
        if self.y_bottom >= height as f64 {
            return Err(Error::param(format!(
                "row grid bottom {} outside image of height {height}",
                self.y_bottom
            )));
        }
        Ok(())
    }
}

impl Default for RowGrid {
    /// 50 rows over the lower half of a 768x256 frame.
    fn default() -> Self {
        Self {
            y_top: 128.0,
            y_bottom: 255.0,
            samples: 50,
        }
    }
}

/// A lane as x-coordinates at the rows of a [`RowGrid`], ordered top-down.
///
/// Rows the projected curve does not reach carry linearly extrapolated
/// values and are flagged `valid = false`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLane {
    xs: Vec<f64>,
    valid: Vec<bool>,
}

impl SampledLane {
    pub fn new(xs: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if xs.len() != valid.len() {
            return Err(Error::param(format!(
                "lane has {} samples but {} validity flags",
                xs.len(),
                valid.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::param("lane needs at least 2 samples"));
        }
        if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(format!("lane sample {i} is not finite")));
        }
        Ok(Self { xs, valid })
    }

    /// A lane with every row flagged valid.
    pub fn from_xs(xs: Vec<f64>) -> Result<Self> {
        let valid = vec![true; xs.len()];
        Self::new(xs, valid)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn mean_x(&self) -> f64 {
        self.xs.iter().sum::<f64>() / self.xs.len() as f64
    }
}

/// The lanes of one scene, all sampled on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneMask {
    pub scene_id: String,
    lanes: Vec<SampledLane>,
}

impl LaneMask {
    pub fn new(scene_id: impl Into<String>, lanes: Vec<SampledLane>) -> Result<Self> {
        if let Some(first) = lanes.first() {
            let p = first.len();
            if let Some(bad) = lanes.iter().position(|l| l.len() != p) {
                return Err(Error::param(format!(
                    "lane {bad} has {} samples, expected {p}",
                    lanes[bad].len()
                )));
            }
        }
        Ok(Self {
            scene_id: scene_id.into(),
            lanes,
        })
    }

    pub fn empty(scene_id: impl Into<String>) -> Self {
        Self {
            scene_id: scene_id.into(),
            lanes: Vec::new(),
        }
    }

    pub fn lanes(&self) -> &[SampledLane] {
        &self.lanes
    }

    pub fn len(&self) -> usize {
        self.lanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lanes.is_empty()
    }

    /// Sample count shared by every lane, if the mask has any.
    pub fn samples(&self) -> Option<usize> {
        self.lanes.first().map(SampledLane::len)
    }

    pub fn push(&mut self, lane: SampledLane) -> Result<()> {
        if let Some(p) = self.samples() {
            if lane.len() != p {
                return Err(Error::param(format!(
                    "lane has {} samples, mask uses {p}",
                    lane.len()
                )));
            }
        }
        self.lanes.push(lane);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rows_include_both_endpoints() {
        let g = RowGrid::new(150.0, 250.0, 3).unwrap();
        assert_eq!(g.rows().collect::<Vec<_>>(), vec![150.0, 200.0, 250.0]);
        let d = RowGrid::default();
        assert_eq!(d.row(0), 128.0);
        assert_eq!(d.row(49), 255.0);
    }

    #[test]
    fn grid_rejects_bad_ranges() {
        assert!(RowGrid::new(200.0, 100.0, 5).is_err());
        assert!(RowGrid::new(-1.0, 100.0, 5).is_err());
        assert!(RowGrid::new(0.0, 100.0, 1).is_err());
        assert!(RowGrid::default().check_height(256).is_ok());
        assert!(RowGrid::default().check_height(255).is_err());
    }

    #[test]
    fn mask_rejects_mixed_lengths() {
        let a = SampledLane::from_xs(vec![1.0, 2.0]).unwrap();
        let b = SampledLane::from_xs(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(LaneMask::new("s", vec![a.clone(), b.clone()]).is_err());
        let mut m = LaneMask::new("s", vec![a]).unwrap();
        assert!(m.push(b).is_err());
    }

    #[test]
    fn lane_rejects_non_finite() {
        assert!(SampledLane::from_xs(vec![1.0, f64::NAN]).is_err());
        assert!(SampledLane::new(vec![1.0, 2.0], vec![true]).is_err());
    }
}
