//! Pipeline configuration, echoed into every manifest and selection file.

use serde::{Deserialize, Serialize};

use crate::coreset::GreedyPolicy;
use crate::eigenlane::Rank;
use crate::error::{Error, Result};
use crate::geometry::{RowGrid, DEFAULT_MAX_LANES, FRAME_HEIGHT, FRAME_WIDTH};

/// Images selected per lane mask.
pub const DEFAULT_K_IMAGES: usize = 5;
/// Candidate images generated per lane mask.
pub const DEFAULT_CANDIDATES_PER_MASK: usize = 100;
pub const DEFAULT_K_LANES: usize = 20;
pub const DEFAULT_LINE_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

/// A value that is either computed from data or fixed by the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Setting<T> {
    Auto(Auto),
    Fixed(T),
}

impl<T> Setting<T> {
    pub const AUTO: Self = Setting::Auto(Auto::Auto);

    pub fn fixed(self) -> Option<T> {
        match self {
            Setting::Auto(_) => None,
            Setting::Fixed(v) => Some(v),
        }
    }
}

impl<T: std::str::FromStr> std::str::FromStr for Setting<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::AUTO);
        }
        s.parse::<T>()
            .map(Setting::Fixed)
            .map_err(|_| Error::param(format!("expected 'auto' or a value, got '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub y_top: f64,
    pub y_bottom: f64,
    pub samples: usize,
}

impl From<RowGrid> for GridConfig {
    fn from(g: RowGrid) -> Self {
        Self {
            y_top: g.y_top(),
            y_bottom: g.y_bottom(),
            samples: g.samples(),
        }
    }
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<RowGrid> {
        RowGrid::new(self.y_top, self.y_bottom, self.samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub grid: GridConfig,
    pub max_lanes: usize,
    pub rank: Setting<usize>,
    pub kappa: Setting<f64>,
    pub k_lanes: usize,
    pub k_images: usize,
    pub candidates_per_mask: usize,
    pub policy: GreedyPolicy,
    pub seed: u64,
    pub frame_width: u32,
    pub frame_height: u32,
    pub line_width: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            grid: RowGrid::default().into(),
            max_lanes: DEFAULT_MAX_LANES,
            rank: Setting::AUTO,
            kappa: Setting::AUTO,
            k_lanes: DEFAULT_K_LANES,
            k_images: DEFAULT_K_IMAGES,
            candidates_per_mask: DEFAULT_CANDIDATES_PER_MASK,
            policy: GreedyPolicy::ToSelected,
            seed: 0,
            frame_width: FRAME_WIDTH,
            frame_height: FRAME_HEIGHT,
            line_width: DEFAULT_LINE_WIDTH,
        }
    }
}

impl PipelineConfig {
    pub fn rank(&self) -> Rank {
        match self.rank {
            Setting::Auto(_) => Rank::Auto,
            Setting::Fixed(r) => Rank::Fixed(r),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.to_grid()?;
        grid.check_height(self.frame_height)?;
        if self.max_lanes == 0 {
            return Err(Error::param("max_lanes must be at least 1"));
        }
        if self.k_lanes < 2 {
            return Err(Error::param("k_lanes must be at least 2"));
        }
        if self.k_images < 1 {
            return Err(Error::param("k_images must be at least 1"));
        }
        if self.frame_width == 0 || self.frame_height == 0 {
            return Err(Error::param("frame size must be positive"));
        }
        if self.line_width == 0 {
            return Err(Error::param("line width must be at least 1"));
        }
        if let Some(k) = self.kappa.fixed() {
            if !k.is_finite() || k < 0.0 {
                return Err(Error::param(format!("kappa must be finite and >= 0, got {k}")));
            }
        }
        if self.rank.fixed() == Some(0) {
            return Err(Error::param("rank must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_curation_setup() {
        let c = PipelineConfig::default();
        assert_eq!(c.max_lanes, 4);
        assert_eq!(c.k_images, 5);
        assert_eq!(c.candidates_per_mask, 100);
        assert_eq!((c.frame_width, c.frame_height), (768, 256));
        c.validate().unwrap();
    }

    #[test]
    fn settings_serialize_as_auto_or_value() {
        let c = PipelineConfig {
            kappa: Setting::Fixed(2.5),
            ..PipelineConfig::default()
        };
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["kappa"], serde_json::json!(2.5));
        assert_eq!(v["rank"], serde_json::json!("auto"));
        let back: PipelineConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
        assert_eq!("auto".parse::<Setting<f64>>().unwrap(), Setting::AUTO);
        assert_eq!("3".parse::<Setting<usize>>().unwrap(), Setting::Fixed(3));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v = serde_json::to_value(PipelineConfig::default()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(serde_json::from_value::<PipelineConfig>(v).is_err());
    }
}
