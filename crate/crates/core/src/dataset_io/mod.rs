//! Lane label files, lane-mask rasters and dataset manifests.

mod lane_file;
mod manifest;
mod raster;

pub use lane_file::{format_lane_text, parse_lane_text, read_lane_file, write_lane_file, LaneFile};
pub use manifest::{manifest_dir, read_manifest, write_manifest, Manifest, ManifestEntry};
pub use raster::rasterize_mask;
