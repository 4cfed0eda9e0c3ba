//! Diversity-aware coreset selection for lane-detection datasets.
//!
//! The crate covers the whole curation loop: lane polylines are projected
//! through a pinhole camera and resampled at fixed image rows
//! ([`geometry`]), embedded in an eigenlane space ([`eigenlane`]), compared
//! mask-to-mask with a lane-count penalty ([`mask_similarity`]), and the
//! resulting complete similarity graph is reduced greedily to a maximally
//! diverse subset ([`coreset`]). Candidate surrounding images for a mask are
//! compared with SSIM / MS-SSIM ([`image_metrics`]) and selected the same way.

pub mod config;
pub mod coreset;
pub mod dataset_io;
pub mod eigenlane;
pub mod error;
pub mod geometry;
pub mod image_metrics;
pub mod mask_similarity;
pub mod pipeline;

pub use error::{Error, Result};
