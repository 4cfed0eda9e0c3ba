//! Grayscale images and the SSIM / MS-SSIM similarity used to compare
//! candidate surrounding images.

mod io;
mod resize;
mod ssim;

pub use io::{load_gray, write_pgm};
pub use resize::{mean_pool2, resize_for_scoring};
pub use ssim::{ms_ssim, ssim, SsimParams};

use crate::error::{Error, Result};

/// Row-major luma image with values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("image dimensions must be positive"));
        }
        if width * height != pixels.len() {
            return Err(Error::param(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param(format!(
                "pixel {i} = {} outside [0, 1]",
                pixels[i]
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub(crate) fn set(&mut self, x: usize, y: usize, v: f64) {
        self.pixels[y * self.width + x] = v;
    }
}

/// Rec. 601 luma of an interleaved RGB buffer with channels in [0, 1].
pub fn to_gray(width: usize, height: usize, rgb: &[f64]) -> Result<GrayImage> {
    if rgb.len() != width * height * 3 {
        return Err(Error::param(format!(
            "{width}x{height} RGB image needs {} values, got {}",
            width * height * 3,
            rgb.len()
        )));
    }
    if let Some(i) = rgb.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::param(format!("channel value {i} outside [0, 1]")));
    }
    let pixels = rgb
        .chunks_exact(3)
        .map(|c| (0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]).clamp(0.0, 1.0))
        .collect();
    GrayImage::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_conversion() {
        let white = to_gray(2, 1, &[1.0; 6]).unwrap();
        assert!(white.pixels().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let red = to_gray(1, 1, &[1.0, 0.0, 0.0]).unwrap();
        assert!((red.get(0, 0) - 0.299).abs() < 1e-15);
        for v in [0.0, 0.2, 0.5, 0.9] {
            let g = to_gray(1, 1, &[v, v, v]).unwrap();
            assert!((g.get(0, 0) - v).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
        assert!(GrayImage::new(2, 1, vec![0.5]).is_err());
        assert!(GrayImage::new(0, 0, vec![]).is_err());
        assert!(to_gray(1, 1, &[0.0, -0.1, 0.0]).is_err());
    }
}
