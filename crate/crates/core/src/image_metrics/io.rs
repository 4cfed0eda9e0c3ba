use std::io::Write;
use std::path::Path;

use image::{ColorType, DynamicImage};

use super::{to_gray, GrayImage};
use crate::error::{Error, Result};

/// Loads an image file (binary PGM/PPM, or PNG) as luma in [0, 1].
///
/// 8-bit samples are scaled by 1/255, 16-bit samples by 1/65535. Color
/// images go through [`to_gray`].
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => {
            GrayImage::new(w, h, buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect())
        }
        DynamicImage::ImageLuma16(buf) => GrayImage::new(
            w,
            h,
            buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        ),
        other if matches!(other.color(), ColorType::Rgb16 | ColorType::Rgba16 | ColorType::La16) => {
            let rgb: Vec<f64> = other
                .to_rgb16()
                .into_raw()
                .into_iter()
                .map(|v| v as f64 / 65535.0)
                .collect();
            to_gray(w, h, &rgb)
        }
        other => {
            let rgb: Vec<f64> = other
                .to_rgb8()
                .into_raw()
                .into_iter()
                .map(|v| v as f64 / 255.0)
                .collect();
            to_gray(w, h, &rgb)
        }
    }
}

/// Writes an 8-bit binary PGM (P5), rounding each value to the nearest
/// level.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut buf = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    buf.extend(img.pixels().iter().map(|&v| (v * 255.0).round() as u8));
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        let px: Vec<f64> = (0..12).map(|i| (i * 20) as f64 / 255.0).collect();
        let img = GrayImage::new(4, 3, px).unwrap();
        write_pgm(&path, &img).unwrap();
        let back = load_gray(&path).unwrap();
        assert_eq!(back.width(), 4);
        assert_eq!(back.height(), 3);
        for (a, b) in back.pixels().iter().zip(img.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ppm_is_converted_to_luma() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("red.ppm");
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend([255, 0, 0, 255, 0, 0]);
        std::fs::write(&path, bytes).unwrap();
        let g = load_gray(&path).unwrap();
        assert!((g.get(1, 0) - 0.299).abs() < 1e-12);
    }

    #[test]
    fn garbage_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        std::fs::write(&path, b"P5\nnot an image").unwrap();
        assert!(matches!(load_gray(&path), Err(Error::Parse { .. })));
    }
}
