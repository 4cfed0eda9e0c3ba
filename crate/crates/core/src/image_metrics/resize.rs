use super::GrayImage;
use crate::error::{Error, Result};

/// 2x2 mean pooling; an odd trailing row or column is dropped.
pub fn mean_pool2(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = (img.width() / 2, img.height() / 2);
    if w == 0 || h == 0 {
        return Err(Error::param(format!(
            "{}x{} image is too small to pool",
            img.width(),
            img.height()
        )));
    }
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let s = img.get(2 * x, 2 * y)
                + img.get(2 * x + 1, 2 * y)
                + img.get(2 * x, 2 * y + 1)
                + img.get(2 * x + 1, 2 * y + 1);
            out.push(s / 4.0);
        }
    }
    GrayImage::new(w, h, out)
}

/// Source pixels and overlap weights for each output pixel of a box
/// resample from `src` to `dst` samples.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let lo = o as f64 * scale;
            let hi = (o + 1) as f64 * scale;
            let mut taps = Vec::new();
            let mut i = lo.floor() as usize;
            while (i as f64) < hi && i < src {
                let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                if overlap > 0.0 {
                    taps.push((i, overlap / scale));
                }
                i += 1;
            }
            taps
        })
        .collect()
}

fn box_resample(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    let wx = box_weights(img.width(), width);
    let wy = box_weights(img.height(), height);
    let mut rows = vec![0.0; width * img.height()];
    for y in 0..img.height() {
        for (x, taps) in wx.iter().enumerate() {
            rows[y * width + x] = taps.iter().map(|&(i, w)| w * img.get(i, y)).sum();
        }
    }
    let mut out = vec![0.0; width * height];
    for (y, taps) in wy.iter().enumerate() {
        for x in 0..width {
            let v: f64 = taps.iter().map(|&(i, w)| w * rows[i * width + x]).sum();
            out[y * width + x] = v.clamp(0.0, 1.0);
        }
    }
    GrayImage::new(width, height, out)
}

/// Brings an image to the scoring size: 2x2 mean pooling while both sides
/// stay at least twice the target, then an area (box) resample for any
/// remaining mismatch.
pub fn resize_for_scoring(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::param("scoring size must be positive"));
    }
    let mut cur = img.clone();
    while cur.width() >= 2 * width && cur.height() >= 2 * height {
        cur = mean_pool2(&cur)?;
    }
    if cur.width() == width && cur.height() == height {
        return Ok(cur);
    }
    box_resample(&cur, width, height)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooling_averages_blocks_and_truncates() {
        let img = GrayImage::new(3, 3, vec![0.0, 0.4, 1.0, 0.8, 0.4, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let p = mean_pool2(&img).unwrap();
        assert_eq!((p.width(), p.height()), (1, 1));
        assert!((p.get(0, 0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn exact_halving_uses_pooling() {
        let px: Vec<f64> = (0..64).map(|i| (i % 7) as f64 / 7.0).collect();
        let img = GrayImage::new(8, 8, px).unwrap();
        let r = resize_for_scoring(&img, 4, 4).unwrap();
        assert_eq!(r, mean_pool2(&img).unwrap());
    }

    #[test]
    fn box_resample_preserves_constants_and_size() {
        let img = GrayImage::filled(13, 7, 0.3).unwrap();
        let r = resize_for_scoring(&img, 5, 3).unwrap();
        assert_eq!((r.width(), r.height()), (5, 3));
        assert!(r.pixels().iter().all(|v| (v - 0.3).abs() < 1e-12));
        let up = resize_for_scoring(&img, 20, 9).unwrap();
        assert!(up.pixels().iter().all(|v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn same_size_is_identity() {
        let img = GrayImage::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(resize_for_scoring(&img, 2, 2).unwrap(), img);
    }
}
