use crate::geometry::{LaneMask, RowGrid};
use crate::image_metrics::GrayImage;

/// Clips the segment to the rectangle `[lo, hi]^2` (Liang-Barsky).
fn clip(
    p0: (f64, f64),
    p1: (f64, f64),
    lo: (f64, f64),
    hi: (f64, f64),
) -> Option<((f64, f64), (f64, f64))> {
    let d = (p1.0 - p0.0, p1.1 - p0.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [
        (-d.0, p0.0 - lo.0),
        (d.0, hi.0 - p0.0),
        (-d.1, p0.1 - lo.1),
        (d.1, hi.1 - p0.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some((
        (p0.0 + t0 * d.0, p0.1 + t0 * d.1),
        (p0.0 + t1 * d.0, p0.1 + t1 * d.1),
    ))
}

fn stamp(img: &mut GrayImage, x: i64, y: i64, lw: usize) {
    let lo = -((lw as i64 - 1) / 2);
    let hi = lw as i64 / 2;
    for dy in lo..=hi {
        for dx in lo..=hi {
            let (px, py) = (x + dx, y + dy);
            if px >= 0 && py >= 0 && (px as usize) < img.width() && (py as usize) < img.height() {
                img.set(px as usize, py as usize, 1.0);
            }
        }
    }
}

/// Integer Bresenham line with a square brush at every step.
fn draw_segment(img: &mut GrayImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), lw: usize) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let (mut x, mut y) = (x0, y0);
    let mut err = dx + dy;
    loop {
        stamp(img, x, y, lw);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Binary lane-mask raster: every lane is drawn through its valid-row
/// points with a square brush of side `line_width`, on a black canvas.
pub fn rasterize_mask(mask: &LaneMask, grid: &RowGrid, width: usize, height: usize, line_width: usize) -> GrayImage {
    let mut img = GrayImage::filled(width.max(1), height.max(1), 0.0).expect("positive size");
    let lw = line_width.max(1);
    let margin = lw as f64 + 1.0;
    let lo = (-margin, -margin);
    let hi = (width as f64 + margin, height as f64 + margin);
    let to_px = |p: (f64, f64)| (p.0.round() as i64, p.1.round() as i64);

    for lane in mask.lanes() {
        let pts: Vec<(f64, f64)> = (0..lane.len())
            .filter(|&k| lane.valid()[k])
            .map(|k| (lane.xs()[k], grid.row(k)))
            .collect();
        match pts.len() {
            0 => {}
            1 => {
                if let Some((a, _)) = clip(pts[0], pts[0], lo, hi) {
                    let (x, y) = to_px(a);
                    stamp(&mut img, x, y, lw);
                }
            }
            _ => {
                for w in pts.windows(2) {
                    if let Some((a, b)) = clip(w[0], w[1], lo, hi) {
                        draw_segment(&mut img, to_px(a), to_px(b), lw);
                    }
                }
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SampledLane;

    fn grid() -> RowGrid {
        RowGrid::new(2.0, 12.0, 6).unwrap()
    }

    #[test]
    fn empty_mask_is_black() {
        let img = rasterize_mask(&LaneMask::empty("s"), &grid(), 20, 16, 3);
        assert_eq!((img.width(), img.height()), (20, 16));
        assert!(img.pixels().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_lane_sets_one_column() {
        let lane = SampledLane::from_xs(vec![10.0; 6]).unwrap();
        let mask = LaneMask::new("s", vec![lane]).unwrap();
        let img = rasterize_mask(&mask, &grid(), 20, 16, 1);
        for y in 0..16 {
            for x in 0..20 {
                let expect = x == 10 && (2..=12).contains(&y);
                assert_eq!(img.get(x, y) == 1.0, expect, "pixel ({x}, {y})");
            }
        }
    }

    #[test]
    fn brush_width_thickens_strokes() {
        let lane = SampledLane::from_xs(vec![10.0; 6]).unwrap();
        let mask = LaneMask::new("s", vec![lane]).unwrap();
        let img = rasterize_mask(&mask, &grid(), 20, 16, 3);
        assert_eq!(img.get(9, 5), 1.0);
        assert_eq!(img.get(11, 5), 1.0);
        assert_eq!(img.get(12, 5), 0.0);
    }

    #[test]
    fn overdraw_is_idempotent() {
        let lane = SampledLane::from_xs(vec![3.0, 5.0, 8.0, 9.0, 12.0, 15.0]).unwrap();
        let one = LaneMask::new("s", vec![lane.clone()]).unwrap();
        let two = LaneMask::new("s", vec![lane.clone(), lane]).unwrap();
        assert_eq!(
            rasterize_mask(&one, &grid(), 20, 16, 2),
            rasterize_mask(&two, &grid(), 20, 16, 2)
        );
    }

    #[test]
    fn far_off_canvas_points_are_clipped() {
        let lane = SampledLane::from_xs(vec![-1e12, -1e6, 5.0, 6.0, 1e9, 1e15]).unwrap();
        let mask = LaneMask::new("s", vec![lane]).unwrap();
        let img = rasterize_mask(&mask, &grid(), 20, 16, 1);
        assert!(img.pixels().iter().all(|&v| v == 0.0 || v == 1.0));
        assert_eq!(img.get(5, 6), 1.0);
    }
}
