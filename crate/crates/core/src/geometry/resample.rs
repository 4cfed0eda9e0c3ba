use super::{project_polyline, CameraModel, LaneMask, LanePolyline3D, RowGrid, SampledLane};
use crate::error::{Error, Result};

/// Samples a 2D image curve at the rows of `grid`.
///
/// The curve is treated as a function of v: points are sorted by v and
/// points sharing the same v collapse to their mean u. Rows inside the
/// curve's v-span are interpolated (valid); rows outside it are extrapolated
/// from the nearest end segment (not valid).
pub fn resample_lane(curve: &[(f64, f64)], grid: &RowGrid) -> Result<SampledLane> {
    if curve.iter().any(|(u, v)| !u.is_finite() || !v.is_finite()) {
        return Err(Error::DegenerateCurve("curve has non-finite points".into()));
    }
    let mut pts = curve.to_vec();
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let v = pts[i].1;
        let mut j = i;
        let mut sum = 0.0;
        while j < pts.len() && pts[j].1 == v {
            sum += pts[j].0;
            j += 1;
        }
        knots.push((sum / (j - i) as f64, v));
        i = j;
    }
    if knots.len() < 2 {
        return Err(Error::DegenerateCurve(format!(
            "curve spans {} distinct rows, need 2",
            knots.len()
        )));
    }

    let (v_min, v_max) = (knots[0].1, knots[knots.len() - 1].1);
    let mut xs = Vec::with_capacity(grid.samples());
    let mut valid = Vec::with_capacity(grid.samples());
    for y in grid.rows() {
        let seg = if y <= v_min {
            0
        } else if y >= v_max {
            knots.len() - 2
        } else {
            // First knot strictly above y, minus one.
            knots.partition_point(|k| k.1 <= y) - 1
        };
        let (u0, v0) = knots[seg];
        let (u1, v1) = knots[seg + 1];
        let t = (y - v0) / (v1 - v0);
        xs.push(u0 + t * (u1 - u0));
        valid.push(y >= v_min && y <= v_max);
    }
    SampledLane::new(xs, valid)
}

fn mean_abs_offset(lane: &SampledLane, cx: f64) -> f64 {
    lane.xs().iter().map(|x| (x - cx).abs()).sum::<f64>() / lane.len() as f64
}

/// Projects a scene and builds its lane mask.
///
/// Lanes that project to nothing, to fewer than two distinct rows, or that
/// never cover a grid row inside the image width are dropped. When more
/// than `max_lanes` remain, the ones with the smallest mean |x - cx| are
/// kept. Output lanes are ordered left to right by mean x.
pub fn extract_lane_mask(
    scene_id: &str,
    scene: &[LanePolyline3D],
    cam: &CameraModel,
    grid: &RowGrid,
    max_lanes: usize,
) -> LaneMask {
    let width = cam.width as f64;
    let mut lanes: Vec<SampledLane> = scene
        .iter()
        .filter_map(|poly| {
            let curve = project_polyline(poly, cam);
            if curve.is_empty() {
                return None;
            }
            let lane = resample_lane(&curve, grid).ok()?;
            let on_image = lane
                .xs()
                .iter()
                .zip(lane.valid())
                .any(|(&x, &ok)| ok && x >= 0.0 && x < width);
            on_image.then_some(lane)
        })
        .collect();

    if lanes.len() > max_lanes {
        let mut order: Vec<(f64, usize)> = lanes
            .iter()
            .enumerate()
            .map(|(i, l)| (mean_abs_offset(l, cam.cx), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut keep: Vec<usize> = order[..max_lanes].iter().map(|&(_, i)| i).collect();
        keep.sort_unstable();
        lanes = keep.into_iter().map(|i| lanes[i].clone()).collect();
    }

    let mut keyed: Vec<(f64, usize, SampledLane)> = lanes
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l.mean_x(), i, l))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let lanes = keyed.into_iter().map(|(_, _, l)| l).collect();
    LaneMask::new(scene_id, lanes).expect("lanes share the grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid3(top: f64, bottom: f64) -> RowGrid {
        RowGrid::new(top, bottom, 3).unwrap()
    }

    #[test]
    fn interpolates_top_down() {
        let lane = resample_lane(&[(100.0, 250.0), (200.0, 150.0)], &grid3(150.0, 250.0)).unwrap();
        assert_eq!(lane.xs(), &[200.0, 150.0, 100.0]);
        assert_eq!(lane.valid(), &[true, true, true]);
    }

    #[test]
    fn extrapolates_outside_span() {
        let lane = resample_lane(&[(100.0, 250.0), (150.0, 200.0)], &grid3(150.0, 250.0)).unwrap();
        assert_eq!(lane.valid(), &[false, true, true]);
        assert!((lane.xs()[0] - 200.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_line_is_constant() {
        let lane = resample_lane(&[(100.0, 200.0), (100.0, 250.0)], &grid3(200.0, 250.0)).unwrap();
        assert_eq!(lane.xs(), &[100.0, 100.0, 100.0]);
    }

    #[test]
    fn duplicate_rows_collapse_to_mean() {
        let curve = [(90.0, 250.0), (110.0, 250.0), (100.0, 150.0)];
        let lane = resample_lane(&curve, &grid3(150.0, 250.0)).unwrap();
        assert_eq!(lane.xs(), &[100.0, 100.0, 100.0]);
    }

    #[test]
    fn single_row_curve_is_degenerate() {
        let err = resample_lane(&[(1.0, 5.0), (2.0, 5.0)], &grid3(0.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateCurve(_)));
        assert!(resample_lane(&[], &grid3(0.0, 10.0)).is_err());
    }

    #[test]
    fn output_length_matches_grid() {
        let grid = RowGrid::new(10.0, 90.0, 37).unwrap();
        let curve: Vec<(f64, f64)> = (0..5).map(|i| (i as f64 * 3.0, 20.0 + i as f64 * 7.0)).collect();
        assert_eq!(resample_lane(&curve, &grid).unwrap().len(), 37);
    }

    fn straight_lane(id: i64, x: f64) -> LanePolyline3D {
        // Ground plane 1.5 m below a level camera.
        let pts = (0..40).map(|i| [x, 1.5, 1.0 + i as f64 * 2.0]).collect();
        LanePolyline3D::new(id, pts).unwrap()
    }

    fn test_cam() -> CameraModel {
        CameraModel::identity(400.0, 400.0, 384.0, 128.0, 768, 256)
    }

    #[test]
    fn keeps_all_lanes_under_cap() {
        let scene = vec![straight_lane(0, -1.8), straight_lane(1, 1.8)];
        let m = extract_lane_mask("s", &scene, &test_cam(), &RowGrid::default(), 4);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn cap_keeps_innermost_lanes() {
        let offsets = [-9.0, -5.4, -1.8, 1.8, 5.4, 9.0];
        // Shuffled input order to check the ordering rule too.
        let scene: Vec<_> = [3, 0, 5, 1, 4, 2]
            .iter()
            .map(|&i| straight_lane(i as i64, offsets[i]))
            .collect();
        let cam = CameraModel {
            width: 4000,
            cx: 384.0,
            ..test_cam()
        };
        let full = extract_lane_mask("s", &scene, &cam, &RowGrid::default(), 6);
        assert_eq!(full.len(), 6);
        let capped = extract_lane_mask("s", &scene, &cam, &RowGrid::default(), 4);
        assert_eq!(capped.len(), 4);
        // The four innermost, by the mean-offset rule, are full[1..5].
        assert_eq!(capped.lanes(), &full.lanes()[1..5]);
        let means: Vec<f64> = capped.lanes().iter().map(SampledLane::mean_x).collect();
        assert!(means.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn scene_behind_camera_is_empty() {
        let pts = vec![[0.0, 1.5, -5.0], [0.0, 1.5, -10.0]];
        let scene = vec![LanePolyline3D::new(0, pts).unwrap()];
        let m = extract_lane_mask("s", &scene, &test_cam(), &RowGrid::default(), 4);
        assert!(m.is_empty());
    }
}
