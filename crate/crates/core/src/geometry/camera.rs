use crate::error::{Error, Result};

/// Ordered 3D points of one lane marking, in world meters.
#[derive(Debug, Clone, PartialEq)]
pub struct LanePolyline3D {
    pub lane_id: i64,
    points: Vec<[f64; 3]>,
}

impl LanePolyline3D {
    pub fn new(lane_id: i64, points: Vec<[f64; 3]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::param(format!(
                "lane {lane_id}: polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(format!("lane {lane_id}: point {i} is not finite")));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if dist3(w[0], w[1]) <= 1e-9 {
                return Err(Error::param(format!(
                    "lane {lane_id}: points {i} and {} coincide",
                    i + 1
                )));
            }
        }
        Ok(Self { lane_id, points })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Pinhole camera with a world-to-camera rigid pose.
///
/// Camera frame: X right, Y down, Z forward (optical axis).
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Row-major world-to-camera rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub near: f64,
}

impl CameraModel {
    /// Default near-plane depth in meters.
    pub const DEFAULT_NEAR: f64 = 0.5;

    /// Camera at the world origin looking down +Z.
    pub fn identity(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Self {
        Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
            near: Self::DEFAULT_NEAR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy, self.near]
            .iter()
            .chain(self.rotation.iter().flatten())
            .chain(self.translation.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("camera has non-finite parameters"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::param("camera focal lengths must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("camera image size must be positive"));
        }
        if self.near <= 0.0 {
            return Err(Error::param("camera near plane must be positive"));
        }
        let r = &self.rotation;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-9 {
                    return Err(Error::param("camera rotation is not orthonormal"));
                }
            }
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        if (det - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("camera rotation has determinant {det}")));
        }
        Ok(())
    }

    /// World point to camera frame.
    pub fn to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    /// Pinhole projection of a camera-frame point. The caller guarantees
    /// positive depth.
    pub fn project_camera_point(&self, p: [f64; 3]) -> (f64, f64) {
        (
            self.fx * p[0] / p[2] + self.cx,
            self.fy * p[1] / p[2] + self.cy,
        )
    }
}

/// Projects a polyline into pixel coordinates.
///
/// Points at depth <= `near` are dropped; segments crossing the near plane
/// are cut at depth `near`. The result keeps polyline order and may fall
/// outside the image rectangle. An empty result means the lane is entirely
/// behind the camera.
pub fn project_polyline(poly: &LanePolyline3D, cam: &CameraModel) -> Vec<(f64, f64)> {
    let near = cam.near;
    let cam_pts: Vec<[f64; 3]> = poly.points().iter().map(|&p| cam.to_camera(p)).collect();
    let mut out = Vec::with_capacity(cam_pts.len() + 2);
    for (i, &cur) in cam_pts.iter().enumerate() {
        if i > 0 {
            let prev = cam_pts[i - 1];
            if (prev[2] > near) != (cur[2] > near) {
                let t = (near - prev[2]) / (cur[2] - prev[2]);
                let cut = [
                    prev[0] + t * (cur[0] - prev[0]),
                    prev[1] + t * (cur[1] - prev[1]),
                    near,
                ];
                out.push(cam.project_camera_point(cut));
            }
        }
        if cur[2] > near {
            out.push(cam.project_camera_point(cur));
        }
    }
    out
}
