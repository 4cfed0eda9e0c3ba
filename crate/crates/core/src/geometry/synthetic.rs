//! Synthetic HD-map source: seeded road scenes made of parallel lane
//! markings along straight or circular-arc centerlines, with a forward
//! looking camera placed on the ego lane.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{CameraModel, LanePolyline3D, FRAME_HEIGHT, FRAME_WIDTH};
use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` a scene parameter is drawn from.
pub type Range<T> = (T, T);

/// Value ranges for the generator. Every range is inclusive; a degenerate
/// range `(v, v)` pins the parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MapParams {
    pub lane_count: Range<usize>,
    /// Lane width in meters.
    pub lane_width: Range<f64>,
    /// Centerline curvature in 1/m; positive bends right.
    pub curvature: Range<f64>,
    /// Length of the straight run before the arc starts, in meters.
    pub straight_prefix: Range<f64>,
    pub camera_height: Range<f64>,
    /// Downward pitch, degrees.
    pub pitch_deg: Range<f64>,
    pub yaw_deg: Range<f64>,
    /// Lateral offset of the camera from the ego lane center, meters.
    pub lateral_offset: Range<f64>,
    pub road_length: f64,
    pub point_spacing: f64,
    pub focal: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            lane_count: (1, 4),
            lane_width: (3.0, 3.75),
            curvature: (-0.004, 0.004),
            straight_prefix: (0.0, 40.0),
            camera_height: (1.3, 1.8),
            pitch_deg: (0.0, 3.0),
            yaw_deg: (-2.0, 2.0),
            lateral_offset: (-0.4, 0.4),
            road_length: 100.0,
            point_spacing: 2.0,
            focal: 400.0,
        }
    }
}

fn check_range(name: &str, r: Range<f64>) -> Result<()> {
    if !r.0.is_finite() || !r.1.is_finite() || r.0 > r.1 {
        return Err(Error::param(format!(
            "{name} range [{}, {}] is empty or not finite",
            r.0, r.1
        )));
    }
    Ok(())
}

impl MapParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.lane_count;
        if lo < 1 || lo > hi {
            return Err(Error::param(format!("lane count range [{lo}, {hi}] is invalid")));
        }
        check_range("lane width", self.lane_width)?;
        check_range("curvature", self.curvature)?;
        check_range("straight prefix", self.straight_prefix)?;
        check_range("camera height", self.camera_height)?;
        check_range("pitch", self.pitch_deg)?;
        check_range("yaw", self.yaw_deg)?;
        check_range("lateral offset", self.lateral_offset)?;
        if self.lane_width.0 <= 0.0 {
            return Err(Error::param("lane width must be positive"));
        }
        if self.camera_height.0 <= 0.0 {
            return Err(Error::param("camera height must be positive"));
        }
        if self.straight_prefix.0 < 0.0 {
            return Err(Error::param("straight prefix must be non-negative"));
        }
        if self.pitch_deg.0 <= -90.0 || self.pitch_deg.1 >= 90.0 {
            return Err(Error::param("pitch must lie inside (-90, 90) degrees"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.road_length) || !positive(self.point_spacing) || !positive(self.focal) {
            return Err(Error::param(
                "road length, point spacing and focal length must be positive",
            ));
        }
        if self.point_spacing > self.road_length {
            return Err(Error::param("point spacing exceeds road length"));
        }
        Ok(())
    }
}

/// One generated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scene_id: String,
    pub lanes: Vec<LanePolyline3D>,
    pub camera: CameraModel,
}

fn draw(rng: &mut ChaCha8Rng, r: Range<f64>) -> f64 {
    if r.0 == r.1 {
        r.0
    } else {
        rng.random_range(r.0..=r.1)
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Camera at height `h` above the world origin looking along +y.
///
/// World frame: x right, y forward, z up. Camera frame: x right, y down,
/// z forward.
fn road_camera(h: f64, pitch: f64, yaw: f64, focal: f64) -> CameraModel {
    let right = [yaw.cos(), -yaw.sin(), 0.0];
    let fwd = [
        pitch.cos() * yaw.sin(),
        pitch.cos() * yaw.cos(),
        -pitch.sin(),
    ];
    let down = cross(fwd, right);
    let rotation = [right, down, fwd];
    let center = [0.0, 0.0, h];
    let mut translation = [0.0; 3];
    for (t, row) in translation.iter_mut().zip(&rotation) {
        *t = -(row[0] * center[0] + row[1] * center[1] + row[2] * center[2]);
    }
    CameraModel {
        rotation,
        translation,
        ..CameraModel::identity(
            focal,
            focal,
            FRAME_WIDTH as f64 / 2.0,
            FRAME_HEIGHT as f64 / 2.0,
            FRAME_WIDTH,
            FRAME_HEIGHT,
        )
    }
}

/// Centerline position and heading (radians from +y toward +x) at arc
/// length `s`.
fn centerline(s: f64, prefix: f64, curvature: f64) -> ([f64; 2], f64) {
    if s <= prefix || curvature == 0.0 {
        return ([0.0, s], 0.0);
    }
    let a = s - prefix;
    let phi = curvature * a;
    let half = phi / 2.0;
    // (1 - cos phi) / k written as 2 sin^2(phi/2) / k for small curvature.
    let x = 2.0 * half.sin() * half.sin() / curvature;
    let y = prefix + phi.sin() / curvature;
    ([x, y], phi)
}

/// Generates `n_scenes` scenes; the output is a pure function of the inputs.
pub fn generate_synthetic_map(seed: u64, n_scenes: usize, params: &MapParams) -> Result<Vec<Scene>> {
    if n_scenes == 0 {
        return Err(Error::param("need at least one scene"));
    }
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (params.road_length / params.point_spacing).floor() as usize;

    (0..n_scenes)
        .map(|idx| {
            let (lo, hi) = params.lane_count;
            let n_lanes = if lo == hi { lo } else { rng.random_range(lo..=hi) };
            let width = draw(&mut rng, params.lane_width);
            let curvature = draw(&mut rng, params.curvature);
            let prefix = draw(&mut rng, params.straight_prefix);
            let height = draw(&mut rng, params.camera_height);
            let pitch = draw(&mut rng, params.pitch_deg).to_radians();
            let yaw = draw(&mut rng, params.yaw_deg).to_radians();
            let lateral = draw(&mut rng, params.lateral_offset);
            // Index of the first marking right of the camera.
            let ego = if n_lanes == 1 {
                rng.random_range(0..=1usize)
            } else {
                rng.random_range(1..n_lanes)
            };

            let lanes = (0..n_lanes)
                .map(|k| {
                    let offset = (k as f64 - ego as f64 + 0.5) * width - lateral;
                    let points = (0..=steps)
                        .map(|i| {
                            let s = i as f64 * params.point_spacing;
                            let (c, phi) = centerline(s, prefix, curvature);
                            [c[0] + offset * phi.cos(), c[1] - offset * phi.sin(), 0.0]
                        })
                        .collect();
                    LanePolyline3D::new(k as i64, points)
                })
                .collect::<Result<Vec<_>>>()?;

            Ok(Scene {
                scene_id: format!("scene_{idx:05}"),
                lanes,
                camera: road_camera(height, pitch, yaw, params.focal),
            })
        })
        .collect()
}

/// Formats a float with 17 significant digits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_floats(out: &mut String, vals: impl IntoIterator<Item = f64>) {
    out.push('[');
    for (i, v) in vals.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(v));
    }
    out.push(']');
}

/// Serializes scenes as the map JSON document. Key order is fixed and floats
/// carry 17 significant digits, so equal inputs give identical bytes.
pub fn map_to_json(scenes: &[Scene]) -> String {
    let mut out = String::from("{\"scenes\":[\n");
    for (si, scene) in scenes.iter().enumerate() {
        let id = serde_json::to_string(&scene.scene_id).expect("string serializes");
        write!(out, "{{\"scene_id\":{id},\"lanes\":[").unwrap();
        for (li, lane) in scene.lanes.iter().enumerate() {
            if li > 0 {
                out.push(',');
            }
            out.push('[');
            for (pi, p) in lane.points().iter().enumerate() {
                if pi > 0 {
                    out.push(',');
                }
                push_floats(&mut out, p.iter().copied());
            }
            out.push(']');
        }
        let c = &scene.camera;
        write!(
            out,
            "],\"camera\":{{\"fx\":{},\"fy\":{},\"cx\":{},\"cy\":{},\"width\":{},\"height\":{},\"rotation\":",
            fmt_f64(c.fx),
            fmt_f64(c.fy),
            fmt_f64(c.cx),
            fmt_f64(c.cy),
            c.width,
            c.height
        )
        .unwrap();
        push_floats(&mut out, c.rotation.iter().flatten().copied());
        out.push_str(",\"translation\":");
        push_floats(&mut out, c.translation.iter().copied());
        write!(out, ",\"near\":{}}}}}", fmt_f64(c.near)).unwrap();
        out.push_str(if si + 1 < scenes.len() { ",\n" } else { "\n" });
    }
    out.push_str("]}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    scenes: Vec<RawScene>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    scene_id: String,
    lanes: Vec<Vec<[f64; 3]>>,
    camera: RawCamera,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCamera {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
    rotation: [f64; 9],
    translation: [f64; 3],
    near: f64,
}

/// Parses a map JSON document and validates every lane and camera.
pub fn map_from_json(text: &str, origin: &str) -> Result<Vec<Scene>> {
    let raw: RawMap = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    raw.scenes
        .into_iter()
        .map(|s| {
            let r = s.camera.rotation;
            let camera = CameraModel {
                fx: s.camera.fx,
                fy: s.camera.fy,
                cx: s.camera.cx,
                cy: s.camera.cy,
                width: s.camera.width,
                height: s.camera.height,
                rotation: [[r[0], r[1], r[2]], [r[3], r[4], r[5]], [r[6], r[7], r[8]]],
                translation: s.camera.translation,
                near: s.camera.near,
            };
            let ctx = |e: Error| Error::data(format!("{origin}: scene {}: {e}", s.scene_id));
            camera.validate().map_err(ctx)?;
            let lanes = s
                .lanes
                .into_iter()
                .enumerate()
                .map(|(i, pts)| LanePolyline3D::new(i as i64, pts))
                .collect::<Result<Vec<_>>>()
                .map_err(ctx)?;
            Ok(Scene {
                scene_id: s.scene_id,
                lanes,
                camera,
            })
        })
        .collect()
}

pub fn write_map(path: &Path, scenes: &[Scene]) -> Result<()> {
    std::fs::write(path, map_to_json(scenes)).map_err(|e| Error::io(path, e))
}

pub fn read_map(path: &Path) -> Result<Vec<Scene>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    map_from_json(&text, &path.display().to_string())
}
