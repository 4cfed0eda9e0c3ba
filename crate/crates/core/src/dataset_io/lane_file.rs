//! Text lane labels: one lane per line as space-separated `x y` pixel
//! pairs, ordered from the bottom of the image upwards.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{resample_lane, LaneMask, RowGrid};

/// A parsed lane file.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneFile {
    pub mask: LaneMask,
    /// Lines skipped because they cover fewer than two distinct rows.
    pub skipped: usize,
}

pub fn parse_lane_text(text: &str, grid: &RowGrid, scene_id: &str, origin: &str) -> Result<LaneFile> {
    let mut mask = LaneMask::empty(scene_id);
    let mut skipped = 0;
    for (idx, line) in text.lines().enumerate() {
        let perr = |msg: String| Error::Parse {
            path: origin.to_string(),
            line: idx + 1,
            msg,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if !tokens.len().is_multiple_of(2) {
            return Err(perr(format!("odd number of coordinates ({})", tokens.len())));
        }
        let vals = tokens
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| perr(format!("bad coordinate '{t}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let curve: Vec<(f64, f64)> = vals.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        match resample_lane(&curve, grid) {
            Ok(lane) => mask.push(lane)?,
            Err(Error::DegenerateCurve(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(LaneFile { mask, skipped })
}

pub fn read_lane_file(path: &Path, grid: &RowGrid, scene_id: &str) -> Result<LaneFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lane_text(&text, grid, scene_id, &path.display().to_string())
}

/// Formats the valid rows of each lane, bottom to top, x with two
/// decimals. Lanes without valid rows produce no line.
pub fn format_lane_text(mask: &LaneMask, grid: &RowGrid) -> Result<String> {
    let mut out = String::new();
    for (i, lane) in mask.lanes().iter().enumerate() {
        if lane.len() != grid.samples() {
            return Err(Error::param(format!(
                "lane {i} has {} samples, grid has {}",
                lane.len(),
                grid.samples()
            )));
        }
        let pairs: Vec<String> = (0..lane.len())
            .rev()
            .filter(|&k| lane.valid()[k])
            .map(|k| format!("{:.2} {}", lane.xs()[k], grid.row(k)))
            .collect();
        if !pairs.is_empty() {
            writeln!(out, "{}", pairs.join(" ")).unwrap();
        }
    }
    Ok(out)
}

pub fn write_lane_file(mask: &LaneMask, grid: &RowGrid, path: &Path) -> Result<()> {
    let text = format_lane_text(mask, grid)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SampledLane;

    fn grid() -> RowGrid {
        RowGrid::new(150.0, 250.0, 3).unwrap()
    }

    #[test]
    fn reads_one_lane() {
        let f = parse_lane_text("100 250 200 150\n", &grid(), "s", "mem").unwrap();
        assert_eq!(f.mask.len(), 1);
        assert_eq!(f.mask.lanes()[0].xs(), &[200.0, 150.0, 100.0]);
    }

    #[test]
    fn empty_file_is_empty_mask() {
        let f = parse_lane_text("", &grid(), "s", "mem").unwrap();
        assert!(f.mask.is_empty());
    }

    #[test]
    fn odd_tokens_fail_with_line_number() {
        let err = parse_lane_text("100 250 100\n", &grid(), "s", "lanes.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_lane_text("1 2 3 4\n1 x\n", &grid(), "s", "lanes.txt").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn single_row_lines_are_counted() {
        let f = parse_lane_text("10 200\n1 250 2 150\n", &grid(), "s", "mem").unwrap();
        assert_eq!(f.mask.len(), 1);
        assert_eq!(f.skipped, 1);
    }

    #[test]
    fn writes_bottom_to_top() {
        let lane = SampledLane::from_xs(vec![200.0, 150.0, 100.0]).unwrap();
        let mask = LaneMask::new("s", vec![lane]).unwrap();
        assert_eq!(format_lane_text(&mask, &grid()).unwrap(), "100.00 250 150.00 200 200.00 150\n");
        assert_eq!(format_lane_text(&LaneMask::empty("s"), &grid()).unwrap(), "");
    }

    #[test]
    fn invalid_rows_are_not_written() {
        let lane = SampledLane::new(vec![1.0, 2.0, 3.0], vec![false, true, true]).unwrap();
        let mask = LaneMask::new("s", vec![lane]).unwrap();
        assert_eq!(format_lane_text(&mask, &grid()).unwrap(), "3.00 250 2.00 200\n");
    }
}
