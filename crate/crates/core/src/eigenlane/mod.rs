//! Eigenlane embedding: a truncated left singular basis of the lane matrix,
//! lane coefficients in that basis, and distances between them.

mod svd;

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::synthetic::fmt_f64;
use crate::geometry::{LaneMask, SampledLane};

/// Cumulative energy fraction used by [`Rank::Auto`].
pub const AUTO_ENERGY: f64 = 0.99;

/// The lane matrix: one column per lane, `samples` rows.
#[derive(Debug, Clone, Default)]
pub struct LanePool {
    samples: usize,
    columns: Vec<Vec<f64>>,
    sources: Vec<(String, usize)>,
}

impl LanePool {
    pub fn new(samples: usize) -> Self {
        Self {
            samples,
            ..Self::default()
        }
    }

    /// Every lane of every mask, in order, each exactly once.
    pub fn from_masks<'a>(masks: impl IntoIterator<Item = &'a LaneMask>) -> Result<Self> {
        let mut pool: Option<Self> = None;
        for mask in masks {
            for (i, lane) in mask.lanes().iter().enumerate() {
                let p = pool.get_or_insert_with(|| Self::new(lane.len()));
                p.push(lane.xs().to_vec(), (mask.scene_id.clone(), i))?;
            }
        }
        pool.ok_or_else(|| Error::data("lane pool is empty"))
    }

    pub fn push(&mut self, xs: Vec<f64>, source: (String, usize)) -> Result<()> {
        if xs.len() != self.samples {
            return Err(Error::param(format!(
                "lane from {}#{} has {} samples, pool uses {}",
                source.0,
                source.1,
                xs.len(),
                self.samples
            )));
        }
        self.columns.push(xs);
        self.sources.push(source);
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn sources(&self) -> &[(String, usize)] {
        &self.sources
    }
}

/// Truncation rank of the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    /// Smallest rank whose cumulative squared singular values reach
    /// [`AUTO_ENERGY`] of the total.
    Auto,
    Fixed(usize),
}

impl FromStr for Rank {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Rank::Auto);
        }
        s.parse::<usize>()
            .map(Rank::Fixed)
            .map_err(|_| Error::param(format!("rank must be 'auto' or a count, got '{s}'")))
    }
}

impl std::fmt::Display for Rank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rank::Auto => f.write_str("auto"),
            Rank::Fixed(r) => write!(f, "{r}"),
        }
    }
}

/// Coefficients of a lane in the eigenlane basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneCoefficients(pub Vec<f64>);

impl LaneCoefficients {
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// First `rank` left singular vectors of the lane matrix plus all
/// `min(P, L)` singular values.
///
/// Each basis vector's first entry with magnitude above 1e-12 is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenlaneBasis {
    samples: usize,
    rank: usize,
    /// Row-major `samples x rank`.
    u: Vec<f64>,
    sigma: Vec<f64>,
}

impl EigenlaneBasis {
    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    /// Basis vector `k` as an owned column.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.samples).map(|i| self.u[i * self.rank + k]).collect()
    }

    /// Fraction of the squared singular value mass captured by the rank.
    pub fn energy_captured(&self) -> f64 {
        let total: f64 = self.sigma.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return 1.0;
        }
        self.sigma[..self.rank].iter().map(|s| s * s).sum::<f64>() / total
    }

    fn check_samples(&self, n: usize) -> Result<()> {
        if n != self.samples {
            return Err(Error::param(format!(
                "lane has {n} samples, basis expects {}",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn embed_xs(&self, xs: &[f64]) -> Result<LaneCoefficients> {
        self.check_samples(xs.len())?;
        let mut c = vec![0.0; self.rank];
        for (row, &x) in self.u.chunks_exact(self.rank).zip(xs) {
            for (ck, &uk) in c.iter_mut().zip(row) {
                *ck += uk * x;
            }
        }
        Ok(LaneCoefficients(c))
    }

    /// Coefficients `U_R^T x`. Validity flags are ignored.
    pub fn embed(&self, lane: &SampledLane) -> Result<LaneCoefficients> {
        self.embed_xs(lane.xs())
    }

    /// Lane `U_R c` rebuilt from its coefficients.
    pub fn reconstruct(&self, c: &LaneCoefficients) -> Result<Vec<f64>> {
        if c.0.len() != self.rank {
            return Err(Error::param(format!(
                "{} coefficients for a rank-{} basis",
                c.0.len(),
                self.rank
            )));
        }
        Ok(self
            .u
            .chunks_exact(self.rank)
            .map(|row| row.iter().zip(&c.0).map(|(u, c)| u * c).sum())
            .collect())
    }

    /// Euclidean distance between two lanes in coefficient space.
    pub fn lane_distance(&self, a: &SampledLane, b: &SampledLane) -> Result<f64> {
        Ok(self.embed(a)?.distance(&self.embed(b)?))
    }

    /// Text form: a header `EIGENLANE v1 P R S`, the singular values, then
    /// one row of the basis matrix per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "EIGENLANE v1 {} {} {}\n",
            self.samples,
            self.rank,
            self.sigma.len()
        );
        let join = |vals: &[f64]| vals.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(" ");
        writeln!(out, "{}", join(&self.sigma)).unwrap();
        for row in self.u.chunks_exact(self.rank) {
            writeln!(out, "{}", join(row)).unwrap();
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
        if header.len() != 5 || header[0] != "EIGENLANE" || header[1] != "v1" {
            return Err(perr(1, "expected header 'EIGENLANE v1 P R S'".into()));
        }
        let dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| perr(1, format!("bad dimension '{s}'")))
        };
        let (samples, rank, s) = (dim(header[2])?, dim(header[3])?, dim(header[4])?);
        if rank == 0 || rank > s || s > samples {
            return Err(perr(1, format!("inconsistent dimensions P={samples} R={rank} S={s}")));
        }
        let floats = |line_no: usize, line: Option<&str>, expect: usize| -> Result<Vec<f64>> {
            let line = line.ok_or_else(|| perr(line_no, "unexpected end of file".into()))?;
            let vals = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| perr(line_no, format!("bad number '{t}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != expect {
                return Err(perr(line_no, format!("expected {expect} values, got {}", vals.len())));
            }
            Ok(vals)
        };
        let sigma = floats(2, lines.next(), s)?;
        let mut u = Vec::with_capacity(samples * rank);
        for i in 0..samples {
            u.extend(floats(i + 3, lines.next(), rank)?);
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(perr(samples + 3, "trailing content".into()));
        }
        Ok(Self {
            samples,
            rank,
            u,
            sigma,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

/// Fits the eigenlane basis of a lane pool.
pub fn fit_basis(pool: &LanePool, rank: Rank) -> Result<EigenlaneBasis> {
    if pool.is_empty() {
        return Err(Error::data("lane pool is empty"));
    }
    let p = pool.samples();
    let s = p.min(pool.len());
    let svd = svd::left_svd(p, pool.columns());
    let sigma = svd.sigma[..s].to_vec();

    let rank = match rank {
        Rank::Fixed(r) if r == 0 || r > s => {
            return Err(Error::param(format!("rank {r} outside 1..={s}")));
        }
        Rank::Fixed(r) => r,
        Rank::Auto => {
            let total: f64 = sigma.iter().map(|v| v * v).sum();
            let mut acc = 0.0;
            let mut chosen = s;
            for (k, v) in sigma.iter().enumerate() {
                acc += v * v;
                if acc >= AUTO_ENERGY * total {
                    chosen = k + 1;
                    break;
                }
            }
            chosen
        }
    };

    let mut u = Vec::with_capacity(p * rank);
    for i in 0..p {
        for k in 0..rank {
            u.push(svd.u[k * p + i]);
        }
    }
    Ok(EigenlaneBasis {
        samples: p,
        rank,
        u,
        sigma,
    })
}
