//! Lane-mask similarity: sum of nearest-lane distances in eigenlane space
//! plus a penalty per missing lane. Larger values mean less alike.

use crate::eigenlane::{EigenlaneBasis, LaneCoefficients};
use crate::error::{Error, Result};
use crate::geometry::LaneMask;

/// A lane mask with every lane already embedded.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedMask(pub Vec<LaneCoefficients>);

impl EmbeddedMask {
    pub fn new(mask: &LaneMask, basis: &EigenlaneBasis) -> Result<Self> {
        mask.lanes()
            .iter()
            .map(|l| basis.embed(l))
            .collect::<Result<Vec<_>>>()
            .map(EmbeddedMask)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct MaskSimilarityConfig<'a> {
    kappa: f64,
    pub basis: &'a EigenlaneBasis,
}

impl<'a> MaskSimilarityConfig<'a> {
    pub fn new(kappa: f64, basis: &'a EigenlaneBasis) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Self { kappa, basis })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::param(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    Ok(())
}

/// Sum over reference lanes of the distance to their nearest source lane.
/// A source lane may be nearest to several reference lanes.
pub fn directed_cost_embedded(src: &EmbeddedMask, reference: &EmbeddedMask) -> Result<f64> {
    if reference.is_empty() {
        return Ok(0.0);
    }
    if src.is_empty() {
        return Err(Error::UndefinedMatching {
            ref_lanes: reference.len(),
        });
    }
    Ok(reference
        .0
        .iter()
        .map(|r| {
            src.0
                .iter()
                .map(|s| s.distance(r))
                .fold(f64::INFINITY, f64::min)
        })
        .sum())
}

pub fn directed_cost(src: &LaneMask, reference: &LaneMask, basis: &EigenlaneBasis) -> Result<f64> {
    directed_cost_embedded(&EmbeddedMask::new(src, basis)?, &EmbeddedMask::new(reference, basis)?)
}

/// Symmetric mask similarity over pre-embedded masks.
///
/// With unequal lane counts the larger mask is the source and the count gap
/// is charged `kappa` per lane. Equal counts average both directions.
pub fn mask_similarity_embedded(a: &EmbeddedMask, b: &EmbeddedMask, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let (m, n) = (a.len(), b.len());
    if m == n {
        if m == 0 {
            return Ok(0.0);
        }
        let ab = directed_cost_embedded(a, b)?;
        let ba = directed_cost_embedded(b, a)?;
        return Ok((ab + ba) / 2.0);
    }
    let (larger, smaller) = if m > n { (a, b) } else { (b, a) };
    let gap = larger.len() - smaller.len();
    Ok(directed_cost_embedded(larger, smaller)? + gap as f64 * kappa)
}

pub fn mask_similarity(a: &LaneMask, b: &LaneMask, cfg: &MaskSimilarityConfig) -> Result<f64> {
    mask_similarity_embedded(
        &EmbeddedMask::new(a, cfg.basis)?,
        &EmbeddedMask::new(b, cfg.basis)?,
        cfg.kappa,
    )
}

/// Mean pairwise lane distance over all lanes of the given masks, used as
/// the default penalty. Returns 0 for fewer than two lanes.
pub fn default_kappa(masks: &[EmbeddedMask]) -> f64 {
    let lanes: Vec<&LaneCoefficients> = masks.iter().flat_map(|m| &m.0).collect();
    if lanes.len() < 2 {
        return 0.0;
    }
    // Row sums first, then a fixed-order total, so the value does not depend
    // on how the rows are scheduled.
    let row_sums: Vec<f64> = (0..lanes.len())
        .map(|i| lanes[i + 1..].iter().map(|l| l.distance(lanes[i])).sum())
        .collect();
    let pairs = lanes.len() * (lanes.len() - 1) / 2;
    row_sums.iter().sum::<f64>() / pairs as f64
}
