use super::{mean_pool2, GrayImage};
use crate::error::{Error, Result};

/// SSIM / MS-SSIM parameters. Defaults are the usual published ones: an
/// 11x11 Gaussian window with sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic
/// range 1 and five pyramid scales.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
    pub ms_weights: Vec<f64>,
}

/// Allowed deviation of the MS-SSIM weight sum from 1.
pub const WEIGHT_SUM_TOL: f64 = 1e-3;

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
            ms_weights: vec![0.0448, 0.2856, 0.3001, 0.2363, 0.1333],
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::param(format!(
                "SSIM window must be odd and >= 3, got {}",
                self.window
            )));
        }
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.sigma) || !pos(self.k1) || !pos(self.k2) || !pos(self.dynamic_range) {
            return Err(Error::param(
                "SSIM sigma, k1, k2 and dynamic range must be positive",
            ));
        }
        if self.ms_weights.is_empty() || self.ms_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::param("MS-SSIM weights must be non-negative"));
        }
        // The published five-scale weights sum to 1.0001.
        let total: f64 = self.ms_weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::param(format!("MS-SSIM weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    fn kernel(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let g: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - r;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let s: f64 = g.iter().sum();
        g.into_iter().map(|v| v / s).collect()
    }
}

/// Separable "valid" filtering: output is (w - k + 1) x (h - k + 1).
fn filter_valid(src: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let k = kernel.len();
    let ow = w - k + 1;
    let oh = h - k + 1;
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = kernel.iter().zip(&row[x..x + k]).map(|(g, v)| g * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, g)| g * tmp[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM and mean contrast-structure term over all valid windows.
fn ssim_terms(a: &GrayImage, b: &GrayImage, p: &SsimParams) -> Result<(f64, f64)> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::param(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (w, h) = (a.width(), a.height());
    if w.min(h) < p.window {
        return Err(Error::param(format!(
            "{w}x{h} image is smaller than the {0}x{0} window",
            p.window
        )));
    }
    let kernel = p.kernel();
    let (pa, pb) = (a.pixels(), b.pixels());
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let ab: Vec<f64> = pa.iter().zip(pb).map(|(x, y)| x * y).collect();

    let mu_a = filter_valid(pa, w, h, &kernel);
    let mu_b = filter_valid(pb, w, h, &kernel);
    let e_aa = filter_valid(&sq(pa), w, h, &kernel);
    let e_bb = filter_valid(&sq(pb), w, h, &kernel);
    let e_ab = filter_valid(&ab, w, h, &kernel);

    let (c1, c2) = (p.c1(), p.c2());
    let mut ssim_sum = 0.0;
    let mut cs_sum = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = e_aa[i] - ma * ma;
        let var_b = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let lum = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        let cs = (2.0 * cov + c2) / (var_a + var_b + c2);
        ssim_sum += lum * cs;
        cs_sum += cs;
    }
    let n = mu_a.len() as f64;
    Ok((ssim_sum / n, cs_sum / n))
}

/// Mean structural similarity over all Gaussian windows fully inside the
/// images (no padding).
pub fn ssim(a: &GrayImage, b: &GrayImage, p: &SsimParams) -> Result<f64> {
    p.validate()?;
    Ok(ssim_terms(a, b, p)?.0)
}

/// Multi-scale SSIM: contrast-structure terms at every scale but the
/// coarsest, full SSIM at the coarsest, with 2x2 mean pooling between
/// scales. Negative factors are clamped to zero before weighting.
pub fn ms_ssim(a: &GrayImage, b: &GrayImage, p: &SsimParams) -> Result<f64> {
    p.validate()?;
    let scales = p.ms_weights.len();
    let need = p.window << (scales - 1);
    if a.width().min(a.height()) < need || b.width().min(b.height()) < need {
        return Err(Error::param(format!(
            "{} scales need a minimum side of {need} pixels, got {}x{}",
            scales,
            a.width(),
            a.height()
        )));
    }
    let mut a = a.clone();
    let mut b = b.clone();
    let mut result = 1.0;
    for (j, &weight) in p.ms_weights.iter().enumerate() {
        let (full, cs) = ssim_terms(&a, &b, p)?;
        if j + 1 == scales {
            result *= full.max(0.0).powf(weight);
        } else {
            result *= cs.max(0.0).powf(weight);
            a = mean_pool2(&a)?;
            b = mean_pool2(&b)?;
        }
    }
    Ok(result)
}
