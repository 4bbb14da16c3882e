//! Method-of-moments Weibull fit.

use crate::distributions::{ln_gamma, WeibullParams};
use crate::error::{Error, Result};
use crate::optimizer::params::{round_to_lattice, Granularity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub shape_bounds: (f64, f64),
    pub scale_bounds: (f64, f64),
    pub granularity: Granularity,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            shape_bounds: (0.01, 1000.0),
            scale_bounds: (0.01, f64::INFINITY),
            granularity: Granularity::default(),
        }
    }
}

/// ln(Γ(1+2/α) / Γ(1+1/α)²), decreasing in α.
fn ln_moment_ratio(alpha: f64) -> f64 {
    ln_gamma(1.0 + 2.0 / alpha) - 2.0 * ln_gamma(1.0 + 1.0 / alpha)
}

/// Shape whose squared coefficient of variation is `cv2`, by bisection on [0.05, 1000].
pub fn shape_for_cv(cv2: f64) -> f64 {
    let (mut lo, mut hi) = (0.05_f64, 1000.0_f64);
    let target = cv2.ln_1p();
    if target >= ln_moment_ratio(lo) {
        return lo;
    }
    if target <= ln_moment_ratio(hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_moment_ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn fit_weibull(durations: &[f64]) -> Result<WeibullParams> {
    fit_weibull_with(durations, &FitOptions::default())
}

/// Matches mean and sample std (n − 1), clamps into the bounds and rounds
/// onto the lattice.
pub fn fit_weibull_with(durations: &[f64], opts: &FitOptions) -> Result<WeibullParams> {
    if let Some(v) = durations.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::ParameterDomain(format!(
            "durations must be positive, got {v}"
        )));
    }
    let first = durations.first().copied();
    if durations.len() < 2 || durations.iter().all(|v| Some(*v) == first) {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 distinct values, got {}",
            durations.len()
        )));
    }
    let n = durations.len() as f64;
    let m = durations.iter().sum::<f64>() / n;
    let var = durations.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    let alpha = shape_for_cv(var / (m * m));
    let beta = m / ln_gamma(1.0 + 1.0 / alpha).exp();
    let g = opts.granularity;
    let (alo, ahi) = opts.shape_bounds;
    let (blo, bhi) = opts.scale_bounds;
    let shape = round_to_lattice(alpha.clamp(alo, ahi), g.delta_shape).max(g.delta_shape);
    let scale = round_to_lattice(beta.clamp(blo, bhi), g.delta_scale).max(g.delta_scale);
    WeibullParams::new(shape, scale)
}
