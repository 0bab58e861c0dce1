//! Tail-shape regression on the empirical CCDF.

use alloc::vec::Vec;

use libm::log;
use serde::{Deserialize, Serialize};

use crate::analytics::degree::DegreeHistogram;
use crate::error::{Error, Result};

pub const MIN_DISTINCT_DEGREES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeFit {
    /// Density exponent: `|slope of ln CCDF vs ln k| + 1`.
    pub power_law_exponent: f64,
    pub power_law_r2: f64,
    /// `-slope of ln CCDF vs k`.
    pub exponential_rate: f64,
    pub exponential_r2: f64,
}

impl ShapeFit {
    pub fn prefers_exponential(&self) -> bool {
        self.exponential_r2 > self.power_law_r2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn least_squares(points: &[(f64, f64)]) -> LineFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LineFit { slope, intercept: my - slope * mx, r2 }
}

/// `(k, P(K >= k))` at every positive degree present in the histogram.
/// Degree-zero nodes are left out of the population.
pub fn ccdf_points(h: &DegreeHistogram) -> Vec<(usize, f64)> {
    let total: usize = h.counts.iter().filter(|(&k, _)| k > 0).map(|(_, &c)| c).sum();
    let mut remaining = total;
    let mut out = Vec::new();
    for (&k, &c) in h.counts.iter().filter(|(&k, &c)| k > 0 && c > 0) {
        out.push((k, remaining as f64 / total as f64));
        remaining -= c;
    }
    out
}

/// Fits both a power law (log-log) and an exponential (log-linear) to the
/// CCDF of `h`. Needs at least [`MIN_DISTINCT_DEGREES`] positive degrees.
pub fn fit_distribution_shape(h: &DegreeHistogram) -> Result<ShapeFit> {
    let pts = ccdf_points(h);
    if pts.len() < MIN_DISTINCT_DEGREES {
        return Err(Error::InsufficientSupport { needed: MIN_DISTINCT_DEGREES, found: pts.len() });
    }
    let loglog: Vec<(f64, f64)> = pts.iter().map(|&(k, c)| (log(k as f64), log(c))).collect();
    let loglin: Vec<(f64, f64)> = pts.iter().map(|&(k, c)| (k as f64, log(c))).collect();
    let pl = least_squares(&loglog);
    let ex = least_squares(&loglin);
    Ok(ShapeFit {
        power_law_exponent: -pl.slope + 1.0,
        power_law_r2: pl.r2,
        exponential_rate: -ex.slope,
        exponential_r2: ex.r2,
    })
}
