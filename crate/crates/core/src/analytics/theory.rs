//! Closed-form predictions of the growth model and of the clustering
//! argument behind BLCC.

use libm::{exp, pow};

use crate::bigraph::Modality;
use crate::error::{Error, Result};
use crate::params::GeneratorParams;

/// Selection probability of a user with degree `k` when a new item attaches
/// at time `t`: `beta/(p t) + (1 - beta) k/(eta t)`.
pub fn combined_kernel(k: f64, t: f64, params: &GeneratorParams) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Singular("t must be positive"));
    }
    let eta = params.eta();
    if eta <= 0.0 {
        return Err(Error::Singular("eta must be positive"));
    }
    let random = if params.beta > 0.0 {
        if params.p <= 0.0 {
            return Err(Error::Singular("random branch needs p > 0"));
        }
        params.beta / (params.p * t)
    } else {
        0.0
    };
    Ok(random + (1.0 - params.beta) * k / (eta * t))
}

/// Continuum degree law of one modality, written for the user side: new
/// nodes start at `start` edges and gain edges from the other side at rate
/// `other_share * other_edges * kernel`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DegreeLaw {
    start: f64,
    /// scaling of the shifted degree, `share * (1 - mix)`
    slope: f64,
    /// `mix * eta`
    offset: f64,
    /// CCDF exponent `eta / ((1 - share) (1 - mix) other_edges)`
    gamma: f64,
}

impl DegreeLaw {
    fn new(modality: Modality, params: &GeneratorParams) -> Result<Self> {
        let (share, start, other_edges, mix) = match modality {
            Modality::User => (params.p, params.u, params.v, params.beta),
            Modality::Item => (1.0 - params.p, params.v, params.u, params.alpha),
        };
        if !(params.p > 0.0 && params.p < 1.0) {
            return Err(Error::InvalidParam { field: "p", reason: "must lie strictly inside (0, 1)" });
        }
        if mix >= 1.0 {
            return Err(Error::Singular("fully random attachment has an exponential limit"));
        }
        let eta = params.eta();
        Ok(DegreeLaw {
            start: start as f64,
            slope: share * (1.0 - mix),
            offset: mix * eta,
            gamma: eta / ((1.0 - share) * (1.0 - mix) * other_edges as f64),
        })
    }

    fn base(&self, k: f64) -> f64 {
        (self.offset + self.slope * k) / (self.offset + self.slope * self.start)
    }

    fn pdf(&self, k: f64) -> f64 {
        if k < self.start {
            return 0.0;
        }
        let norm = self.offset + self.slope * self.start;
        self.gamma * self.slope / norm * pow(self.base(k), -self.gamma - 1.0)
    }

    fn ccdf(&self, k: f64) -> f64 {
        if k <= self.start {
            return 1.0;
        }
        pow(self.base(k), -self.gamma)
    }
}

/// Normalized asymptotic user-degree density on `k >= u`:
///
/// `P(k) = gamma * p(1-beta) / D * ((beta*eta + p(1-beta)k) / D)^(-gamma-1)`
///
/// with `D = beta*eta + p(1-beta)u` and `gamma = eta / ((1-p)(1-beta)v)`.
/// This is the derivative of the CDF `1 - ((beta*eta + p(1-beta)k)/D)^-gamma`
/// and integrates to one. Zero below `u`. At `beta = 0` it is a power law
/// with exponent `gamma + 1`.
pub fn theoretical_pdf(k: f64, params: &GeneratorParams) -> Result<f64> {
    Ok(DegreeLaw::new(Modality::User, params)?.pdf(k))
}

/// Same density for either modality; items swap `p <-> 1-p`, `u <-> v` and
/// use `alpha` as the mixing probability.
pub fn theoretical_pdf_for(modality: Modality, k: f64, params: &GeneratorParams) -> Result<f64> {
    Ok(DegreeLaw::new(modality, params)?.pdf(k))
}

/// `P(K >= k)` of the same law.
pub fn theoretical_ccdf_for(modality: Modality, k: f64, params: &GeneratorParams) -> Result<f64> {
    Ok(DegreeLaw::new(modality, params)?.ccdf(k))
}

/// Power-law exponent of the user-degree density at `beta = 0`:
/// `eta / ((1-p) v) + 1`.
pub fn power_law_exponent(params: &GeneratorParams) -> Result<f64> {
    let law = DegreeLaw::new(Modality::User, &GeneratorParams { beta: 0.0, ..*params })?;
    Ok(law.gamma + 1.0)
}

/// Limit of the user-degree density as `beta -> 1`:
/// `lambda * exp(-lambda (k - u))` with `lambda = p / ((1-p) v)`.
pub fn exponential_limit_pdf(k: f64, params: &GeneratorParams) -> Result<f64> {
    let lambda = exponential_limit_rate(params)?;
    let u = params.u as f64;
    Ok(if k < u { 0.0 } else { lambda * exp(-lambda * (k - u)) })
}

pub fn exponential_limit_rate(params: &GeneratorParams) -> Result<f64> {
    if !(params.p > 0.0 && params.p < 1.0) {
        return Err(Error::InvalidParam { field: "p", reason: "must lie strictly inside (0, 1)" });
    }
    Ok(params.p / ((1.0 - params.p) * params.v as f64))
}

/// Expected unipartite LCC `f(c)` and BLCC `g(c)` of a node whose neighbors
/// share `c` links, under the tree-like assumption:
/// `f = 2c / (<k>^2 - <k>)`, `g = 2c / (<k^2> - <k>)`.
pub fn fc_gc(c: f64, k_mean: f64, k_sq_mean: f64) -> Result<(f64, f64)> {
    if k_mean <= 1.0 {
        return Err(Error::InvalidParam { field: "k_mean", reason: "must exceed 1" });
    }
    if k_sq_mean < k_mean * k_mean {
        return Err(Error::InvalidParam { field: "k_sq_mean", reason: "second moment below squared mean" });
    }
    if c < 0.0 {
        return Err(Error::InvalidParam { field: "c", reason: "must be nonnegative" });
    }
    Ok((2.0 * c / (k_mean * k_mean - k_mean), 2.0 * c / (k_sq_mean - k_mean)))
}
