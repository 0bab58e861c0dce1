use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight generator parameters.
///
/// Deserializing fills absent fields from [`GeneratorParams::default`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    /// Initial user-item pairs.
    pub m: usize,
    /// Iterations to run.
    #[serde(rename = "T")]
    pub iterations: u64,
    /// Probability that a new node is a user.
    pub p: f64,
    /// Edges per new user.
    pub u: usize,
    /// Edges per new item.
    pub v: usize,
    /// Probability that a new user's edge attaches preferentially.
    pub alpha: f64,
    /// Probability that a new item's edge attaches preferentially.
    pub beta: f64,
    /// Probability that a preferential edge is produced by bouncing.
    pub b: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            m: 50,
            iterations: 10_000,
            p: 0.5,
            u: 7,
            v: 7,
            alpha: 0.5,
            beta: 0.5,
            b: 0.0,
        }
    }
}

fn check_probability(field: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParam { field, reason: "must lie in [0, 1]" })
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParam { field: "m", reason: "must be at least 1" });
        }
        if self.u == 0 {
            return Err(Error::InvalidParam { field: "u", reason: "must be at least 1" });
        }
        if self.v == 0 {
            return Err(Error::InvalidParam { field: "v", reason: "must be at least 1" });
        }
        check_probability("p", self.p)?;
        check_probability("alpha", self.alpha)?;
        check_probability("beta", self.beta)?;
        check_probability("b", self.b)
    }

    /// Expected number of edges added per iteration, `p*u + (1-p)*v`.
    pub fn eta(&self) -> f64 {
        self.p * self.u as f64 + (1.0 - self.p) * self.v as f64
    }

    pub fn derived(&self) -> DerivedParams {
        let eta = self.eta();
        DerivedParams {
            eta,
            avg_user_degree: (self.p > 0.0).then(|| eta / self.p),
            avg_item_degree: (self.p < 1.0).then(|| eta / (1.0 - self.p)),
        }
    }

    /// Applies `patch`, returning the patched parameters. Nothing is modified
    /// when the patch is rejected.
    pub fn patched(&self, patch: &ParamPatch) -> Result<GeneratorParams> {
        if patch.m.is_some() {
            return Err(Error::ImmutablePairs);
        }
        let mut next = *self;
        if let Some(t) = patch.iterations {
            next.iterations = t;
        }
        if let Some(p) = patch.p {
            next.p = p;
        }
        if let Some(u) = patch.u {
            next.u = u;
        }
        if let Some(v) = patch.v {
            next.v = v;
        }
        if let Some(a) = patch.alpha {
            next.alpha = a;
        }
        if let Some(b) = patch.beta {
            next.beta = b;
        }
        if let Some(b) = patch.b {
            next.b = b;
        }
        next.validate()?;
        Ok(next)
    }
}

/// A partial parameter set for mid-run changes. `m` is present only so that
/// attempts to change it can be detected and rejected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl ParamPatch {
    pub fn is_empty(&self) -> bool {
        *self == ParamPatch::default()
    }
}

/// Per-iteration expectations implied by a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub eta: f64,
    /// `eta / p`; undefined at `p = 0`.
    pub avg_user_degree: Option<f64>,
    /// `eta / (1 - p)`; undefined at `p = 1`.
    pub avg_item_degree: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GeneratorParams::default().validate().is_ok());
        let bad = |f: fn(&mut GeneratorParams)| {
            let mut p = GeneratorParams::default();
            f(&mut p);
            p.validate().unwrap_err()
        };
        assert!(matches!(bad(|p| p.m = 0), Error::InvalidParam { field: "m", .. }));
        assert!(matches!(bad(|p| p.u = 0), Error::InvalidParam { field: "u", .. }));
        assert!(matches!(bad(|p| p.v = 0), Error::InvalidParam { field: "v", .. }));
        assert!(matches!(bad(|p| p.p = 1.2), Error::InvalidParam { field: "p", .. }));
        assert!(matches!(bad(|p| p.alpha = -0.1), Error::InvalidParam { field: "alpha", .. }));
        assert!(matches!(bad(|p| p.beta = f64::NAN), Error::InvalidParam { field: "beta", .. }));
        assert!(matches!(bad(|p| p.b = 2.0), Error::InvalidParam { field: "b", .. }));
    }

    #[test]
    fn derived_values() {
        let p = GeneratorParams::default();
        let d = p.derived();
        assert_eq!(d.eta, 7.0);
        assert_eq!(d.avg_user_degree, Some(14.0));
        assert_eq!(d.avg_item_degree, Some(14.0));

        let p = GeneratorParams { p: 1.0, u: 3, v: 9, ..Default::default() };
        let d = p.derived();
        assert_eq!(d.eta, 3.0);
        assert_eq!(d.avg_item_degree, None);

        let p = GeneratorParams { p: 0.0, ..Default::default() };
        assert_eq!(p.derived().avg_user_degree, None);
    }

    #[test]
    fn patching() {
        let base = GeneratorParams::default();
        let next = base.patched(&ParamPatch { alpha: Some(1.0), ..Default::default() }).unwrap();
        assert_eq!(next.alpha, 1.0);
        assert_eq!(next.beta, base.beta);

        assert_eq!(base.patched(&ParamPatch { m: Some(20), ..Default::default() }), Err(Error::ImmutablePairs));
        assert!(base.patched(&ParamPatch { p: Some(1.5), ..Default::default() }).is_err());
        assert_eq!(base.patched(&ParamPatch::default()).unwrap(), base);
        assert!(ParamPatch::default().is_empty());
    }
}
