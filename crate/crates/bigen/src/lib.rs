//! File formats, reports, parameter sweeps, the `bigen` command line and the
//! live steering service, on top of `bigen-core`.

pub mod cli;
pub mod edgelist;
pub mod error;
pub mod metrics;
pub mod report;
pub mod service;
pub mod sweep;

pub use error::{Error, Result};

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds `parts` into one seed: `h = splitmix64(h ^ part)` starting from 0.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0, |h, &p| splitmix64(h ^ p))
}
