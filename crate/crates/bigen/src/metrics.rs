//! Parallel and sampled drivers over the per-node analytics of `bigen-core`.

use bigen_core::analytics::{self, BlccSum, NeighborhoodSum, Scratch};
use bigen_core::{Bigraph, Modality};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

const MIN_CHUNK: usize = 64;

/// Exact BLCC totals over every node of `modality`.
pub fn blcc_sum(g: &Bigraph, modality: Modality) -> BlccSum {
    (0..g.node_count(modality))
        .into_par_iter()
        .with_min_len(MIN_CHUNK)
        .fold(
            || (Scratch::new(), BlccSum::default()),
            |(mut s, acc), i| {
                let part = analytics::blcc_sum(g, modality, [i], &mut s);
                (s, acc.merge(part))
            },
        )
        .map(|(_, acc)| acc)
        .reduce(BlccSum::default, BlccSum::merge)
}

/// Exact neighborhood totals over every user.
pub fn neighborhood_sum(g: &Bigraph) -> NeighborhoodSum {
    (0..g.user_count())
        .into_par_iter()
        .with_min_len(MIN_CHUNK)
        .fold(
            || (Scratch::new(), NeighborhoodSum::default()),
            |(mut s, acc), u| {
                let part = analytics::neighborhood_sum(g, [u], &mut s);
                (s, acc.merge(part))
            },
        )
        .map(|(_, acc)| acc)
        .reduce(NeighborhoodSum::default, NeighborhoodSum::merge)
}

/// Node indices of a modality: all of them when there are at most
/// `threshold`, otherwise a uniform sample of `sample` without replacement.
pub fn node_subset<R: Rng + ?Sized>(
    g: &Bigraph,
    modality: Modality,
    threshold: usize,
    sample: usize,
    rng: &mut R,
) -> (Vec<usize>, bool) {
    let n = g.node_count(modality);
    if n <= threshold {
        ((0..n).collect(), false)
    } else {
        let mut picked = index::sample(rng, n, sample.min(n)).into_vec();
        picked.sort_unstable();
        (picked, true)
    }
}

pub fn blcc_sum_over(g: &Bigraph, modality: Modality, nodes: &[usize]) -> BlccSum {
    nodes
        .par_iter()
        .with_min_len(MIN_CHUNK)
        .fold(
            || (Scratch::new(), BlccSum::default()),
            |(mut s, acc), &i| {
                let part = analytics::blcc_sum(g, modality, [i], &mut s);
                (s, acc.merge(part))
            },
        )
        .map(|(_, acc)| acc)
        .reduce(BlccSum::default, BlccSum::merge)
}

pub fn neighborhood_sum_over(g: &Bigraph, users: &[usize]) -> NeighborhoodSum {
    users
        .par_iter()
        .with_min_len(MIN_CHUNK)
        .fold(
            || (Scratch::new(), NeighborhoodSum::default()),
            |(mut s, acc), &u| {
                let part = analytics::neighborhood_sum(g, [u], &mut s);
                (s, acc.merge(part))
            },
        )
        .map(|(_, acc)| acc)
        .reduce(NeighborhoodSum::default, NeighborhoodSum::merge)
}
