use alloc::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bigraph::{Bigraph, Modality};
use crate::error::{Error, Result};

/// Exact degree counts of one modality with first and second moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub modality: Modality,
    /// degree -> number of nodes
    pub counts: BTreeMap<usize, usize>,
    pub node_count: usize,
    /// `<k>`
    pub mean: f64,
    /// `<k^2>`
    pub mean_sq: f64,
}

impl DegreeHistogram {
    /// Builds a histogram straight from `degree -> count` pairs.
    pub fn from_counts(modality: Modality, counts: BTreeMap<usize, usize>) -> Self {
        let (mut n, mut s1, mut s2) = (0usize, 0f64, 0f64);
        for (&k, &c) in &counts {
            n += c;
            s1 += (k * c) as f64;
            s2 += k as f64 * k as f64 * c as f64;
        }
        let (mean, mean_sq) = if n == 0 { (0.0, 0.0) } else { (s1 / n as f64, s2 / n as f64) };
        DegreeHistogram { modality, counts, node_count: n, mean, mean_sq }
    }

    pub fn variance(&self) -> f64 {
        self.mean_sq - self.mean * self.mean
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }
}

pub fn degree_histogram(g: &Bigraph, modality: Modality) -> DegreeHistogram {
    let mut counts = BTreeMap::new();
    for d in g.degrees(modality) {
        *counts.entry(d).or_insert(0) += 1;
    }
    DegreeHistogram::from_counts(modality, counts)
}

/// Expected degree of the node at the end of a random edge, `<k^2>/<k>`,
/// with moments taken over all nodes of both modalities.
pub fn neighbor_expected_degree(g: &Bigraph) -> Result<f64> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let (mut s1, mut s2) = (0u128, 0u128);
    for m in Modality::BOTH {
        for d in g.degrees(m) {
            s1 += d as u128;
            s2 += (d * d) as u128;
        }
    }
    Ok(s2 as f64 / s1 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_histogram() {
        let h = degree_histogram(&Bigraph::with_pairs(5).unwrap(), Modality::User);
        assert_eq!(h.counts.into_iter().collect::<alloc::vec::Vec<_>>(), [(1, 5)]);
        assert_eq!((h.mean, h.mean_sq, h.node_count), (1.0, 1.0, 5));
    }

    #[test]
    fn four_cycle_histogram() {
        let mut g = Bigraph::empty();
        for _ in 0..2 {
            g.add_node(Modality::User);
            g.add_node(Modality::Item);
        }
        for (u, i) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
            g.add_edge(u, i).unwrap();
        }
        let h = degree_histogram(&g, Modality::User);
        assert_eq!(h.counts.get(&2), Some(&2));
        assert_eq!(h.counts.len(), 1);
        assert_eq!(neighbor_expected_degree(&g).unwrap(), 2.0);
    }

    #[test]
    fn path_neighbor_degree() {
        // u0 - i0 - u1
        let mut g = Bigraph::empty();
        g.add_node(Modality::User);
        g.add_node(Modality::User);
        g.add_node(Modality::Item);
        g.add_edge(0, 0).unwrap();
        g.add_edge(1, 0).unwrap();
        assert_eq!(neighbor_expected_degree(&g).unwrap(), 1.5);
        assert_eq!(neighbor_expected_degree(&Bigraph::empty()), Err(Error::EmptyGraph));
    }
}
