//! Second-neighbor based measures: bipartite clustering and recommender
//! neighborhoods.
//!
//! All walks run on a reusable [`Scratch`] with epoch-stamped marks, so each
//! query costs time proportional to the walked edges only.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::analytics::degree::degree_histogram;
use crate::bigraph::{Bigraph, Modality, NodeRef};
use crate::error::{Error, Result};

/// Visited marks for both modalities. Sized lazily to the graph it is used on.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    stamps: [Vec<u32>; 2],
    epoch: u32,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, g: &Bigraph) {
        for m in Modality::BOTH {
            let n = g.node_count(m);
            let s = &mut self.stamps[m.slot()];
            if s.len() < n {
                s.resize(n, 0);
            }
        }
        if self.epoch == u32::MAX {
            for s in &mut self.stamps {
                s.iter_mut().for_each(|x| *x = 0);
            }
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    /// Marks `node`; returns true if it was not marked in this epoch.
    #[inline]
    fn visit(&mut self, node: NodeRef) -> bool {
        let s = &mut self.stamps[node.modality.slot()][node.index];
        if *s == self.epoch {
            false
        } else {
            *s = self.epoch;
            true
        }
    }
}

/// `|N2(j)|`: distinct nodes at distance exactly two from `j`.
pub fn second_neighbor_count(g: &Bigraph, j: NodeRef, scratch: &mut Scratch) -> usize {
    scratch.reset(g);
    scratch.visit(j);
    let other = j.modality.opposite();
    let mut count = 0;
    for &i in g.neighbors(j) {
        for &x in g.neighbors(NodeRef { modality: other, index: i }) {
            if scratch.visit(NodeRef { modality: j.modality, index: x }) {
                count += 1;
            }
        }
    }
    count
}

/// Bipartite local clustering coefficient
/// `1 - |N2(j)| / sum_{i in N1(j)} (k_i - 1)`.
///
/// `None` when the denominator is zero: `j` is isolated or all of its
/// neighbors have degree one.
pub fn blcc_with(g: &Bigraph, j: NodeRef, scratch: &mut Scratch) -> Option<f64> {
    let other = j.modality.opposite();
    let walks: usize = g
        .neighbors(j)
        .iter()
        .map(|&i| g.degree(NodeRef { modality: other, index: i }) - 1)
        .sum();
    if walks == 0 {
        return None;
    }
    let distinct = second_neighbor_count(g, j, scratch);
    Some(1.0 - distinct as f64 / walks as f64)
}

pub fn blcc(g: &Bigraph, j: NodeRef) -> Option<f64> {
    blcc_with(g, j, &mut Scratch::new())
}

/// Sum and count of defined BLCC values over a set of nodes of one modality.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BlccSum {
    pub sum: f64,
    pub defined: usize,
    pub undefined: usize,
}

impl BlccSum {
    pub fn merge(self, other: BlccSum) -> BlccSum {
        BlccSum {
            sum: self.sum + other.sum,
            defined: self.defined + other.defined,
            undefined: self.undefined + other.undefined,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.defined > 0).then(|| self.sum / self.defined as f64)
    }
}

pub fn blcc_sum(
    g: &Bigraph,
    modality: Modality,
    nodes: impl IntoIterator<Item = usize>,
    scratch: &mut Scratch,
) -> BlccSum {
    let mut acc = BlccSum::default();
    for index in nodes {
        match blcc_with(g, NodeRef { modality, index }, scratch) {
            Some(v) => {
                acc.sum += v;
                acc.defined += 1;
            }
            None => acc.undefined += 1,
        }
    }
    acc
}

/// BLCC of every node, with per-modality means over defined values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlccReport {
    pub users: Vec<Option<f64>>,
    pub items: Vec<Option<f64>>,
    pub user_mean: Option<f64>,
    pub item_mean: Option<f64>,
    pub user_defined: usize,
    pub item_defined: usize,
}

impl BlccReport {
    pub fn get(&self, node: NodeRef) -> Option<f64> {
        match node.modality {
            Modality::User => self.users[node.index],
            Modality::Item => self.items[node.index],
        }
    }

    pub fn defined_count(&self) -> usize {
        self.user_defined + self.item_defined
    }
}

pub fn blcc_report(g: &Bigraph) -> BlccReport {
    let mut scratch = Scratch::new();
    let mut per = |m: Modality| -> Vec<Option<f64>> {
        (0..g.node_count(m)).map(|index| blcc_with(g, NodeRef { modality: m, index }, &mut scratch)).collect()
    };
    let users = per(Modality::User);
    let items = per(Modality::Item);
    let stats = |vals: &[Option<f64>]| {
        let defined: Vec<f64> = vals.iter().flatten().copied().collect();
        let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        (mean, defined.len())
    };
    let (user_mean, user_defined) = stats(&users);
    let (item_mean, item_defined) = stats(&items);
    BlccReport { users, items, user_mean, item_mean, user_defined, item_defined }
}

/// Measured versus tree-approximated mean number of second neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondNeighborStats {
    pub modality: Modality,
    pub real_mean: f64,
    pub theoretic_mean: f64,
    /// `None` when the theoretic mean is zero.
    pub ratio: Option<f64>,
}

/// Mean `|N2|` over `modality` against `<u> (<v^2>/<v> - 1)`, where `<u>` is
/// the mean degree of `modality` and `<v>`, `<v^2>` are the moments of the
/// opposite one.
pub fn second_neighbor_stats(g: &Bigraph, modality: Modality) -> Result<SecondNeighborStats> {
    for m in Modality::BOTH {
        if g.node_count(m) == 0 {
            return Err(Error::EmptyModality(m));
        }
    }
    let own = degree_histogram(g, modality);
    let other = degree_histogram(g, modality.opposite());
    let mut scratch = Scratch::new();
    let total: usize = (0..g.node_count(modality))
        .map(|index| second_neighbor_count(g, NodeRef { modality, index }, &mut scratch))
        .sum();
    let real_mean = total as f64 / g.node_count(modality) as f64;
    let theoretic_mean =
        if other.mean > 0.0 { own.mean * (other.mean_sq / other.mean - 1.0) } else { 0.0 };
    let ratio = (theoretic_mean > 0.0).then(|| real_mean / theoretic_mean);
    Ok(SecondNeighborStats { modality, real_mean, theoretic_mean, ratio })
}

/// Size of a user's recommendation neighborhood.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighborhood {
    /// Other users sharing at least one item.
    pub similar_users: usize,
    /// Distinct items held by those users.
    pub neighbor_items: usize,
}

pub fn similarity_neighborhood_with(g: &Bigraph, user: usize, scratch: &mut Scratch) -> Neighborhood {
    let j = NodeRef::user(user);
    scratch.reset(g);
    scratch.visit(j);
    let mut similar: Vec<usize> = Vec::new();
    for &i in g.neighbors(j) {
        for &x in g.neighbors(NodeRef::item(i)) {
            if scratch.visit(NodeRef::user(x)) {
                similar.push(x);
            }
        }
    }
    let item_total = g.item_count();
    let mut items = 0;
    'outer: for &s in &similar {
        for &i in g.neighbors(NodeRef::user(s)) {
            if scratch.visit(NodeRef::item(i)) {
                items += 1;
                if items == item_total {
                    break 'outer;
                }
            }
        }
    }
    Neighborhood { similar_users: similar.len(), neighbor_items: items }
}

pub fn similarity_neighborhood(g: &Bigraph, user: usize) -> Neighborhood {
    similarity_neighborhood_with(g, user, &mut Scratch::new())
}

/// Neighborhood totals over a set of users, for averaging.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodSum {
    pub similar_users: u64,
    pub neighbor_items: u64,
    pub users: usize,
}

impl NeighborhoodSum {
    pub fn merge(self, o: NeighborhoodSum) -> NeighborhoodSum {
        NeighborhoodSum {
            similar_users: self.similar_users + o.similar_users,
            neighbor_items: self.neighbor_items + o.neighbor_items,
            users: self.users + o.users,
        }
    }

    pub fn means(&self) -> (f64, f64) {
        if self.users == 0 {
            return (0.0, 0.0);
        }
        let n = self.users as f64;
        (self.similar_users as f64 / n, self.neighbor_items as f64 / n)
    }
}

pub fn neighborhood_sum(
    g: &Bigraph,
    users: impl IntoIterator<Item = usize>,
    scratch: &mut Scratch,
) -> NeighborhoodSum {
    let mut acc = NeighborhoodSum::default();
    for u in users {
        let n = similarity_neighborhood_with(g, u, scratch);
        acc.similar_users += n.similar_users as u64;
        acc.neighbor_items += n.neighbor_items as u64;
        acc.users += 1;
    }
    acc
}

/// Mean neighborhood sizes over all users; users with no similar user count
/// as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodReport {
    pub mean_similar_users: f64,
    pub mean_neighbor_items: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_user: Option<Vec<Neighborhood>>,
}

pub fn neighborhood_report(g: &Bigraph, keep_per_user: bool) -> NeighborhoodReport {
    let mut scratch = Scratch::new();
    if keep_per_user {
        let per: Vec<Neighborhood> =
            (0..g.user_count()).map(|u| similarity_neighborhood_with(g, u, &mut scratch)).collect();
        let sum = per.iter().fold(NeighborhoodSum::default(), |acc, n| {
            acc.merge(NeighborhoodSum {
                similar_users: n.similar_users as u64,
                neighbor_items: n.neighbor_items as u64,
                users: 1,
            })
        });
        let (s, i) = sum.means();
        NeighborhoodReport { mean_similar_users: s, mean_neighbor_items: i, per_user: Some(per) }
    } else {
        let (s, i) = neighborhood_sum(g, 0..g.user_count(), &mut scratch).means();
        NeighborhoodReport { mean_similar_users: s, mean_neighbor_items: i, per_user: None }
    }
}
