//! Simple, append-only bipartite graph.
//!
//! Every node keeps its neighbors in insertion order. Each modality also keeps
//! an *endpoint index*: a flat list that holds every node once per incident
//! edge. Picking a uniform entry from it selects a node with probability
//! `degree / edge_count`, which makes preferential sampling O(1) and keeps the
//! structure append-only as the graph grows.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    User,
    Item,
}

impl Modality {
    pub const BOTH: [Modality; 2] = [Modality::User, Modality::Item];

    pub fn opposite(self) -> Modality {
        match self {
            Modality::User => Modality::Item,
            Modality::Item => Modality::User,
        }
    }

    #[inline]
    pub(crate) fn slot(self) -> usize {
        match self {
            Modality::User => 0,
            Modality::Item => 1,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::User => "user",
            Modality::Item => "item",
        })
    }
}

/// A node handle: modality plus a dense per-modality index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRef {
    pub modality: Modality,
    pub index: usize,
}

impl NodeRef {
    pub fn user(index: usize) -> Self {
        NodeRef { modality: Modality::User, index }
    }

    pub fn item(index: usize) -> Self {
        NodeRef { modality: Modality::Item, index }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.modality, self.index)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bigraph {
    // adjacency[slot][node] lists indices in the opposite modality
    adjacency: [Vec<Vec<usize>>; 2],
    endpoints: [Vec<usize>; 2],
    edge_count: usize,
}

impl Bigraph {
    /// A graph with no nodes. Mostly useful for ingestion.
    pub fn empty() -> Self {
        Self::default()
    }

    /// `m` disjoint user-item pairs: user `i` is joined to item `i`.
    pub fn with_pairs(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroPairs);
        }
        let mut g = Bigraph::empty();
        for i in 0..m {
            g.add_node(Modality::User);
            g.add_node(Modality::Item);
            g.add_edge(i, i).expect("fresh pair");
        }
        Ok(g)
    }

    pub fn node_count(&self, modality: Modality) -> usize {
        self.adjacency[modality.slot()].len()
    }

    pub fn user_count(&self) -> usize {
        self.node_count(Modality::User)
    }

    pub fn item_count(&self) -> usize {
        self.node_count(Modality::Item)
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        node.index < self.node_count(node.modality)
    }

    fn check(&self, node: NodeRef) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(Error::NoSuchNode { modality: node.modality, index: node.index })
        }
    }

    /// Neighbor indices of `node`, in the opposite modality, in insertion order.
    ///
    /// Panics if the node does not exist.
    #[inline]
    pub fn neighbors(&self, node: NodeRef) -> &[usize] {
        &self.adjacency[node.modality.slot()][node.index]
    }

    #[inline]
    pub fn degree(&self, node: NodeRef) -> usize {
        self.neighbors(node).len()
    }

    /// Degrees of every node of one modality, by index.
    pub fn degrees(&self, modality: Modality) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.adjacency[modality.slot()].iter().map(Vec::len)
    }

    /// Every node of `modality` once per incident edge.
    pub fn endpoint_index(&self, modality: Modality) -> &[usize] {
        &self.endpoints[modality.slot()]
    }

    pub fn has_edge(&self, user: usize, item: usize) -> bool {
        let users = &self.adjacency[0];
        let items = &self.adjacency[1];
        if user >= users.len() || item >= items.len() {
            return false;
        }
        // scan the shorter list
        if users[user].len() <= items[item].len() {
            users[user].contains(&item)
        } else {
            items[item].contains(&user)
        }
    }

    /// Edges as `(user, item)` pairs sorted by user index, then item index.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, adj) in self.adjacency[0].iter().enumerate() {
            let start = out.len();
            out.extend(adj.iter().map(|&i| (u, i)));
            out[start..].sort_unstable();
        }
        out
    }

    pub fn add_node(&mut self, modality: Modality) -> NodeRef {
        let nodes = &mut self.adjacency[modality.slot()];
        nodes.push(Vec::new());
        NodeRef { modality, index: nodes.len() - 1 }
    }

    /// Joins `user` and `item`. A repeated edge is rejected with
    /// [`Error::DuplicateEdge`] and leaves the graph untouched.
    pub fn add_edge(&mut self, user: usize, item: usize) -> Result<()> {
        self.check(NodeRef::user(user))?;
        self.check(NodeRef::item(item))?;
        if self.has_edge(user, item) {
            return Err(Error::DuplicateEdge { user, item });
        }
        self.adjacency[0][user].push(item);
        self.adjacency[1][item].push(user);
        self.endpoints[0].push(user);
        self.endpoints[1].push(item);
        self.edge_count += 1;
        Ok(())
    }

    /// Adds an edge between two nodes of opposite modality, in either order.
    pub fn connect(&mut self, a: NodeRef, b: NodeRef) -> Result<()> {
        match (a.modality, b.modality) {
            (Modality::User, Modality::Item) => self.add_edge(a.index, b.index),
            (Modality::Item, Modality::User) => self.add_edge(b.index, a.index),
            (m, _) => Err(Error::WrongModality { expected: m.opposite(), found: m }),
        }
    }

    /// Uniform node of `modality`.
    pub fn draw_uniform<R: Rng + ?Sized>(&self, modality: Modality, rng: &mut R) -> Result<NodeRef> {
        let n = self.node_count(modality);
        if n == 0 {
            return Err(Error::EmptyModality(modality));
        }
        Ok(NodeRef { modality, index: rng.gen_range(0..n) })
    }

    /// Node of `modality` with probability `degree / edge_count`.
    pub fn draw_preferential<R: Rng + ?Sized>(
        &self,
        modality: Modality,
        rng: &mut R,
    ) -> Result<NodeRef> {
        let ends = &self.endpoints[modality.slot()];
        if ends.is_empty() {
            return Err(Error::ZeroDegree(modality));
        }
        Ok(NodeRef { modality, index: ends[rng.gen_range(0..ends.len())] })
    }

    /// Full structural check. Returns a description of the first violation.
    pub fn validate(&self) -> core::result::Result<(), &'static str> {
        for m in Modality::BOTH {
            let other = self.node_count(m.opposite());
            let mut total = 0;
            let mut seen = Vec::new();
            for adj in &self.adjacency[m.slot()] {
                total += adj.len();
                if adj.iter().any(|&n| n >= other) {
                    return Err("adjacency entry out of range");
                }
                seen.clear();
                seen.extend_from_slice(adj);
                seen.sort_unstable();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    return Err("duplicate edge");
                }
            }
            if total != self.edge_count {
                return Err("degree sum differs from edge count");
            }
            let ends = &self.endpoints[m.slot()];
            if ends.len() != self.edge_count {
                return Err("endpoint index length differs from edge count");
            }
            let mut counts = alloc::vec![0usize; self.node_count(m)];
            for &e in ends {
                match counts.get_mut(e) {
                    Some(c) => *c += 1,
                    None => return Err("endpoint index entry out of range"),
                }
            }
            if counts.iter().zip(self.degrees(m)).any(|(&c, d)| c != d) {
                return Err("endpoint index disagrees with degrees");
            }
        }
        for (u, adj) in self.adjacency[0].iter().enumerate() {
            if adj.iter().any(|&i| !self.adjacency[1][i].contains(&u)) {
                return Err("asymmetric adjacency");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn four_cycle() -> Bigraph {
        let mut g = Bigraph::empty();
        for _ in 0..2 {
            g.add_node(Modality::User);
            g.add_node(Modality::Item);
        }
        for (u, i) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
            g.add_edge(u, i).unwrap();
        }
        g
    }

    #[test]
    fn pairs_construction() {
        let g = Bigraph::with_pairs(1).unwrap();
        assert_eq!((g.user_count(), g.item_count(), g.edge_count()), (1, 1, 1));
        assert_eq!(g.degree(NodeRef::user(0)), 1);
        assert_eq!(g.degree(NodeRef::item(0)), 1);

        let g = Bigraph::with_pairs(10).unwrap();
        assert_eq!((g.user_count(), g.item_count(), g.edge_count()), (10, 10, 10));

        let g = Bigraph::with_pairs(50).unwrap();
        for i in 0..50 {
            assert_eq!(g.neighbors(NodeRef::user(i)), &[i]);
            assert_eq!(g.neighbors(NodeRef::item(i)), &[i]);
        }
        assert_eq!(g.endpoint_index(Modality::User).len(), 50);
        assert_eq!(g.endpoint_index(Modality::Item).len(), 50);
        g.validate().unwrap();

        assert_eq!(Bigraph::with_pairs(0), Err(Error::ZeroPairs));
    }

    #[test]
    fn add_edge_accounting() {
        let mut g = Bigraph::with_pairs(2).unwrap();
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degree(NodeRef::user(0)), 2);
        assert_eq!(g.endpoint_index(Modality::User).len(), 3);
        assert_eq!(g.endpoint_index(Modality::Item).len(), 3);

        assert_eq!(g.add_edge(0, 0), Err(Error::DuplicateEdge { user: 0, item: 0 }));
        assert_eq!(g.edge_count(), 3);
        g.validate().unwrap();

        let fresh = g.add_node(Modality::User);
        assert_eq!(g.degree(fresh), 0);
        g.add_edge(fresh.index, 0).unwrap();
        assert_eq!(g.degree(fresh), 1);

        assert!(matches!(g.add_edge(0, 9), Err(Error::NoSuchNode { .. })));
        assert!(matches!(
            g.connect(NodeRef::user(0), NodeRef::user(1)),
            Err(Error::WrongModality { .. })
        ));
    }

    #[test]
    fn add_node_indices() {
        let mut g = Bigraph::with_pairs(1).unwrap();
        assert_eq!(g.add_node(Modality::User), NodeRef::user(1));
        assert_eq!(g.add_node(Modality::Item), NodeRef::item(1));
        assert_eq!(g.add_node(Modality::Item), NodeRef::item(2));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn modality_opposite() {
        assert_eq!(Modality::User.opposite(), Modality::Item);
        assert_eq!(Modality::Item.opposite(), Modality::User);
    }

    #[test]
    fn uniform_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = Bigraph::with_pairs(1).unwrap();
        for _ in 0..100 {
            assert_eq!(g.draw_uniform(Modality::Item, &mut rng).unwrap(), NodeRef::item(0));
        }
        assert_eq!(Bigraph::empty().draw_uniform(Modality::User, &mut rng), Err(Error::EmptyModality(Modality::User)));

        let g = Bigraph::with_pairs(4).unwrap();
        let n = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let node = g.draw_uniform(Modality::User, &mut rng).unwrap();
            assert_eq!(node.modality, Modality::User);
            counts[node.index] += 1;
        }
        let sigma = libm::sqrt(n as f64 * 0.25 * 0.75);
        for c in counts {
            assert!((c as f64 - n as f64 * 0.25).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn preferential_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // user degrees {1, 3}, plus a degree-0 user
        let mut g = Bigraph::empty();
        for _ in 0..3 {
            g.add_node(Modality::User);
            g.add_node(Modality::Item);
        }
        g.add_edge(0, 0).unwrap();
        for i in 0..3 {
            g.add_edge(1, i).unwrap();
        }
        let n = 1_000_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[g.draw_preferential(Modality::User, &mut rng).unwrap().index] += 1;
        }
        assert_eq!(counts[2], 0);
        for (c, p) in [(counts[0], 0.25), (counts[1], 0.75)] {
            let sigma = libm::sqrt(n as f64 * p * (1.0 - p));
            assert!((c as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }

        let mut empty = Bigraph::empty();
        empty.add_node(Modality::Item);
        assert_eq!(empty.draw_preferential(Modality::Item, &mut rng), Err(Error::ZeroDegree(Modality::Item)));
    }

    #[test]
    fn regular_graph_preferential_is_uniform() {
        let g = four_cycle();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut counts = [0usize; 2];
        for _ in 0..n {
            counts[g.draw_preferential(Modality::Item, &mut rng).unwrap().index] += 1;
        }
        let sigma = libm::sqrt(n as f64 * 0.25);
        assert!((counts[0] as f64 - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn edges_sorted() {
        let mut g = four_cycle();
        g.add_node(Modality::Item);
        g.add_edge(0, 2).unwrap();
        assert_eq!(g.edges(), alloc::vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)]);
    }
}
