//! The iterative growth process.
//!
//! Each iteration adds one node. With probability `p` it is a user that asks
//! for `u` edges to items, otherwise an item that asks for `v` edges to users.
//! Every requested edge first picks its attachment branch: preferential with
//! probability `alpha` (users) or `beta` (items), uniform otherwise. Inside
//! the preferential branch the endpoint is produced by a bounce walk with
//! probability `b`.
//!
//! Random numbers are consumed in a fixed order so that a seed fully
//! determines the run:
//!
//! 1. one `f64` for the node type (`draw < p` means user);
//! 2. per edge, one `f64` for the branch (`draw < alpha|beta` means preferential);
//! 3. inside the preferential branch, one `f64` for bouncing (`draw < b`);
//! 4. the endpoint draws of the chosen branch, including any resampling.
//!
//! Edges land one at a time, so later draws in the same iteration see the
//! degrees updated by earlier ones.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bigraph::{Bigraph, Modality, NodeRef};
use crate::error::Result;
use crate::params::{GeneratorParams, ParamPatch};

/// Attempts per endpoint before falling back to a uniform pick among the
/// nodes the new node is not yet joined to.
pub const MAX_RESAMPLE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttachmentKind {
    Random,
    Preferential,
    Bounced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub target: NodeRef,
    pub kind: AttachmentKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationOutcome {
    pub new_node: NodeRef,
    pub attachments: Vec<Attachment>,
    pub requested: usize,
    pub realized: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HistoryEvent {
    Iteration { t: u64, new_node: NodeRef, requested: usize, realized: usize },
    /// A parameter patch took effect before iteration `t + 1`.
    Boundary { t: u64, patch: ParamPatch },
}

/// Generator state: graph, parameters, iteration counter and random stream.
#[derive(Debug, Clone)]
pub struct RunState {
    graph: Bigraph,
    params: GeneratorParams,
    t: u64,
    rng: ChaCha8Rng,
    history: Option<Vec<HistoryEvent>>,
}

impl RunState {
    /// The initial `m`-pair graph at `t = 0`. The stream is ChaCha8 seeded
    /// with `seed_from_u64(seed)`.
    pub fn new(params: GeneratorParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(RunState {
            graph: Bigraph::with_pairs(params.m)?,
            params,
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            history: None,
        })
    }

    /// Turns on the per-iteration event log.
    pub fn with_history(mut self) -> Self {
        self.history.get_or_insert_with(Vec::new);
        self
    }

    pub fn graph(&self) -> &Bigraph {
        &self.graph
    }

    pub fn into_graph(self) -> Bigraph {
        self.graph
    }

    pub fn params(&self) -> &GeneratorParams {
        &self.params
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn history(&self) -> Option<&[HistoryEvent]> {
        self.history.as_deref()
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.params.iterations
    }

    /// Runs one iteration regardless of the iteration budget.
    pub fn step(&mut self) -> IterationOutcome {
        let params = self.params;
        let rng = &mut self.rng;
        let graph = &mut self.graph;

        let (own, requested, preferential) = if rng.gen::<f64>() < params.p {
            (Modality::User, params.u, params.alpha)
        } else {
            (Modality::Item, params.v, params.beta)
        };
        let target = own.opposite();
        let new_node = graph.add_node(own);

        let mut anchors: Vec<usize> = Vec::with_capacity(requested);
        let mut selected: Vec<usize> = Vec::with_capacity(requested);
        let mut attachments = Vec::with_capacity(requested);

        for _ in 0..requested {
            let branch = if rng.gen::<f64>() < preferential {
                if rng.gen::<f64>() < params.b {
                    AttachmentKind::Bounced
                } else {
                    AttachmentKind::Preferential
                }
            } else {
                AttachmentKind::Random
            };

            let Some((index, kind)) =
                select_endpoint(graph, target, branch, &anchors, &selected, new_node, rng)
            else {
                break;
            };
            graph
                .connect(new_node, NodeRef { modality: target, index })
                .expect("endpoint is distinct and of opposite modality");
            selected.push(index);
            if kind != AttachmentKind::Bounced {
                anchors.push(index);
            }
            attachments.push(Attachment { target: NodeRef { modality: target, index }, kind });
        }

        self.t += 1;
        let realized = attachments.len();
        if let Some(h) = self.history.as_mut() {
            h.push(HistoryEvent::Iteration { t: self.t, new_node, requested, realized });
        }
        IterationOutcome { new_node, attachments, requested, realized }
    }

    /// Runs up to `n` iterations without exceeding the budget; returns how
    /// many ran.
    pub fn advance(&mut self, n: u64) -> u64 {
        let todo = n.min(self.params.iterations.saturating_sub(self.t));
        for _ in 0..todo {
            self.step();
        }
        todo
    }

    pub fn run_to_end(&mut self) {
        while !self.is_finished() {
            self.step();
        }
    }

    /// Applies `patch` at the current iteration boundary. Changing `m` or
    /// pushing a value out of range is rejected and leaves the state as is.
    pub fn update_params(&mut self, patch: &ParamPatch) -> Result<()> {
        self.params = self.params.patched(patch)?;
        if let Some(h) = self.history.as_mut() {
            h.push(HistoryEvent::Boundary { t: self.t, patch: *patch });
        }
        Ok(())
    }
}

/// Builds the initial graph and runs all `params.iterations` iterations.
pub fn run(params: GeneratorParams, seed: u64) -> Result<RunState> {
    let mut state = RunState::new(params, seed)?;
    state.run_to_end();
    Ok(state)
}

/// Three-step bounce walk: a uniform anchor (a `target` node), a uniform
/// neighbor of it, then a uniform neighbor of that neighbor.
///
/// `exclude` is skipped in the middle step; the generator passes the node
/// being attached, which is already joined to every anchor. Returns `None`
/// when `anchors` is empty or the walk reaches a node with no usable
/// neighbor.
pub fn bounce<R: Rng + ?Sized>(
    graph: &Bigraph,
    anchors: &[usize],
    target: Modality,
    exclude: Option<NodeRef>,
    rng: &mut R,
) -> Option<NodeRef> {
    if anchors.is_empty() {
        return None;
    }
    let anchor = NodeRef { modality: target, index: anchors[rng.gen_range(0..anchors.len())] };
    let skip = exclude.filter(|n| n.modality == target.opposite()).map(|n| n.index);
    let via = pick_neighbor(graph.neighbors(anchor), skip, rng)?;
    let back = graph.neighbors(NodeRef { modality: target.opposite(), index: via });
    let landing = pick_neighbor(back, None, rng)?;
    Some(NodeRef { modality: target, index: landing })
}

fn pick_neighbor<R: Rng + ?Sized>(neighbors: &[usize], skip: Option<usize>, rng: &mut R) -> Option<usize> {
    // the skipped node is normally the most recent neighbor
    let pos = skip.and_then(|s| {
        if neighbors.last() == Some(&s) {
            Some(neighbors.len() - 1)
        } else {
            neighbors.iter().position(|&n| n == s)
        }
    });
    let usable = neighbors.len() - usize::from(pos.is_some());
    if usable == 0 {
        return None;
    }
    let mut r = rng.gen_range(0..usable);
    if pos.is_some_and(|p| r >= p) {
        r += 1;
    }
    Some(neighbors[r])
}

/// One endpoint under the mixed rule: preferential with probability
/// `preferential`, uniform otherwise. Consumes one branch draw then the
/// endpoint draw.
pub fn draw_attachment<R: Rng + ?Sized>(
    graph: &Bigraph,
    target: Modality,
    preferential: f64,
    rng: &mut R,
) -> Result<Attachment> {
    if rng.gen::<f64>() < preferential {
        let target = graph.draw_preferential(target, rng)?;
        Ok(Attachment { target, kind: AttachmentKind::Preferential })
    } else {
        let target = graph.draw_uniform(target, rng)?;
        Ok(Attachment { target, kind: AttachmentKind::Random })
    }
}

fn attempt<R: Rng + ?Sized>(
    graph: &Bigraph,
    target: Modality,
    branch: AttachmentKind,
    anchors: &[usize],
    new_node: NodeRef,
    rng: &mut R,
) -> Option<(usize, AttachmentKind)> {
    let preferential = |rng: &mut R| match graph.draw_preferential(target, rng) {
        Ok(n) => Some((n.index, AttachmentKind::Preferential)),
        Err(_) => graph.draw_uniform(target, rng).ok().map(|n| (n.index, AttachmentKind::Random)),
    };
    match branch {
        AttachmentKind::Random => {
            graph.draw_uniform(target, rng).ok().map(|n| (n.index, AttachmentKind::Random))
        }
        AttachmentKind::Preferential => preferential(rng),
        AttachmentKind::Bounced => {
            if anchors.is_empty() {
                return preferential(rng);
            }
            match bounce(graph, anchors, target, Some(new_node), rng) {
                Some(n) => Some((n.index, AttachmentKind::Bounced)),
                None => preferential(rng),
            }
        }
    }
}

fn select_endpoint<R: Rng + ?Sized>(
    graph: &Bigraph,
    target: Modality,
    branch: AttachmentKind,
    anchors: &[usize],
    selected: &[usize],
    new_node: NodeRef,
    rng: &mut R,
) -> Option<(usize, AttachmentKind)> {
    for _ in 0..MAX_RESAMPLE {
        let (index, kind) = attempt(graph, target, branch, anchors, new_node, rng)?;
        if !selected.contains(&index) {
            return Some((index, kind));
        }
    }
    // uniform among the nodes not joined yet
    let free = graph.node_count(target) - selected.len();
    if free == 0 {
        return None;
    }
    let mut taken = selected.to_vec();
    taken.sort_unstable();
    let mut index = rng.gen_range(0..free);
    for &s in &taken {
        if s <= index {
            index += 1;
        } else {
            break;
        }
    }
    Some((index, AttachmentKind::Random))
}
