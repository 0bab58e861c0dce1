//! Growing random bipartite graphs.
//!
//! A user-item graph starts from `m` disjoint pairs and grows one node per
//! iteration. New edges attach uniformly, preferentially (by degree), or by
//! a short bounce walk from endpoints the new node already picked, which
//! raises bipartite clustering. The [`analytics`] module measures the result
//! (degree histograms, bipartite local clustering, second neighbors,
//! recommender neighborhoods) and evaluates the model's closed-form
//! predictions.
//!
//! The crate is `no_std` and needs only `alloc`.
//!
//! ```
//! use bigen_core::{analytics, generator, GeneratorParams, Modality};
//!
//! let params = GeneratorParams { m: 10, iterations: 30, u: 3, v: 3, ..Default::default() };
//! let state = generator::run(params, 7).unwrap();
//! let g = state.graph();
//! assert_eq!(g.user_count() + g.item_count(), 2 * 10 + 30);
//! let users = analytics::degree_histogram(g, Modality::User);
//! assert_eq!(users.node_count, g.user_count());
//! ```

#![no_std]

extern crate alloc;

pub mod analytics;
pub mod bigraph;
pub mod error;
pub mod generator;
pub mod params;

pub use bigraph::{Bigraph, Modality, NodeRef};
pub use error::{Error, Result};
pub use generator::{run, Attachment, AttachmentKind, IterationOutcome, RunState};
pub use params::{DerivedParams, GeneratorParams, ParamPatch};
