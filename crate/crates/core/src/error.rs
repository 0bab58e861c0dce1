use crate::bigraph::Modality;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("initial number of pairs must be at least 1")]
    ZeroPairs,
    #[error("node {index} does not exist in the {modality} modality")]
    NoSuchNode { modality: Modality, index: usize },
    #[error("edge ({user}, {item}) already exists")]
    DuplicateEdge { user: usize, item: usize },
    #[error("expected a {expected} node, got a {found} node")]
    WrongModality { expected: Modality, found: Modality },
    #[error("the {0} modality has no nodes")]
    EmptyModality(Modality),
    #[error("the {0} modality has zero total degree")]
    ZeroDegree(Modality),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("invalid parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: &'static str },
    #[error("the initial number of pairs cannot be changed after start")]
    ImmutablePairs,
    #[error("formula is singular: {0}")]
    Singular(&'static str),
    #[error("need at least {needed} distinct degrees for a fit, got {found}")]
    InsufficientSupport { needed: usize, found: usize },
}
