//! Default propagation along guarantee edges.
//!
//! Edges point guarantor → borrower, so a default travels against edge
//! direction: when a borrower fails, its guarantors are exposed. All paths
//! here start at a defaulting seed and step from a borrower to one of its
//! guarantors.

mod paths;
mod sankey;

pub use paths::{
    contagion_set, enumerate_paths, propagation_importance, CutSet, ImportanceMap, PathCaps, PropagationResult,
    PropagationView,
};
pub use sankey::{sankey_flow, SankeyFlow, SankeyLink, SankeyNode};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContagionError {
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("no active edge {0} -> {1}")]
    UnknownEdge(String, String),
}

impl ContagionError {
    pub fn code(&self) -> &'static str {
        match self {
            ContagionError::UnknownNode(_) => "UnknownNode",
            ContagionError::UnknownEdge(..) => "UnknownEdge",
        }
    }
}
