//! Temporal guarantee-network model.
//!
//! Edges always point guarantor → borrower. The model layer keeps the full
//! multigraph (one edge per guarantee contract); algorithms run on the
//! collapsed [`SimpleGraph`] produced by [`Snapshot::simple_view`].

mod model;
mod simple;
mod snapshot;

pub use model::{
    build_network, ContractId, CreditRecord, Date, DepositRecord, Enterprise, EnterpriseId,
    GuaranteeEdge, GuaranteeNetwork, Installment, LoanContract, ProfileRecord, RepaymentEvent,
};
pub use simple::{index_id, SimpleGraph, ViewMode};
pub use snapshot::{diff_snapshots, NetworkDiff, Snapshot};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown enterprise {id} referenced by {context}")]
    UnknownEnterprise { id: String, context: String },
    #[error("unknown loan contract {id} referenced by {context}")]
    UnknownContract { id: String, context: String },
    #[error("guarantee {contract_id}: invalid validity interval")]
    InvalidInterval { contract_id: String },
    #[error("guarantee {contract_id}: guarantor and borrower are the same enterprise")]
    SelfGuarantee { contract_id: String },
    #[error("{kind} {id}: {reason}")]
    InvalidRecord { kind: &'static str, id: String, reason: String },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("bad date range: {from} is after {to}")]
    BadRange { from: Date, to: Date },
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::UnknownEnterprise { .. } => "UnknownEnterprise",
            GraphError::UnknownContract { .. } => "UnknownContract",
            GraphError::InvalidInterval { .. } => "InvalidInterval",
            GraphError::SelfGuarantee { .. } => "SelfGuarantee",
            GraphError::InvalidRecord { .. } => "InvalidRecord",
            GraphError::DuplicateId { .. } => "DuplicateId",
            GraphError::BadRange { .. } => "BadRange",
        }
    }
}
