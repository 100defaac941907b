//! Loan-record tables: parsing, joining into a network, corpus statistics
//! and a seeded synthetic generator with a ground-truth ledger.

mod join;
mod stats;
mod synth;
mod tables;

pub use join::join_to_network;
pub use stats::{overall_stats, round_significant, OverallStats};
pub use synth::{
    generate_synthetic, CascadeEvent, GroundTruth, LedgerCounts, PlantedJoint, PlantedMotif, PlantedMotifSpec,
    PlantedStar, SyntheticConfig,
};
pub use tables::{
    load_tables, write_tables, CustomerCreditRow, CustomerProfileRow, DefaultStatusRow, GuaranteeContractRow,
    GuaranteeProfileRow, GuaranteeRelationshipRow, LoanAccountRow, LoanContractRow, RepaymentStatusRow, TableSet,
    MANIFEST_FILE, TABLE_NAMES,
};

use thiserror::Error;

use crate::graph::GraphError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("manifest has no entry for table {0}")]
    MissingTable(String),
    #[error("{table} line {row}, column {column}: {reason}")]
    ParseError { table: String, row: u64, column: String, reason: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("{table} row {row}: {column} {value} has no match in {target}")]
    Join { table: String, row: usize, column: String, value: String, target: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("infeasible synthetic config: {0}")]
    InfeasibleConfig(String),
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::MissingTable(_) => "MissingTable",
            IngestError::ParseError { .. } => "ParseError",
            IngestError::Io { .. } => "Io",
            IngestError::Manifest(_) => "Manifest",
            IngestError::Join { .. } => "JoinError",
            IngestError::Graph(g) => g.code(),
            IngestError::InfeasibleConfig(_) => "InfeasibleConfig",
        }
    }
}
