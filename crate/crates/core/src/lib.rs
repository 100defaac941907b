//! Analytics engine for loan-guarantee networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds the temporal guarantee multigraph, snapshots, diffs and
//!   the collapsed simple views every algorithm consumes.
//! * [`ingest`] parses and joins the nine record tables, generates synthetic
//!   table sets with a ground-truth ledger, and reports corpus statistics.
//! * [`metrics`] computes the centrality battery, default-rate histograms and
//!   the rolling-risk heatmap grid.
//! * [`community`] runs random-walk community detection and the analyst edit
//!   operations (merge, reassign, split) plus treemap and radar payloads.
//! * [`patterns`] finds guarantee circles, canonicalises and counts directed
//!   motifs, matches them network-wide and ranks them by default priority.
//! * [`risk`] builds leakage-free rolling-window features and trains the
//!   regularised boosted-tree default classifier.
//! * [`contagion`] enumerates borrower-to-guarantor propagation paths,
//!   importance scores and sankey flows, with per-session edge cuts.
//!
//! Data-parallel loops go through [`Exec`], which uses rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise.

#![allow(clippy::needless_range_loop)]

pub mod community;
pub mod contagion;
pub mod control;
pub mod exec;
pub mod financials;
pub mod fingerprint;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod patterns;
pub mod risk;

pub use control::RunControl;
pub use exec::Exec;
pub use graph::{
    EnterpriseId, GuaranteeEdge, GuaranteeNetwork, NetworkDiff, SimpleGraph, Snapshot, ViewMode,
};
