//! Centrality battery, default-rate histograms and the rolling-risk heatmap.

mod centrality;
mod heatmap;
mod histogram;

pub use centrality::{
    betweenness_closeness, centralities_of, compute_centralities, compute_centralities_with, eigenvector, hits,
    kshell, pagerank, write_metrics_csv, CentralityOptions, MetricKind, NodeMetrics,
};
pub use heatmap::{assemble_heatmap, HeatmapGrid, RiskScore};
pub use histogram::{default_rate_histogram, HistogramBin, MetricHistogram};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("snapshot has no nodes")]
    EmptySnapshot,
    #[error("{metric} did not converge within {iterations} iterations")]
    ConvergenceFailure { metric: &'static str, iterations: usize },
    #[error("bin count must be at least 2 (got {0})")]
    BinCount(usize),
    #[error("unknown metric kind {0:?}")]
    UnknownKind(String),
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::EmptySnapshot => "EmptySnapshot",
            MetricsError::ConvergenceFailure { .. } => "ConvergenceFailure",
            MetricsError::BinCount(_) => "BadBinCount",
            MetricsError::UnknownKind(_) => "UnknownMetric",
        }
    }
}
