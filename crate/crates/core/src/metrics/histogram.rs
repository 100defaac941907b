use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::centrality::{MetricKind, NodeMetrics};
use super::MetricsError;
use crate::graph::EnterpriseId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    pub defaults: usize,
    /// Absent for empty bins.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricHistogram {
    pub kind: MetricKind,
    pub edges: Vec<f64>,
    pub bins: Vec<HistogramBin>,
}

/// Default rate per equal-width bin of one metric over its observed range.
pub fn default_rate_histogram(
    metrics: &BTreeMap<EnterpriseId, NodeMetrics>,
    defaulted: &BTreeSet<EnterpriseId>,
    kind: MetricKind,
    bin_count: usize,
) -> Result<MetricHistogram, MetricsError> {
    if bin_count < 2 {
        return Err(MetricsError::BinCount(bin_count));
    }
    let values: Vec<(f64, bool)> =
        metrics.iter().map(|(id, m)| (kind.value(m), defaulted.contains(id))).collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(v, _)| (lo.min(v), hi.max(v)));
    let (lo, hi) = if values.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    let width = (hi - lo) / bin_count as f64;
    let edges: Vec<f64> = (0..=bin_count)
        .map(|i| if i == bin_count { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![(0usize, 0usize); bin_count];
    for (v, d) in values {
        let idx = if width > 0.0 { (((v - lo) / width) as usize).min(bin_count - 1) } else { 0 };
        counts[idx].0 += 1;
        counts[idx].1 += d as usize;
    }
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &(nodes, defaults))| HistogramBin {
            lo: edges[i],
            hi: edges[i + 1],
            nodes,
            defaults,
            rate: (nodes > 0).then(|| defaults as f64 / nodes as f64),
        })
        .collect();
    Ok(MetricHistogram { kind, edges, bins })
}
