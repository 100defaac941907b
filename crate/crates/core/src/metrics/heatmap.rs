use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::{Date, EnterpriseId};

/// One predicted default probability for an enterprise in one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskScore {
    pub enterprise: EnterpriseId,
    /// End of the window the prediction was made at.
    pub window_end: Date,
    pub probability: f64,
}

/// Enterprises × windows; a cell is absent when the enterprise had no active
/// loan (and hence no prediction) in that window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub rows: Vec<EnterpriseId>,
    pub columns: Vec<Date>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl HeatmapGrid {
    pub fn present_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }
}

pub fn assemble_heatmap(scores: &[RiskScore]) -> HeatmapGrid {
    let columns: Vec<Date> = scores.iter().map(|s| s.window_end).collect::<BTreeSet<_>>().into_iter().collect();
    let col_of: BTreeMap<Date, usize> = columns.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let mut rows: BTreeMap<EnterpriseId, Vec<Option<f64>>> = BTreeMap::new();
    for s in scores {
        let row = rows.entry(s.enterprise.clone()).or_insert_with(|| vec![None; columns.len()]);
        row[col_of[&s.window_end]] = Some(s.probability.clamp(0.0, 1.0));
    }
    let (rows, cells) = rows.into_iter().unzip();
    HeatmapGrid { rows, columns, cells }
}
