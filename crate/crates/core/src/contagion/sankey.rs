use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::paths::{PathCaps, PropagationView};
use super::ContagionError;
use crate::graph::{EnterpriseId, Snapshot};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SankeyNode {
    pub id: EnterpriseId,
    /// Guarantee amount this node provides along the drawn links.
    pub given: f64,
    /// Guarantee amount this node receives along the drawn links.
    pub received: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SankeyLink {
    pub source: EnterpriseId,
    pub target: EnterpriseId,
    pub value: f64,
}

/// Propagation paths from one focus node drawn as a flow diagram: one link
/// per distinct guarantor → borrower edge on any path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SankeyFlow {
    pub focus: EnterpriseId,
    pub nodes: Vec<SankeyNode>,
    pub links: Vec<SankeyLink>,
    pub truncated: bool,
}

impl PropagationView {
    pub fn sankey(&self, focus: &EnterpriseId, caps: PathCaps) -> Result<SankeyFlow, ContagionError> {
        let result = self.enumerate_paths(focus, caps)?;
        let g = self.graph();
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        for p in &result.paths {
            for w in p.windows(2) {
                let borrower = g.index_of(&w[0]).expect("path node");
                let guarantor = g.index_of(&w[1]).expect("path node");
                pairs.insert((guarantor, borrower));
            }
        }
        let mut totals: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        totals.insert(g.index_of(focus).expect("focus"), (0.0, 0.0));
        let mut links = Vec::with_capacity(pairs.len());
        for &(s, t) in &pairs {
            let value = g.weight(s, t).expect("path edge");
            totals.entry(s).or_default().0 += value;
            totals.entry(t).or_default().1 += value;
            links.push(SankeyLink { source: g.id(s).clone(), target: g.id(t).clone(), value });
        }
        let nodes = totals
            .into_iter()
            .map(|(i, (given, received))| SankeyNode { id: g.id(i).clone(), given, received })
            .collect();
        Ok(SankeyFlow { focus: focus.clone(), nodes, links, truncated: result.truncated })
    }
}

pub fn sankey_flow(snapshot: &Snapshot, focus: &EnterpriseId, caps: PathCaps) -> Result<SankeyFlow, ContagionError> {
    PropagationView::new(snapshot).sankey(focus, caps)
}
