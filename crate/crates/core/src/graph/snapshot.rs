use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::model::{Date, EnterpriseId, GuaranteeEdge, GuaranteeNetwork};
use super::simple::{SimpleGraph, ViewMode};
use super::GraphError;

/// The network as it stood on one day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub as_of: Date,
    pub nodes: BTreeSet<EnterpriseId>,
    /// Active guarantee edges, ordered by guarantee contract id.
    pub edges: Vec<GuaranteeEdge>,
}

impl Snapshot {
    /// Edges with `valid_from <= as_of <= valid_to`; nodes are their endpoints
    /// plus every enterprise holding a loan contract active on `as_of`.
    pub fn at(network: &GuaranteeNetwork, as_of: Date) -> Snapshot {
        let mut edges: Vec<GuaranteeEdge> = network.edges.iter().filter(|e| e.is_active(as_of)).cloned().collect();
        edges.sort_by(|a, b| a.contract_id.cmp(&b.contract_id));
        let mut nodes: BTreeSet<EnterpriseId> =
            edges.iter().flat_map(|e| [e.guarantor.clone(), e.borrower.clone()]).collect();
        nodes.extend(network.contracts.values().filter(|c| c.is_active(as_of)).map(|c| c.borrower.clone()));
        Snapshot { as_of, nodes, edges }
    }

    /// Builds a snapshot from explicit parts, adding edge endpoints to the node set.
    pub fn from_parts(as_of: Date, nodes: impl IntoIterator<Item = EnterpriseId>, mut edges: Vec<GuaranteeEdge>) -> Snapshot {
        edges.sort_by(|a, b| a.contract_id.cmp(&b.contract_id));
        let mut nodes: BTreeSet<EnterpriseId> = nodes.into_iter().collect();
        nodes.extend(edges.iter().flat_map(|e| [e.guarantor.clone(), e.borrower.clone()]));
        Snapshot { as_of, nodes, edges }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Collapses parallel edges (amounts summed); undirected mode also merges
    /// opposite directions.
    pub fn simple_view(&self, mode: ViewMode) -> SimpleGraph {
        SimpleGraph::from_edges(
            self.nodes.iter().cloned(),
            self.edges.iter().map(|e| (&e.guarantor, &e.borrower, e.amount)),
            mode,
        )
    }

    /// Applies a diff taken from this snapshot's date.
    pub fn apply(&self, diff: &NetworkDiff) -> Snapshot {
        let mut nodes = self.nodes.clone();
        for n in &diff.removed_nodes {
            nodes.remove(n);
        }
        nodes.extend(diff.added_nodes.iter().cloned());
        let removed: BTreeSet<_> = diff.removed_edges.iter().map(|e| &e.contract_id).collect();
        let mut edges: Vec<GuaranteeEdge> =
            self.edges.iter().filter(|e| !removed.contains(&e.contract_id)).cloned().collect();
        edges.extend(diff.added_edges.iter().cloned());
        edges.sort_by(|a, b| a.contract_id.cmp(&b.contract_id));
        Snapshot { as_of: diff.to, nodes, edges }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkDiff {
    pub from: Date,
    pub to: Date,
    pub added_nodes: BTreeSet<EnterpriseId>,
    pub removed_nodes: BTreeSet<EnterpriseId>,
    pub added_edges: Vec<GuaranteeEdge>,
    pub removed_edges: Vec<GuaranteeEdge>,
}

impl NetworkDiff {
    pub fn is_empty(&self) -> bool {
        self.added_nodes.is_empty()
            && self.removed_nodes.is_empty()
            && self.added_edges.is_empty()
            && self.removed_edges.is_empty()
    }
}

/// What changed between the snapshots at `t1` and `t2`.
pub fn diff_snapshots(network: &GuaranteeNetwork, t1: Date, t2: Date) -> Result<NetworkDiff, GraphError> {
    if t1 > t2 {
        return Err(GraphError::BadRange { from: t1, to: t2 });
    }
    let a = Snapshot::at(network, t1);
    let b = Snapshot::at(network, t2);
    let a_ids: BTreeSet<_> = a.edges.iter().map(|e| &e.contract_id).collect();
    let b_ids: BTreeSet<_> = b.edges.iter().map(|e| &e.contract_id).collect();
    Ok(NetworkDiff {
        from: t1,
        to: t2,
        added_nodes: b.nodes.difference(&a.nodes).cloned().collect(),
        removed_nodes: a.nodes.difference(&b.nodes).cloned().collect(),
        added_edges: b.edges.iter().filter(|e| !a_ids.contains(&e.contract_id)).cloned().collect(),
        removed_edges: a.edges.iter().filter(|e| !b_ids.contains(&e.contract_id)).cloned().collect(),
    })
}
