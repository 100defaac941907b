use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CommunityError;
use crate::graph::{EnterpriseId, SimpleGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommunityId(pub u32);

impl fmt::Display for CommunityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

/// One analyst edit, as stored in the operation log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    /// Members of `absorbed` take the label of `into`.
    Merge { into: CommunityId, absorbed: CommunityId },
    Reassign { node: EnterpriseId, target: CommunityId },
    Split { community: CommunityId, cut: Vec<(EnterpriseId, EnterpriseId)> },
}

/// Node → community labels plus the edits that produced them. Edits return a
/// new value and leave the receiver untouched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    labels: BTreeMap<EnterpriseId, CommunityId>,
    revision: u64,
    next_label: u32,
    history: Vec<EditOp>,
}

impl Partition {
    pub fn from_labels(labels: BTreeMap<EnterpriseId, CommunityId>) -> Partition {
        let next_label = labels.values().map(|c| c.0 + 1).max().unwrap_or(1);
        Partition { labels, revision: 0, next_label, history: Vec::new() }
    }

    pub fn labels(&self) -> &BTreeMap<EnterpriseId, CommunityId> {
        &self.labels
    }

    pub fn label_of(&self, id: &EnterpriseId) -> Option<CommunityId> {
        self.labels.get(id).copied()
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn history(&self) -> &[EditOp] {
        &self.history
    }

    /// Members of each community, sorted.
    pub fn communities(&self) -> BTreeMap<CommunityId, Vec<EnterpriseId>> {
        let mut out: BTreeMap<CommunityId, Vec<EnterpriseId>> = BTreeMap::new();
        for (id, &c) in &self.labels {
            out.entry(c).or_default().push(id.clone());
        }
        out
    }

    pub fn members(&self, c: CommunityId) -> Vec<EnterpriseId> {
        self.labels.iter().filter(|(_, &l)| l == c).map(|(id, _)| id.clone()).collect()
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint::of(self)
    }

    /// Checks that every node of `graph` carries exactly one label and no
    /// label is attached to a node outside it.
    pub fn validate(&self, graph: &SimpleGraph) -> Result<(), CommunityError> {
        for id in graph.ids() {
            if !self.labels.contains_key(id) {
                return Err(CommunityError::Uncovered(id.to_string()));
            }
        }
        match self.labels.keys().find(|id| graph.index_of(id).is_none()) {
            Some(id) => Err(CommunityError::UnknownNode(id.to_string())),
            None => Ok(()),
        }
    }

    fn require(&self, c: CommunityId) -> Result<(), CommunityError> {
        if self.labels.values().any(|&l| l == c) {
            Ok(())
        } else {
            Err(CommunityError::UnknownCommunity(c.0))
        }
    }

    fn node(&self, graph: &SimpleGraph, id: &EnterpriseId) -> Result<usize, CommunityError> {
        match (graph.index_of(id), self.labels.contains_key(id)) {
            (Some(u), true) => Ok(u),
            _ => Err(CommunityError::UnknownNode(id.to_string())),
        }
    }

    /// Labels of communities other than the node's own that it touches.
    pub(crate) fn foreign_neighbours(&self, graph: &SimpleGraph, u: usize) -> BTreeSet<CommunityId> {
        let own = self.labels[graph.id(u)];
        graph.neighbors(u).into_iter().map(|v| self.labels[graph.id(v)]).filter(|&c| c != own).collect()
    }

    fn next(&self, op: EditOp) -> Partition {
        let mut p = self.clone();
        p.revision += 1;
        p.history.push(op);
        p
    }

    pub fn merge(&self, graph: &SimpleGraph, into: CommunityId, absorbed: CommunityId) -> Result<Partition, CommunityError> {
        self.require(into)?;
        self.require(absorbed)?;
        if into == absorbed {
            return Err(CommunityError::SameCommunity(into.0));
        }
        let touching = self
            .labels
            .iter()
            .filter(|(_, &c)| c == absorbed)
            .filter_map(|(id, _)| graph.index_of(id))
            .any(|u| self.foreign_neighbours(graph, u).contains(&into));
        if !touching {
            return Err(CommunityError::NotNeighbours(into.0, absorbed.0));
        }
        let mut p = self.next(EditOp::Merge { into, absorbed });
        for c in p.labels.values_mut() {
            if *c == absorbed {
                *c = into;
            }
        }
        Ok(p)
    }

    pub fn reassign(&self, graph: &SimpleGraph, node: &EnterpriseId, target: CommunityId) -> Result<Partition, CommunityError> {
        let u = self.node(graph, node)?;
        self.require(target)?;
        let foreign = self.foreign_neighbours(graph, u);
        if foreign.is_empty() {
            return Err(CommunityError::NotASpanner(node.to_string()));
        }
        if !foreign.contains(&target) {
            return Err(CommunityError::NotAdjacent(node.to_string(), target.0));
        }
        let mut p = self.next(EditOp::Reassign { node: node.clone(), target });
        p.labels.insert(node.clone(), target);
        Ok(p)
    }

    /// Removes `cut` (undirected node pairs inside `community`) and gives each
    /// remaining connected part a fresh label, in order of smallest member.
    pub fn split(
        &self,
        graph: &SimpleGraph,
        community: CommunityId,
        cut: &[(EnterpriseId, EnterpriseId)],
    ) -> Result<Partition, CommunityError> {
        self.require(community)?;
        let members: Vec<usize> = self.members(community).iter().filter_map(|id| graph.index_of(id)).collect();
        let mut removed = BTreeSet::new();
        for (a, b) in cut {
            let (u, v) = (self.node(graph, a)?, self.node(graph, b)?);
            let inside = self.labels[a] == community && self.labels[b] == community;
            if !inside || !graph.neighbors(u).contains(&v) {
                return Err(CommunityError::NotAnInternalEdge(a.to_string(), b.to_string(), community.0));
            }
            removed.insert((u.min(v), u.max(v)));
        }
        let parts = connected_parts(graph, &members, &removed);
        if parts.len() < 2 {
            return Err(CommunityError::NotACut(community.0));
        }
        let mut p = self.next(EditOp::Split { community, cut: cut.to_vec() });
        for part in parts {
            let label = CommunityId(p.next_label);
            p.next_label += 1;
            for u in part {
                p.labels.insert(graph.id(u).clone(), label);
            }
        }
        Ok(p)
    }

    pub fn apply(&self, graph: &SimpleGraph, op: &EditOp) -> Result<Partition, CommunityError> {
        match op {
            EditOp::Merge { into, absorbed } => self.merge(graph, *into, *absorbed),
            EditOp::Reassign { node, target } => self.reassign(graph, node, *target),
            EditOp::Split { community, cut } => self.split(graph, *community, cut),
        }
    }

    /// Applies `ops` in order starting from `self`.
    pub fn replay(&self, graph: &SimpleGraph, ops: &[EditOp]) -> Result<Partition, CommunityError> {
        ops.iter().try_fold(self.clone(), |p, op| p.apply(graph, op))
    }
}

/// Connected parts of the subgraph induced by `members` minus `removed`,
/// each sorted, ordered by smallest member.
fn connected_parts(graph: &SimpleGraph, members: &[usize], removed: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    let inside: BTreeSet<usize> = members.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut parts = Vec::new();
    for &s in &inside {
        if !seen.insert(s) {
            continue;
        }
        let mut part = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for v in graph.neighbors(u) {
                if inside.contains(&v) && !removed.contains(&(u.min(v), u.max(v))) && seen.insert(v) {
                    part.push(v);
                    stack.push(v);
                }
            }
        }
        part.sort_unstable();
        parts.push(part);
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ViewMode;

    fn path3() -> (SimpleGraph, Partition) {
        let g = SimpleGraph::from_index_edges(3, &[(0, 1), (1, 2)], ViewMode::Undirected);
        let labels = g.ids().iter().map(|id| (id.clone(), CommunityId(1))).collect();
        (g, Partition::from_labels(labels))
    }

    fn id(i: usize) -> EnterpriseId {
        crate::graph::index_id(i)
    }

    #[test]
    fn split_path_then_merge_back() {
        let (g, p) = path3();
        let s = p.split(&g, CommunityId(1), &[(id(1), id(2))]).unwrap();
        assert_eq!(s.label_of(&id(0)), Some(CommunityId(2)));
        assert_eq!(s.label_of(&id(1)), Some(CommunityId(2)));
        assert_eq!(s.label_of(&id(2)), Some(CommunityId(3)));
        let m = s.merge(&g, CommunityId(3), CommunityId(2)).unwrap();
        assert_eq!(m.communities().len(), 1);
        assert_eq!(m.revision(), 2);
        assert_eq!(p.replay(&g, m.history()).unwrap(), m);
    }

    #[test]
    fn cycle_edge_is_not_a_cut() {
        let g = SimpleGraph::from_index_edges(3, &[(0, 1), (1, 2), (0, 2)], ViewMode::Undirected);
        let p = Partition::from_labels(g.ids().iter().map(|i| (i.clone(), CommunityId(1))).collect());
        assert_eq!(p.split(&g, CommunityId(1), &[(id(0), id(1))]).unwrap_err().code(), "NotACut");
    }

    #[test]
    fn reassign_errors_and_involution() {
        let g = SimpleGraph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3)], ViewMode::Undirected);
        let labels = (0..4).map(|i| (id(i), CommunityId(if i < 2 { 1 } else { 2 }))).collect();
        let p = Partition::from_labels(labels);
        assert_eq!(p.reassign(&g, &id(0), CommunityId(2)).unwrap_err().code(), "NotASpanner");
        let there = p.reassign(&g, &id(1), CommunityId(2)).unwrap();
        let back = there.reassign(&g, &id(1), CommunityId(1)).unwrap();
        assert_eq!(back.labels(), p.labels());
        let far = Partition::from_labels((0..4).map(|i| (id(i), CommunityId(i as u32 + 1))).collect());
        assert_eq!(far.merge(&g, CommunityId(1), CommunityId(3)).unwrap_err().code(), "NotNeighbours");
        assert_eq!(far.reassign(&g, &id(1), CommunityId(4)).unwrap_err().code(), "NotAdjacent");
    }
}
