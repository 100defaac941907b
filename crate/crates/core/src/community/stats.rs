use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::partition::{CommunityId, Partition};
use crate::financials::{percent_half_up, FinancialLedger};
use crate::graph::{EnterpriseId, SimpleGraph};

/// A node with at least one neighbour in another community.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spanner {
    pub node: EnterpriseId,
    pub community: CommunityId,
    pub adjacent: BTreeSet<CommunityId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityStats {
    pub community: CommunityId,
    pub firms: usize,
    pub default_firms: usize,
    pub ratio_default_firms: f64,
    /// Absent when the community has no loans.
    pub ratio_default_amount: Option<f64>,
    pub spanners: usize,
    pub neighbour_communities: usize,
    pub total_loan_amount: f64,
    pub total_default_amount: f64,
}

impl CommunityStats {
    pub fn percent_default_firms(&self) -> u32 {
        percent_half_up(self.ratio_default_firms)
    }

    pub fn percent_default_amount(&self) -> Option<u32> {
        self.ratio_default_amount.map(percent_half_up)
    }
}

/// Boundary nodes in id order. Labels missing from the partition are ignored.
pub fn find_spanners(partition: &Partition, graph: &SimpleGraph) -> Vec<Spanner> {
    (0..graph.node_count())
        .filter(|&u| partition.label_of(graph.id(u)).is_some())
        .filter_map(|u| {
            let adjacent = partition.foreign_neighbours(graph, u);
            (!adjacent.is_empty()).then(|| Spanner {
                node: graph.id(u).clone(),
                community: partition.label_of(graph.id(u)).unwrap(),
                adjacent,
            })
        })
        .collect()
}

/// One row per community, in label order.
pub fn community_stats(partition: &Partition, graph: &SimpleGraph, ledger: &FinancialLedger) -> Vec<CommunityStats> {
    let spanners = find_spanners(partition, graph);
    let mut spanner_count: BTreeMap<CommunityId, usize> = BTreeMap::new();
    let mut touching: BTreeMap<CommunityId, BTreeSet<CommunityId>> = BTreeMap::new();
    for s in &spanners {
        *spanner_count.entry(s.community).or_default() += 1;
        touching.entry(s.community).or_default().extend(s.adjacent.iter().copied());
    }
    partition
        .communities()
        .into_iter()
        .map(|(c, members)| {
            let (mut defaults, mut loans, mut lost) = (0usize, 0.0, 0.0);
            for id in &members {
                let f = ledger.get(id);
                defaults += f.defaulted as usize;
                loans += f.loan_total;
                lost += f.default_total;
            }
            CommunityStats {
                community: c,
                firms: members.len(),
                default_firms: defaults,
                ratio_default_firms: defaults as f64 / members.len() as f64,
                ratio_default_amount: (loans > 0.0).then(|| lost / loans),
                spanners: spanner_count.get(&c).copied().unwrap_or(0),
                neighbour_communities: touching.get(&c).map_or(0, |t| t.len()),
                total_loan_amount: loans,
                total_default_amount: lost,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::financials::FirmFinancials;
    use crate::graph::{index_id, ViewMode};

    #[test]
    fn bridge_endpoints_are_the_only_spanners() {
        let g = SimpleGraph::from_index_edges(4, &[(0, 1), (1, 2), (2, 3)], ViewMode::Undirected);
        let p = Partition::from_labels((0..4).map(|i| (index_id(i), CommunityId(1 + (i >= 2) as u32))).collect());
        let s: Vec<String> = find_spanners(&p, &g).iter().map(|s| s.node.to_string()).collect();
        assert_eq!(s, ["n00001", "n00002"]);
        let one = Partition::from_labels((0..4).map(|i| (index_id(i), CommunityId(1))).collect());
        assert!(find_spanners(&one, &g).is_empty());
    }

    #[test]
    fn ratios_and_neighbours() {
        let g = SimpleGraph::from_index_edges(3, &[(0, 1), (1, 2)], ViewMode::Undirected);
        let p = Partition::from_labels((0..3).map(|i| (index_id(i), CommunityId(1 + (i == 2) as u32))).collect());
        let mut firms = BTreeMap::new();
        firms.insert(index_id(0), FirmFinancials { loan_total: 100.0, default_total: 40.0, defaulted: true });
        firms.insert(index_id(1), FirmFinancials { loan_total: 100.0, default_total: 0.0, defaulted: false });
        let stats = community_stats(&p, &g, &FinancialLedger::from_map(firms));
        assert_eq!(stats[0].percent_default_firms(), 50);
        assert_eq!(stats[0].ratio_default_amount, Some(0.2));
        assert_eq!(stats[0].neighbour_communities, 1);
        assert_eq!(stats[1].ratio_default_amount, None);
    }
}
