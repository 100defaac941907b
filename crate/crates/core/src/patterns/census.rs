use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::canon::{canonical_code, pair_bit, TABLE_MAX_K};
use super::scan::scan_roots;
use super::{Motif, PatternError};
use crate::control::RunControl;
use crate::exec::Exec;
use crate::graph::SimpleGraph;

#[derive(Clone, Copy, Debug)]
pub struct CensusOptions {
    /// Maximum number of connected k-subgraphs to visit before stopping.
    pub budget: u64,
    pub exec: Exec,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { budget: 100_000_000, exec: Exec::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub motif: Motif,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub k: usize,
    /// Classes with at least one occurrence, by ascending canonical code.
    pub classes: Vec<ClassCount>,
    pub subgraphs: u64,
    /// Set when the budget stopped the scan early.
    pub truncated: bool,
    pub cancelled: bool,
}

impl CensusReport {
    pub fn count_of(&self, motif: &Motif) -> u64 {
        self.classes.iter().find(|c| c.motif == *motif).map_or(0, |c| c.count)
    }
}

pub fn motif_census(graph: &SimpleGraph, k: usize) -> Result<CensusReport, PatternError> {
    motif_census_with(graph, k, &CensusOptions::default(), None)
}

/// Counts induced, weakly connected k-node subgraphs per canonical class.
///
/// Node sets are enumerated once each with the ESU scheme: every set is
/// grown from its smallest node through neighbours larger than it, using the
/// exclusive-neighbourhood rule to avoid revisits.
pub fn motif_census_with(
    graph: &SimpleGraph,
    k: usize,
    opts: &CensusOptions,
    ctrl: Option<&RunControl>,
) -> Result<CensusReport, PatternError> {
    if !(3..=TABLE_MAX_K).contains(&k) {
        return Err(PatternError::MotifSize(k));
    }
    let adj: Vec<Vec<usize>> = (0..graph.node_count()).map(|u| graph.neighbors(u)).collect();
    let mut seen = 0u64;
    let outcome = scan_roots(
        graph.node_count(),
        opts.exec,
        ctrl,
        |counts: &BTreeMap<u32, u64>| {
            seen += counts.values().sum::<u64>();
            seen > opts.budget
        },
        |root| {
            let mut counts = BTreeMap::new();
            let mut esu = Esu { graph, adj: &adj, k, root, counts: &mut counts };
            let ext: Vec<usize> = adj[root].iter().copied().filter(|&u| u > root).collect();
            esu.extend(&mut vec![root], ext);
            counts
        },
    );
    let mut total: BTreeMap<u32, u64> = BTreeMap::new();
    for counts in outcome.results {
        for (c, n) in counts {
            *total.entry(c).or_insert(0) += n;
        }
    }
    Ok(CensusReport {
        k,
        subgraphs: total.values().sum(),
        classes: total
            .into_iter()
            .map(|(bits, count)| ClassCount { motif: Motif::from_canonical(k, bits), count })
            .collect(),
        truncated: outcome.budget_hit,
        cancelled: outcome.cancelled,
    })
}

struct Esu<'a> {
    graph: &'a SimpleGraph,
    adj: &'a [Vec<usize>],
    k: usize,
    root: usize,
    counts: &'a mut BTreeMap<u32, u64>,
}

impl Esu<'_> {
    fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    fn extend(&mut self, sub: &mut Vec<usize>, mut ext: Vec<usize>) {
        if sub.len() == self.k {
            let code = induced_code(self.graph, sub);
            *self.counts.entry(canonical_code(self.k, code)).or_insert(0) += 1;
            return;
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &self.adj[w] {
                if u > self.root
                    && !sub.contains(&u)
                    && !next.contains(&u)
                    && u != w
                    && !sub.iter().any(|&s| self.adjacent(s, u))
                {
                    next.push(u);
                }
            }
            sub.push(w);
            self.extend(sub, next);
            sub.pop();
        }
    }
}

/// Raw adjacency code of the sub-digraph induced on `nodes`, slots in list order.
pub(crate) fn induced_code(graph: &SimpleGraph, nodes: &[usize]) -> u32 {
    let k = nodes.len();
    let mut code = 0u32;
    for (i, &u) in nodes.iter().enumerate() {
        for (j, &v) in nodes.iter().enumerate() {
            if i != j && graph.has_edge(u, v) {
                code |= 1 << pair_bit(k, i, j);
            }
        }
    }
    code
}
