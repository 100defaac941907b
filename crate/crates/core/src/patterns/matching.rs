use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::scan::scan_roots;
use super::Motif;
use crate::control::RunControl;
use crate::exec::Exec;
use crate::graph::{EnterpriseId, SimpleGraph};

#[derive(Clone, Copy, Debug)]
pub struct MatchOptions {
    /// Maximum number of distinct node sets to report.
    pub max_sets: usize,
    pub exec: Exec,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions { max_sets: 1_000_000, exec: Exec::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub motif: Motif,
    /// Distinct matched node sets, each sorted, in ascending order.
    pub embeddings: Vec<Vec<EnterpriseId>>,
    pub truncated: bool,
    pub cancelled: bool,
}

impl MatchResult {
    /// True when the result may be incomplete.
    pub fn partial(&self) -> bool {
        self.truncated || self.cancelled
    }
}

pub fn match_motif(graph: &SimpleGraph, motif: &Motif) -> MatchResult {
    match_motif_with(graph, motif, &MatchOptions::default(), None)
}

/// All node sets whose induced sub-digraph is isomorphic to `motif`, each
/// reported once regardless of automorphisms.
///
/// Backtracking maps motif slots in a connected order, so every candidate
/// for a slot is drawn from the neighbourhood of an already-mapped slot, and
/// checks both edges and non-edges against every earlier slot.
pub fn match_motif_with(
    graph: &SimpleGraph,
    motif: &Motif,
    opts: &MatchOptions,
    ctrl: Option<&RunControl>,
) -> MatchResult {
    let k = motif.k();
    if graph.node_count() < k {
        return MatchResult { motif: *motif, embeddings: Vec::new(), truncated: false, cancelled: false };
    }
    let plan = MatchPlan::new(motif);
    let adj: Vec<Vec<usize>> = (0..graph.node_count()).map(|u| graph.neighbors(u)).collect();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut truncated = false;
    let outcome = scan_roots(
        graph.node_count(),
        opts.exec,
        ctrl,
        |sets: &BTreeSet<Vec<usize>>| {
            for s in sets {
                if found.len() >= opts.max_sets {
                    truncated = true;
                    return true;
                }
                found.insert(s.clone());
            }
            false
        },
        |root| {
            let mut sets = BTreeSet::new();
            if plan.fits(graph, 0, root) {
                let mut mapped = vec![root];
                plan.extend(graph, &adj, &mut mapped, &mut sets);
            }
            sets
        },
    );
    let embeddings = found
        .into_iter()
        .map(|set| set.into_iter().map(|i| graph.id(i).clone()).collect())
        .collect();
    MatchResult { motif: *motif, embeddings, truncated: truncated || outcome.budget_hit, cancelled: outcome.cancelled }
}

struct MatchPlan {
    motif: Motif,
    /// Slots in mapping order; each slot after the first touches an earlier one.
    order: Vec<usize>,
    /// For position i > 0, an earlier position adjacent to it.
    anchor: Vec<usize>,
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
}

impl MatchPlan {
    fn new(motif: &Motif) -> Self {
        let k = motif.k();
        let touches = |a: usize, b: usize| motif.has_edge(a, b) || motif.has_edge(b, a);
        let degree = |s: usize| (0..k).filter(|&t| touches(s, t)).count();
        let first = (0..k).max_by_key(|&s| (degree(s), std::cmp::Reverse(s))).unwrap_or(0);
        let mut order = vec![first];
        let mut anchor = vec![0];
        while order.len() < k {
            let (pos, next) = (0..k)
                .filter(|s| !order.contains(s))
                .filter_map(|s| order.iter().position(|&o| touches(o, s)).map(|p| (p, s)))
                .max_by_key(|&(_, s)| (order.iter().filter(|&&o| touches(o, s)).count(), std::cmp::Reverse(s)))
                .expect("motif is weakly connected");
            order.push(next);
            anchor.push(pos);
        }
        let out_deg = (0..k).map(|s| (0..k).filter(|&t| motif.has_edge(s, t)).count()).collect();
        let in_deg = (0..k).map(|s| (0..k).filter(|&t| motif.has_edge(t, s)).count()).collect();
        MatchPlan { motif: *motif, order, anchor, out_deg, in_deg }
    }

    fn fits(&self, g: &SimpleGraph, pos: usize, node: usize) -> bool {
        let slot = self.order[pos];
        g.successors(node).len() >= self.out_deg[slot] && g.predecessors(node).len() >= self.in_deg[slot]
    }

    fn extend(&self, g: &SimpleGraph, adj: &[Vec<usize>], mapped: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        let pos = mapped.len();
        if pos == self.order.len() {
            let mut set = mapped.clone();
            set.sort_unstable();
            out.insert(set);
            return;
        }
        let slot = self.order[pos];
        let anchor_node = mapped[self.anchor[pos]];
        'cand: for &c in &adj[anchor_node] {
            if mapped.contains(&c) || !self.fits(g, pos, c) {
                continue;
            }
            for (p, &m) in mapped.iter().enumerate() {
                let s = self.order[p];
                if self.motif.has_edge(slot, s) != g.has_edge(c, m) || self.motif.has_edge(s, slot) != g.has_edge(m, c) {
                    continue 'cand;
                }
            }
            mapped.push(c);
            self.extend(g, adj, mapped, out);
            mapped.pop();
        }
    }
}
