use serde::{Deserialize, Serialize};

use super::scan::scan_roots;
use crate::control::RunControl;
use crate::exec::Exec;
use crate::graph::{EnterpriseId, SimpleGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircleKind {
    /// Directed 2-cycle.
    Mutual,
    /// Simple directed cycle of length >= 3.
    Revolving,
    /// One guarantor with at least three distinct borrowers.
    Star,
    /// One borrower with at least two distinct guarantors.
    JointLiability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeCircle {
    pub kind: CircleKind,
    /// Cycles start at their smallest id and follow edge direction; stars
    /// and joint-liability sets list the hub first.
    pub members: Vec<EnterpriseId>,
    /// Guarantor → borrower pairs.
    pub edges: Vec<(EnterpriseId, EnterpriseId)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CircleReport {
    pub mutual: Vec<GuaranteeCircle>,
    pub revolving: Vec<GuaranteeCircle>,
    pub stars: Vec<GuaranteeCircle>,
    pub joint_liability: Vec<GuaranteeCircle>,
    /// Set when the cycle budget stopped enumeration early.
    pub truncated: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CircleOptions {
    pub max_cycle_len: usize,
    pub max_cycles: usize,
    pub star_min_borrowers: usize,
    pub joint_min_guarantors: usize,
    pub exec: Exec,
}

impl Default for CircleOptions {
    fn default() -> Self {
        CircleOptions { max_cycle_len: 8, max_cycles: 1_000_000, star_min_borrowers: 3, joint_min_guarantors: 2, exec: Exec::default() }
    }
}

pub fn detect_circles(graph: &SimpleGraph, max_cycle_len: usize) -> CircleReport {
    detect_circles_with(graph, &CircleOptions { max_cycle_len, ..Default::default() }, None)
}

/// Every simple directed cycle up to the length cap, once each (rooted at its
/// smallest node), plus maximal stars and joint-liability sets.
pub fn detect_circles_with(graph: &SimpleGraph, opts: &CircleOptions, ctrl: Option<&RunControl>) -> CircleReport {
    let max_len = opts.max_cycle_len.max(2);
    let mut count = 0usize;
    let outcome = scan_roots(
        graph.node_count(),
        opts.exec,
        ctrl,
        |cycles: &Vec<Vec<usize>>| {
            count += cycles.len();
            count > opts.max_cycles
        },
        |root| {
            let mut cycles = Vec::new();
            let mut on_path = vec![false; graph.node_count()];
            cycles_from(graph, root, max_len, &mut vec![root], &mut on_path, &mut cycles);
            cycles
        },
    );
    let mut all: Vec<Vec<usize>> = outcome.results.into_iter().flatten().collect();
    let truncated = all.len() > opts.max_cycles || outcome.budget_hit;
    all.truncate(opts.max_cycles);

    let id = |i: usize| graph.id(i).clone();
    let mut report = CircleReport { truncated, ..Default::default() };
    for cyc in all {
        let edges = (0..cyc.len()).map(|i| (id(cyc[i]), id(cyc[(i + 1) % cyc.len()]))).collect();
        let kind = if cyc.len() == 2 { CircleKind::Mutual } else { CircleKind::Revolving };
        let circle = GuaranteeCircle { kind, members: cyc.iter().map(|&i| id(i)).collect(), edges };
        match kind {
            CircleKind::Mutual => report.mutual.push(circle),
            _ => report.revolving.push(circle),
        }
    }
    for u in 0..graph.node_count() {
        let borrowers = graph.successors(u);
        if borrowers.len() >= opts.star_min_borrowers {
            report.stars.push(GuaranteeCircle {
                kind: CircleKind::Star,
                members: std::iter::once(id(u)).chain(borrowers.iter().map(|&(v, _)| id(v))).collect(),
                edges: borrowers.iter().map(|&(v, _)| (id(u), id(v))).collect(),
            });
        }
        let guarantors = graph.predecessors(u);
        if guarantors.len() >= opts.joint_min_guarantors {
            report.joint_liability.push(GuaranteeCircle {
                kind: CircleKind::JointLiability,
                members: std::iter::once(id(u)).chain(guarantors.iter().map(|&(g, _)| id(g))).collect(),
                edges: guarantors.iter().map(|&(g, _)| (id(g), id(u))).collect(),
            });
        }
    }
    report
}

fn cycles_from(
    g: &SimpleGraph,
    root: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let u = *path.last().expect("path starts at root");
    on_path[u] = true;
    for &(v, _) in g.successors(u) {
        if v == root && path.len() >= 2 {
            out.push(path.clone());
        } else if v > root && !on_path[v] && path.len() < max_len {
            path.push(v);
            cycles_from(g, root, max_len, path, on_path, out);
            path.pop();
        }
    }
    on_path[u] = false;
}
