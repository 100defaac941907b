//! Agglomerative clustering by short random walks.
//!
//! Every node starts alone; the pair of adjacent communities whose merge
//! least increases the mean squared walk distance is merged next. The
//! dendrogram of each connected component is cut where modularity peaks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use super::partition::{CommunityId, Partition};
use crate::graph::{SimpleGraph, Snapshot, ViewMode};

pub const DEFAULT_WALK_STEPS: usize = 4;

/// Sparse probability row, sorted by node.
type Row = Vec<(usize, f64)>;

pub fn detect_communities(snapshot: &Snapshot, walk_steps: usize) -> Partition {
    detect_communities_in(&snapshot.simple_view(ViewMode::Undirected), walk_steps)
}

/// Works on the undirected, unweighted structure of `graph`.
pub fn detect_communities_in(graph: &SimpleGraph, walk_steps: usize) -> Partition {
    let g = graph.to_undirected_if_needed();
    let steps = walk_steps.max(1);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for comp in g.components() {
        groups.extend(cluster_component(&g, &comp, steps));
    }
    for grp in &mut groups {
        grp.sort_unstable();
    }
    groups.sort_by_key(|grp| grp[0]);
    let labels = groups
        .iter()
        .enumerate()
        .flat_map(|(c, grp)| {
            let g = &g;
            grp.iter().map(move |&u| (g.id(u).clone(), CommunityId(c as u32 + 1)))
        })
        .collect();
    Partition::from_labels(labels)
}

/// Newman modularity of `labels` (indexed by node) on the unweighted graph.
pub fn modularity(graph: &SimpleGraph, labels: &[usize]) -> f64 {
    let g = graph.to_undirected_if_needed();
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for (u, v, _) in g.edges() {
        if labels[u] == labels[v] {
            *internal.entry(labels[u]).or_default() += 1.0;
        }
    }
    for u in 0..g.node_count() {
        *degree.entry(labels[u]).or_default() += g.degree(u) as f64;
    }
    degree.iter().map(|(c, a)| internal.get(c).copied().unwrap_or(0.0) / m - (a / (2.0 * m)).powi(2)).sum()
}

trait UndirectedView {
    fn to_undirected_if_needed(&self) -> SimpleGraph;
}

impl UndirectedView for SimpleGraph {
    fn to_undirected_if_needed(&self) -> SimpleGraph {
        match self.mode() {
            ViewMode::Undirected => self.clone(),
            ViewMode::Directed => self.to_undirected(),
        }
    }
}

struct Community {
    size: usize,
    smallest: usize,
    row: Row,
    /// Neighbouring community → number of edges between them.
    links: BTreeMap<usize, f64>,
    internal: f64,
    degree: f64,
    alive: bool,
}

#[derive(PartialEq)]
struct Candidate {
    delta: f64,
    key: (usize, usize),
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Reversed so the max-heap pops the smallest delta, then the smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other.delta.total_cmp(&self.delta).then_with(|| other.key.cmp(&self.key))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn cluster_component(g: &SimpleGraph, comp: &[usize], steps: usize) -> Vec<Vec<usize>> {
    let n = comp.len();
    if n <= 1 {
        return vec![comp.to_vec()];
    }
    let local: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let adj: Vec<Vec<usize>> =
        comp.iter().map(|&u| g.neighbors(u).iter().map(|v| local[v]).collect()).collect();
    // A self-loop on every node keeps walks aperiodic.
    let walk_deg: Vec<f64> = adj.iter().map(|a| a.len() as f64 + 1.0).collect();
    let m: f64 = adj.iter().map(|a| a.len()).sum::<usize>() as f64 / 2.0;

    let step = |row: &Row| -> Row {
        let mut next: BTreeMap<usize, f64> = BTreeMap::new();
        for &(u, p) in row {
            let share = p / walk_deg[u];
            *next.entry(u).or_default() += share;
            for &v in &adj[u] {
                *next.entry(v).or_default() += share;
            }
        }
        next.into_iter().collect()
    };

    let mut comms: Vec<Community> = (0..n)
        .map(|i| {
            let mut row: Row = vec![(i, 1.0)];
            for _ in 0..steps {
                row = step(&row);
            }
            Community {
                size: 1,
                smallest: comp[i],
                row,
                links: adj[i].iter().map(|&j| (j, 1.0)).collect(),
                internal: 0.0,
                degree: adj[i].len() as f64,
                alive: true,
            }
        })
        .collect();

    let distance = |a: &Row, b: &Row| -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() || j < b.len() {
            let (k, d) = match (a.get(i), b.get(j)) {
                (Some(&(ka, pa)), Some(&(kb, pb))) if ka == kb => {
                    i += 1;
                    j += 1;
                    (ka, pa - pb)
                }
                (Some(&(ka, pa)), Some(&(kb, _))) if ka < kb => {
                    i += 1;
                    (ka, pa)
                }
                (Some(&(ka, pa)), None) => {
                    i += 1;
                    (ka, pa)
                }
                (_, Some(&(kb, pb))) => {
                    j += 1;
                    (kb, -pb)
                }
                (None, None) => unreachable!(),
            };
            acc += d * d / walk_deg[k];
        }
        acc
    };
    let delta = |x: &Community, y: &Community| -> f64 {
        let (sx, sy) = (x.size as f64, y.size as f64);
        sx * sy / (sx + sy) * distance(&x.row, &y.row) / n as f64
    };
    let candidate = |comms: &[Community], a: usize, b: usize| -> Candidate {
        let (x, y) = (&comms[a], &comms[b]);
        let key = (x.smallest.min(y.smallest), x.smallest.max(y.smallest));
        Candidate { delta: delta(x, y), key, a, b }
    };

    let mut heap = BinaryHeap::new();
    for a in 0..n {
        for &b in &adj[a] {
            if a < b {
                heap.push(candidate(&comms, a, b));
            }
        }
    }

    let q_of = |c: &Community| c.internal / m - (c.degree / (2.0 * m)).powi(2);
    let mut q: f64 = comms.iter().map(q_of).sum();
    let mut best_q = q;
    let mut merges: Vec<(usize, usize)> = Vec::new();
    let mut best_len = 0;

    while let Some(Candidate { a, b, .. }) = heap.pop() {
        if !comms[a].alive || !comms[b].alive {
            continue;
        }
        let (x, y) = (&comms[a], &comms[b]);
        let size = x.size + y.size;
        let row = merge_rows(&x.row, x.size as f64, &y.row, y.size as f64);
        let between = x.links.get(&b).copied().unwrap_or(0.0);
        let mut links = x.links.clone();
        for (&k, &w) in &y.links {
            *links.entry(k).or_default() += w;
        }
        links.remove(&a);
        links.remove(&b);
        let merged = Community {
            size,
            smallest: x.smallest.min(y.smallest),
            row,
            internal: x.internal + y.internal + between,
            degree: x.degree + y.degree,
            links,
            alive: true,
        };
        q += q_of(&merged) - q_of(x) - q_of(y);
        comms[a].alive = false;
        comms[b].alive = false;
        let id = comms.len();
        for (&k, &w) in &merged.links {
            let other = &mut comms[k];
            other.links.remove(&a);
            other.links.remove(&b);
            other.links.insert(id, w);
        }
        let neighbours: Vec<usize> = merged.links.keys().copied().collect();
        comms.push(merged);
        for k in neighbours {
            heap.push(candidate(&comms, id, k));
        }
        merges.push((a, b));
        if q > best_q + 1e-12 {
            best_q = q;
            best_len = merges.len();
        }
    }

    // Replay the first `best_len` merges with a union-find over slots.
    let total = n + merges.len();
    let mut parent: Vec<usize> = (0..total).collect();
    for (i, &(a, b)) in merges.iter().take(best_len).enumerate() {
        parent[a] = n + i;
        parent[b] = n + i;
    }
    let root = |mut s: usize| {
        while parent[s] != s {
            s = parent[s];
        }
        s
    };
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &u) in comp.iter().enumerate() {
        out.entry(root(i)).or_default().push(u);
    }
    out.into_values().collect()
}

fn merge_rows(a: &Row, wa: f64, b: &Row, wb: f64) -> Row {
    let total = wa + wb;
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for &(k, p) in a {
        *out.entry(k).or_default() += p * wa / total;
    }
    for &(k, p) in b {
        *out.entry(k).or_default() += p * wb / total;
    }
    out.into_iter().collect()
}
