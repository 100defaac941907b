use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ContagionError;
use crate::control::RunControl;
use crate::exec::Exec;
use crate::graph::{EnterpriseId, SimpleGraph, Snapshot, ViewMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCaps {
    /// Maximum number of edges per path.
    pub max_len: usize,
    pub max_paths: usize,
}

impl Default for PathCaps {
    fn default() -> Self {
        PathCaps { max_len: 8, max_paths: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub seed: EnterpriseId,
    /// Maximal simple paths seed → guarantor → guarantor's guarantor …
    pub paths: Vec<Vec<EnterpriseId>>,
    pub truncated: bool,
    /// Number of paths containing each node (the seed included).
    pub occurrences: BTreeMap<EnterpriseId, u64>,
    /// Occurrence over the maximum occurrence.
    pub importance: BTreeMap<EnterpriseId, f64>,
}

impl PropagationResult {
    pub fn fingerprint(&self) -> String {
        crate::fingerprint::of(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ImportanceMap {
    pub occurrences: BTreeMap<EnterpriseId, u64>,
    pub importance: BTreeMap<EnterpriseId, f64>,
    /// Seeds whose enumeration hit a cap.
    pub truncated_seeds: usize,
    /// Set when a cancelled run skipped some seeds.
    #[serde(default)]
    pub cancelled: bool,
}

/// Guarantor → borrower edges removed from one analyst's propagation view.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSet {
    pub edges: BTreeSet<(EnterpriseId, EnterpriseId)>,
}

/// Propagation analyses over one snapshot, minus a set of cut edges. The
/// snapshot itself is shared and never modified.
#[derive(Clone, Debug)]
pub struct PropagationView {
    base: Arc<SimpleGraph>,
    effective: Arc<SimpleGraph>,
    cuts: CutSet,
}

impl PropagationView {
    pub fn new(snapshot: &Snapshot) -> Self {
        Self::from_graph(Arc::new(snapshot.simple_view(ViewMode::Directed)))
    }

    /// `graph` must be a directed guarantor → borrower view.
    pub fn from_graph(graph: Arc<SimpleGraph>) -> Self {
        PropagationView { effective: graph.clone(), base: graph, cuts: CutSet::default() }
    }

    pub fn graph(&self) -> &SimpleGraph {
        &self.effective
    }

    pub fn cuts(&self) -> &CutSet {
        &self.cuts
    }

    fn node(&self, id: &EnterpriseId) -> Result<usize, ContagionError> {
        self.base.index_of(id).ok_or_else(|| ContagionError::UnknownNode(id.to_string()))
    }

    fn edge(&self, guarantor: &EnterpriseId, borrower: &EnterpriseId) -> Result<(usize, usize), ContagionError> {
        let unknown = || ContagionError::UnknownEdge(guarantor.to_string(), borrower.to_string());
        let g = self.base.index_of(guarantor).ok_or_else(unknown)?;
        let b = self.base.index_of(borrower).ok_or_else(unknown)?;
        if self.base.has_edge(g, b) {
            Ok((g, b))
        } else {
            Err(unknown())
        }
    }

    fn rebuild(&mut self) {
        let removed: Vec<(usize, usize)> = self
            .cuts
            .edges
            .iter()
            .map(|(g, b)| (self.base.index_of(g).unwrap(), self.base.index_of(b).unwrap()))
            .collect();
        self.effective = Arc::new(self.base.without_edges(&removed));
    }

    pub fn apply_cut(&mut self, guarantor: &EnterpriseId, borrower: &EnterpriseId) -> Result<(), ContagionError> {
        self.edge(guarantor, borrower)?;
        if self.cuts.edges.insert((guarantor.clone(), borrower.clone())) {
            self.rebuild();
        }
        Ok(())
    }

    pub fn revert_cut(&mut self, guarantor: &EnterpriseId, borrower: &EnterpriseId) -> Result<(), ContagionError> {
        self.edge(guarantor, borrower)?;
        if self.cuts.edges.remove(&(guarantor.clone(), borrower.clone())) {
            self.rebuild();
        }
        Ok(())
    }

    /// Nodes reachable from `seed` by stepping from borrowers to guarantors.
    pub fn contagion_set(&self, seed: &EnterpriseId) -> Result<BTreeSet<EnterpriseId>, ContagionError> {
        let s = self.node(seed)?;
        let g = &self.effective;
        let mut seen = vec![false; g.node_count()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        let mut out = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            for &(v, _) in g.predecessors(u) {
                if !seen[v] {
                    seen[v] = true;
                    out.insert(g.id(v).clone());
                    queue.push_back(v);
                }
            }
        }
        Ok(out)
    }

    pub fn enumerate_paths(&self, seed: &EnterpriseId, caps: PathCaps) -> Result<PropagationResult, ContagionError> {
        let s = self.node(seed)?;
        let g = &self.effective;
        let raw = walk_paths(g, s, caps);
        let mut counts = vec![0u64; g.node_count()];
        for p in &raw.paths {
            for &u in p {
                counts[u] += 1;
            }
        }
        let occurrences: BTreeMap<EnterpriseId, u64> =
            counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (g.id(i).clone(), c)).collect();
        Ok(PropagationResult {
            seed: seed.clone(),
            paths: raw.paths.iter().map(|p| p.iter().map(|&i| g.id(i).clone()).collect()).collect(),
            truncated: raw.truncated,
            importance: normalise(&occurrences),
            occurrences,
        })
    }

    /// Occurrences summed over every node taken as seed.
    pub fn importance(&self, caps: PathCaps, exec: Exec) -> ImportanceMap {
        self.importance_with(caps, exec, None)
    }

    /// Seeds run in chunks of 64; cancellation is checked before each chunk.
    pub fn importance_with(&self, caps: PathCaps, exec: Exec, ctrl: Option<&RunControl>) -> ImportanceMap {
        const CHUNK: usize = 64;
        let g = &self.effective;
        let n = g.node_count();
        let chunks = n.div_ceil(CHUNK);
        let done = std::sync::atomic::AtomicUsize::new(0);
        let partials = exec.map_range(chunks, |c| {
            if ctrl.is_some_and(|c| c.is_cancelled()) {
                return None;
            }
            let mut counts = vec![0u64; n];
            let mut truncated = 0usize;
            for s in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let raw = walk_paths(g, s, caps);
                truncated += raw.truncated as usize;
                for p in &raw.paths {
                    for &u in p {
                        counts[u] += 1;
                    }
                }
            }
            let finished = done.fetch_add(1, std::sync::atomic::Ordering::SeqCst) + 1;
            if let Some(ctrl) = ctrl {
                ctrl.report(finished, chunks);
            }
            Some((counts, truncated))
        });
        let cancelled = partials.iter().any(Option::is_none);
        let mut counts = vec![0u64; n];
        let mut truncated_seeds = 0;
        for (part, t) in partials.into_iter().flatten() {
            truncated_seeds += t;
            counts.iter_mut().zip(part).for_each(|(a, b)| *a += b);
        }
        let occurrences: BTreeMap<EnterpriseId, u64> =
            counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (g.id(i).clone(), c)).collect();
        ImportanceMap { importance: normalise(&occurrences), occurrences, truncated_seeds, cancelled }
    }
}

fn normalise(occ: &BTreeMap<EnterpriseId, u64>) -> BTreeMap<EnterpriseId, f64> {
    let max = occ.values().copied().max().unwrap_or(0);
    occ.iter().map(|(id, &c)| (id.clone(), c as f64 / max as f64)).collect()
}

pub(crate) struct RawPaths {
    pub paths: Vec<Vec<usize>>,
    pub truncated: bool,
}

/// Depth-first over guarantors in ascending id order, so truncation by the
/// path cap always keeps the same lexicographic prefix.
pub(crate) fn walk_paths(g: &SimpleGraph, seed: usize, caps: PathCaps) -> RawPaths {
    let mut out = RawPaths { paths: Vec::new(), truncated: false };
    if caps.max_len == 0 {
        out.truncated = !g.predecessors(seed).is_empty();
        return out;
    }
    let mut on_path = vec![false; g.node_count()];
    let mut path = vec![seed];
    on_path[seed] = true;
    dfs(g, caps, &mut path, &mut on_path, &mut out);
    out
}

/// Returns false once the path-count cap stops the search.
fn dfs(g: &SimpleGraph, caps: PathCaps, path: &mut Vec<usize>, on_path: &mut [bool], out: &mut RawPaths) -> bool {
    let u = *path.last().expect("non-empty path");
    let mut extended = false;
    for &(v, _) in g.predecessors(u) {
        if on_path[v] {
            continue;
        }
        if path.len() > caps.max_len {
            out.truncated = true;
            break;
        }
        extended = true;
        path.push(v);
        on_path[v] = true;
        let go_on = dfs(g, caps, path, on_path, out);
        on_path[v] = false;
        path.pop();
        if !go_on {
            return false;
        }
    }
    if !extended && path.len() >= 2 {
        if out.paths.len() == caps.max_paths {
            out.truncated = true;
            return false;
        }
        out.paths.push(path.clone());
    }
    true
}

pub fn contagion_set(snapshot: &Snapshot, seed: &EnterpriseId) -> Result<BTreeSet<EnterpriseId>, ContagionError> {
    PropagationView::new(snapshot).contagion_set(seed)
}

pub fn enumerate_paths(snapshot: &Snapshot, seed: &EnterpriseId, caps: PathCaps) -> Result<PropagationResult, ContagionError> {
    PropagationView::new(snapshot).enumerate_paths(seed, caps)
}

pub fn propagation_importance(snapshot: &Snapshot, caps: PathCaps) -> ImportanceMap {
    PropagationView::new(snapshot).importance(caps, Exec::default())
}
