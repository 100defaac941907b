use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::model::EnterpriseId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewMode {
    Directed,
    Undirected,
}

/// Simple (no parallel edges, no self-loops) weighted graph over dense node
/// indices. Indices follow ascending enterprise id, so index order is id order.
#[derive(Clone, Debug)]
pub struct SimpleGraph {
    mode: ViewMode,
    ids: Vec<EnterpriseId>,
    index: HashMap<EnterpriseId, usize>,
    out: Vec<Vec<(usize, f64)>>,
    inn: Vec<Vec<(usize, f64)>>,
}

impl SimpleGraph {
    /// Builds a view from guarantor → borrower triples. Endpoints not listed
    /// in `nodes` are added.
    pub fn from_edges<'a>(
        nodes: impl IntoIterator<Item = EnterpriseId>,
        edges: impl IntoIterator<Item = (&'a EnterpriseId, &'a EnterpriseId, f64)>,
        mode: ViewMode,
    ) -> SimpleGraph {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut ids: Vec<EnterpriseId> = nodes.into_iter().collect();
        ids.extend(edges.iter().flat_map(|(g, b, _)| [(*g).clone(), (*b).clone()]));
        ids.sort();
        ids.dedup();
        let index: HashMap<EnterpriseId, usize> = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();

        let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (g, b, w) in edges {
            let (u, v) = (index[g], index[b]);
            if u == v {
                continue;
            }
            let key = match mode {
                ViewMode::Directed => (u, v),
                ViewMode::Undirected => (u.min(v), u.max(v)),
            };
            *weights.entry(key).or_insert(0.0) += w;
        }
        Self::assemble(mode, ids, index, weights)
    }

    /// Test and fixture helper: nodes are `0..n`, ids are zero-padded indices.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)], mode: ViewMode) -> SimpleGraph {
        let ids: Vec<EnterpriseId> = (0..n).map(index_id).collect();
        let owned: Vec<(EnterpriseId, EnterpriseId)> =
            edges.iter().map(|&(u, v)| (ids[u].clone(), ids[v].clone())).collect();
        Self::from_edges(ids.clone(), owned.iter().map(|(a, b)| (a, b, 1.0)), mode)
    }

    fn assemble(
        mode: ViewMode,
        ids: Vec<EnterpriseId>,
        index: HashMap<EnterpriseId, usize>,
        weights: BTreeMap<(usize, usize), f64>,
    ) -> SimpleGraph {
        let n = ids.len();
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for (&(u, v), &w) in &weights {
            out[u].push((v, w));
            inn[v].push((u, w));
            if mode == ViewMode::Undirected {
                out[v].push((u, w));
                inn[u].push((v, w));
            }
        }
        for list in out.iter_mut().chain(inn.iter_mut()) {
            list.sort_by_key(|&(x, _)| x);
        }
        SimpleGraph { mode, ids, index, out, inn }
    }

    pub fn mode(&self) -> ViewMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Ordered pairs in directed mode, unordered pairs in undirected mode.
    pub fn edge_count(&self) -> usize {
        let arcs: usize = self.out.iter().map(Vec::len).sum();
        match self.mode {
            ViewMode::Directed => arcs,
            ViewMode::Undirected => arcs / 2,
        }
    }

    pub fn ids(&self) -> &[EnterpriseId] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &EnterpriseId {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &EnterpriseId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Out-neighbours (borrowers of `u` in directed mode), ascending.
    pub fn successors(&self, u: usize) -> &[(usize, f64)] {
        &self.out[u]
    }

    /// In-neighbours (guarantors of `u` in directed mode), ascending.
    pub fn predecessors(&self, u: usize) -> &[(usize, f64)] {
        &self.inn[u]
    }

    /// Undirected neighbours; in directed mode, the union of in and out.
    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        match self.mode {
            ViewMode::Undirected => self.out[u].iter().map(|&(v, _)| v).collect(),
            ViewMode::Directed => {
                let mut ns: Vec<usize> = self.out[u].iter().chain(&self.inn[u]).map(|&(v, _)| v).collect();
                ns.sort_unstable();
                ns.dedup();
                ns
            }
        }
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.out[u].binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| self.out[u][i].1)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.out[u].len()
    }

    /// All edges as `(u, v, weight)`; in undirected mode each once with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let undirected = self.mode == ViewMode::Undirected;
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&(v, w)| (u, v, w)))
            .filter(move |&(u, v, _)| !undirected || u < v)
    }

    /// Same graph with the other view mode.
    pub fn to_undirected(&self) -> SimpleGraph {
        let mut weights = BTreeMap::new();
        for (u, v, w) in self.edges() {
            *weights.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        Self::assemble(ViewMode::Undirected, self.ids.clone(), self.index.clone(), weights)
    }

    /// Induced subgraph on `nodes` (any order); the result keeps id ordering.
    pub fn induced(&self, nodes: &[usize]) -> SimpleGraph {
        let mut keep: Vec<usize> = nodes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let ids: Vec<EnterpriseId> = keep.iter().map(|&i| self.ids[i].clone()).collect();
        let local: HashMap<usize, usize> = keep.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        let mut weights = BTreeMap::new();
        for &u in &keep {
            for &(v, w) in &self.out[u] {
                if let Some(&lv) = local.get(&v) {
                    let lu = local[&u];
                    if self.mode == ViewMode::Directed || lu < lv {
                        weights.insert((lu, lv), w);
                    }
                }
            }
        }
        let index = ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        Self::assemble(self.mode, ids, index, weights)
    }

    /// Copy without the listed edges (given in this view's orientation).
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> SimpleGraph {
        let norm = |u: usize, v: usize| match self.mode {
            ViewMode::Directed => (u, v),
            ViewMode::Undirected => (u.min(v), u.max(v)),
        };
        let cut: std::collections::HashSet<(usize, usize)> = removed.iter().map(|&(u, v)| norm(u, v)).collect();
        let weights = self.edges().filter(|&(u, v, _)| !cut.contains(&norm(u, v))).map(|(u, v, w)| ((u, v), w)).collect();
        Self::assemble(self.mode, self.ids.clone(), self.index.clone(), weights)
    }

    /// Weakly connected components, each sorted, listed by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![s];
            comp[s] = c;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in self.out[u].iter().chain(&self.inn[u]) {
                    if comp[v] == usize::MAX {
                        comp[v] = c;
                        members.push(v);
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

/// Zero-padded id used by [`SimpleGraph::from_index_edges`].
pub fn index_id(i: usize) -> EnterpriseId {
    EnterpriseId(format!("n{i:05}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parallel_edges_sum() {
        let a = EnterpriseId::new("A");
        let b = EnterpriseId::new("B");
        let g = SimpleGraph::from_edges([], [(&a, &b, 10.0), (&a, &b, 5.0)], ViewMode::Directed);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), Some(15.0));
        assert_eq!(g.weight(1, 0), None);
    }

    #[test]
    fn opposite_edges_collapse_undirected() {
        let a = EnterpriseId::new("A");
        let b = EnterpriseId::new("B");
        let g = SimpleGraph::from_edges([], [(&a, &b, 1.0), (&b, &a, 2.0)], ViewMode::Undirected);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), Some(3.0));
        assert_eq!(g.weight(1, 0), Some(3.0));
        let d = SimpleGraph::from_edges([], [(&a, &b, 1.0), (&b, &a, 2.0)], ViewMode::Directed);
        assert_eq!(d.edge_count(), 2);
    }

    proptest! {
        #[test]
        fn collapsed_count_is_distinct_pairs(pairs in proptest::collection::vec((0usize..8, 0usize..8), 0..60)) {
            let pairs: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
            let g = SimpleGraph::from_index_edges(8, &pairs, ViewMode::Directed);
            let distinct: std::collections::BTreeSet<_> = pairs.iter().copied().collect();
            prop_assert_eq!(g.edge_count(), distinct.len());
            let und: std::collections::BTreeSet<_> = pairs.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
            prop_assert_eq!(g.to_undirected().edge_count(), und.len());
        }
    }
}
