//! Brute-force oracles and fixtures shared by the integration tests. Each
//! oracle is written independently of the library code it checks.
#![allow(dead_code, clippy::needless_range_loop, clippy::too_many_arguments)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use glens_core::graph::{ContractId, Date, EnterpriseId, GuaranteeEdge, SimpleGraph, Snapshot, ViewMode};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Adj = Vec<Vec<bool>>;

pub fn d(s: &str) -> Date {
    s.parse().unwrap()
}

pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                e.push((u, v));
            }
        }
    }
    e
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Adj {
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in edges {
        a[u][v] = true;
    }
    a
}

pub fn symmetric(a: &Adj) -> Adj {
    let n = a.len();
    (0..n).map(|u| (0..n).map(|v| a[u][v] || a[v][u]).collect()).collect()
}

pub fn directed(n: usize, edges: &[(usize, usize)]) -> SimpleGraph {
    SimpleGraph::from_index_edges(n, edges, ViewMode::Directed)
}

/// All-pairs hop distances and shortest-path counts by Floyd-Warshall style
/// relaxation, then pair sums for betweenness and harmonic closeness.
pub fn oracle_betweenness_closeness(a: &Adj) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    const INF: usize = usize::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for u in 0..n {
        dist[u][u] = 0;
        for v in 0..n {
            if a[u][v] {
                dist[u][v] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if dist[i][k] + dist[k][j] < dist[i][j] {
                    dist[i][j] = dist[i][k] + dist[k][j];
                }
            }
        }
    }
    // sigma[s][t]: number of shortest s-t paths, filled in order of distance.
    let mut sigma = vec![vec![0f64; n]; n];
    for s in 0..n {
        sigma[s][s] = 1.0;
        let mut order: Vec<usize> = (0..n).filter(|&t| dist[s][t] < INF).collect();
        order.sort_by_key(|&t| dist[s][t]);
        for &t in &order {
            if t == s {
                continue;
            }
            sigma[s][t] = (0..n).filter(|&v| a[v][t] && dist[s][v] + 1 == dist[s][t]).map(|v| sigma[s][v]).sum();
        }
    }
    let mut bc = vec![0.0; n];
    for v in 0..n {
        for s in 0..n {
            for t in s + 1..n {
                if s == v || t == v || dist[s][t] >= INF {
                    continue;
                }
                if dist[s][v] + dist[v][t] == dist[s][t] {
                    bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
                }
            }
        }
    }
    if n > 2 {
        let scale = 2.0 / ((n - 1) as f64 * (n - 2) as f64);
        bc.iter_mut().for_each(|b| *b *= scale);
    } else {
        bc.iter_mut().for_each(|b| *b = 0.0);
    }
    let cc = (0..n)
        .map(|u| {
            if n < 2 {
                return 0.0;
            }
            let s: f64 = (0..n).filter(|&v| v != u && dist[u][v] < INF).map(|v| 1.0 / dist[u][v] as f64).sum();
            s / (n - 1) as f64
        })
        .collect();
    (bc, cc)
}

/// PageRank as the solution of `(I - d M) x = (1 - d)/n`, with dangling
/// columns spread uniformly, by Gaussian elimination.
pub fn oracle_pagerank(a: &Adj, damping: f64) -> Vec<f64> {
    let n = a.len();
    let nf = n as f64;
    let mut m = vec![vec![0.0; n + 1]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
        row[n] = (1.0 - damping) / nf;
    }
    for u in 0..n {
        let out: Vec<usize> = (0..n).filter(|&v| a[u][v]).collect();
        if out.is_empty() {
            for row in m.iter_mut() {
                row[u] -= damping / nf;
            }
        } else {
            for &v in &out {
                m[v][u] -= damping / out.len() as f64;
            }
        }
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// Largest k whose k-core (iterated removal of nodes with degree < k)
/// still contains the node.
pub fn oracle_kshell(a: &Adj) -> Vec<u32> {
    let n = a.len();
    let mut shell = vec![0u32; n];
    for k in 1..=n {
        let mut alive = vec![true; n];
        loop {
            let drop: Vec<usize> = (0..n)
                .filter(|&u| alive[u] && (0..n).filter(|&v| alive[v] && a[u][v]).count() < k)
                .collect();
            if drop.is_empty() {
                break;
            }
            for u in drop {
                alive[u] = false;
            }
        }
        for u in 0..n {
            if alive[u] {
                shell[u] = k as u32;
            }
        }
    }
    shell
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Simple cycles of length 2..=max_len, each as a node sequence starting at
/// its smallest node: every node subset times every ordering of the rest.
pub fn oracle_cycles(a: &Adj, max_len: usize) -> BTreeSet<Vec<usize>> {
    let n = a.len();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let nodes: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let k = nodes.len();
        if !(2..=max_len).contains(&k) {
            continue;
        }
        for p in permutations(k - 1) {
            let seq: Vec<usize> = std::iter::once(nodes[0]).chain(p.iter().map(|&i| nodes[i + 1])).collect();
            if (0..k).all(|i| a[seq[i]][seq[(i + 1) % k]]) {
                out.insert(seq);
            }
        }
    }
    out
}

/// Isomorphism-invariant code: the smallest adjacency bit string over all
/// relabelings, reading rows then columns.
pub fn oracle_code(a: &Adj) -> u64 {
    let k = a.len();
    permutations(k)
        .iter()
        .map(|p| {
            let mut code = 0u64;
            for i in 0..k {
                for j in 0..k {
                    if i != j {
                        code = code << 1 | a[p[i]][p[j]] as u64;
                    }
                }
            }
            code
        })
        .min()
        .unwrap()
}

pub fn induced(a: &Adj, nodes: &[usize]) -> Adj {
    nodes.iter().map(|&u| nodes.iter().map(|&v| a[u][v]).collect()).collect()
}

pub fn weakly_connected(a: &Adj) -> bool {
    let n = a.len();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && (a[u][v] || a[v][u]) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n)).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect()).collect()
}

/// Oracle code → number of weakly connected induced k-subsets.
pub fn oracle_census(a: &Adj, k: usize) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    for s in subsets(a.len(), k) {
        let sub = induced(a, &s);
        if weakly_connected(&sub) {
            *out.entry(oracle_code(&sub)).or_default() += 1;
        }
    }
    out
}

/// Node sets whose induced subgraph equals the pattern under some injective
/// slot assignment.
pub fn oracle_matches(a: &Adj, pattern: &Adj) -> BTreeSet<Vec<usize>> {
    let k = pattern.len();
    let mut out = BTreeSet::new();
    for s in subsets(a.len(), k) {
        let hit = permutations(k).iter().any(|p| (0..k).all(|i| (0..k).all(|j| i == j || a[s[p[i]]][s[p[j]]] == pattern[i][j])));
        if hit {
            out.insert(s);
        }
    }
    out
}

/// Nodes reachable from `seed` against edge direction, seed excluded.
pub fn reverse_reach(a: &Adj, seed: usize) -> BTreeSet<usize> {
    let n = a.len();
    let mut seen = vec![false; n];
    seen[seed] = true;
    let mut queue = VecDeque::from([seed]);
    let mut out = BTreeSet::new();
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if a[v][u] && !seen[v] {
                seen[v] = true;
                out.insert(v);
                queue.push_back(v);
            }
        }
    }
    out
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let mut table: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, f64> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *table.entry((a, b)).or_default() += 1.0;
        *rows.entry(a).or_default() += 1.0;
        *cols.entry(b).or_default() += 1.0;
    }
    let c2 = |v: f64| v * (v - 1.0) / 2.0;
    let index: f64 = table.values().map(|&v| c2(v)).sum();
    let ra: f64 = rows.values().map(|&v| c2(v)).sum();
    let cb: f64 = cols.values().map(|&v| c2(v)).sum();
    let expected = ra * cb / c2(n);
    let max = (ra + cb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

pub fn edge(g: &str, b: &str, amount: f64, id: usize) -> GuaranteeEdge {
    GuaranteeEdge {
        guarantor: EnterpriseId::new(g),
        borrower: EnterpriseId::new(b),
        amount,
        contract_id: ContractId::new(format!("G{id:04}")),
        loan_contract_id: ContractId::new(format!("L-{b}")),
        valid_from: d("2013-01-01"),
        valid_to: None,
    }
}

/// B→A; C→B; D→B; E→C, E→D, E→F, E→G, E→H (guarantor → borrower).
pub fn worked_example_snapshot() -> Snapshot {
    let pairs = [("B", "A"), ("C", "B"), ("D", "B"), ("E", "C"), ("E", "D"), ("E", "F"), ("E", "G"), ("E", "H")];
    let edges = pairs.iter().enumerate().map(|(i, (g, b))| edge(g, b, 100.0 * (i + 1) as f64, i)).collect();
    Snapshot::from_parts(d("2014-01-01"), Vec::<EnterpriseId>::new(), edges)
}

pub fn ids(v: &[&str]) -> BTreeSet<EnterpriseId> {
    v.iter().map(|s| EnterpriseId::new(*s)).collect()
}

pub fn motif_adj(m: &glens_core::patterns::Motif) -> Adj {
    adjacency(m.k(), &m.edges())
}

fn close(a: &[f64], b: &[f64], tol: f64) -> Option<(usize, f64, f64)> {
    a.iter().zip(b).enumerate().find(|(_, (x, y))| (*x - *y).abs() > tol).map(|(i, (x, y))| (i, *x, *y))
}

/// One random digraph checked against every centrality oracle.
pub fn centrality_case(seed: u64, exec: glens_core::Exec) -> Result<(), String> {
    use glens_core::metrics::{betweenness_closeness, hits, kshell, pagerank};
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=50);
    let p = rng.gen_range(0.01..0.2);
    let edges = random_edges(&mut rng, n, p);
    let a = adjacency(n, &edges);
    let g = directed(n, &edges);
    let und = g.to_undirected();

    let (bc, cc) = betweenness_closeness(&und, exec);
    let (obc, occ) = oracle_betweenness_closeness(&symmetric(&a));
    if let Some((i, x, y)) = close(&bc, &obc, 1e-9) {
        return Err(format!("seed {seed}: betweenness[{i}] {x} vs {y}"));
    }
    if let Some((i, x, y)) = close(&cc, &occ, 1e-9) {
        return Err(format!("seed {seed}: closeness[{i}] {x} vs {y}"));
    }
    let pr = pagerank(&g, 0.85, 1e-10, 10_000).map_err(|e| e.to_string())?;
    if let Some((i, x, y)) = close(&pr, &oracle_pagerank(&a, 0.85), 1e-9) {
        return Err(format!("seed {seed}: pagerank[{i}] {x} vs {y}"));
    }
    if kshell(&und) != oracle_kshell(&symmetric(&a)) {
        return Err(format!("seed {seed}: k-shell differs"));
    }
    let (hub, auth) = hits(&g, 1e-10, 10_000).map_err(|e| e.to_string())?;
    if !edges.is_empty() {
        let mut a2 = vec![0.0; n];
        let mut h2 = vec![0.0; n];
        for &(u, v) in &edges {
            a2[v] += hub[u];
        }
        let na = a2.iter().map(|x| x * x).sum::<f64>().sqrt();
        for &(u, v) in &edges {
            h2[u] += auth[v];
        }
        let nh = h2.iter().map(|x| x * x).sum::<f64>().sqrt();
        let res: f64 = a2.iter().zip(&auth).map(|(x, y)| (x / na - y).abs()).sum::<f64>()
            + h2.iter().zip(&hub).map(|(x, y)| (x / nh - y).abs()).sum::<f64>();
        if res >= 1e-8 {
            return Err(format!("seed {seed}: HITS residual {res}"));
        }
    }
    Ok(())
}

/// One random digraph (n <= 12) checked for cycles, 3/4-node census and
/// matching against exhaustive enumeration.
pub fn pattern_case(seed: u64, exec: glens_core::Exec) -> Result<(), String> {
    use glens_core::patterns::{detect_circles_with, match_motif_with, motif_census_with, CensusOptions, CircleOptions, MatchOptions};
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=12);
    let p = rng.gen_range(0.08..0.4);
    let edges = random_edges(&mut rng, n, p);
    let a = adjacency(n, &edges);
    let g = directed(n, &edges);

    let circles = detect_circles_with(&g, &CircleOptions { max_cycle_len: 6, exec, ..Default::default() }, None);
    if circles.truncated {
        return Err(format!("seed {seed}: cycle enumeration truncated"));
    }
    let found: BTreeSet<Vec<usize>> = circles
        .mutual
        .iter()
        .chain(&circles.revolving)
        .map(|c| c.members.iter().map(|id| g.index_of(id).unwrap()).collect())
        .collect();
    if found != oracle_cycles(&a, 6) {
        return Err(format!("seed {seed}: cycle sets differ"));
    }

    for k in [3, 4] {
        let census = motif_census_with(&g, k, &CensusOptions { exec, ..Default::default() }, None).map_err(|e| e.to_string())?;
        let mut got: BTreeMap<u64, u64> = BTreeMap::new();
        for c in &census.classes {
            *got.entry(oracle_code(&motif_adj(&c.motif))).or_default() += c.count;
        }
        if got != oracle_census(&a, k) {
            return Err(format!("seed {seed}: {k}-node census differs"));
        }
        for c in &census.classes {
            let m = match_motif_with(&g, &c.motif, &MatchOptions { exec, ..Default::default() }, None);
            let sets: BTreeSet<Vec<usize>> = m
                .embeddings
                .iter()
                .map(|e| {
                    let mut s: Vec<usize> = e.iter().map(|id| g.index_of(id).unwrap()).collect();
                    s.sort_unstable();
                    s
                })
                .collect();
            if sets.len() != m.embeddings.len() {
                return Err(format!("seed {seed}: duplicate embeddings for {}", c.motif));
            }
            if sets != oracle_matches(&a, &motif_adj(&c.motif)) {
                return Err(format!("seed {seed}: embeddings of {} differ", c.motif));
            }
            if sets.len() as u64 != c.count {
                return Err(format!("seed {seed}: census and match disagree on {}", c.motif));
            }
        }
    }
    Ok(())
}

/// One summary row: label, firms, defaulted firms, percent of firms,
/// percent of amount, spanners, neighbouring communities, loan total,
/// default total.
#[derive(Clone, Copy, Debug)]
pub struct CommunityRow {
    pub label: u32,
    pub firms: usize,
    pub defaults: usize,
    pub pct_firms: u32,
    pub pct_amount: u32,
    pub spanners: usize,
    pub neighbours: usize,
    pub loan: f64,
    pub lost: f64,
}

const fn row(label: u32, firms: usize, defaults: usize, pct_firms: u32, pct_amount: u32, spanners: usize, neighbours: usize, loan: f64, lost: f64) -> CommunityRow {
    CommunityRow { label, firms, defaults, pct_firms, pct_amount, spanners, neighbours, loan, lost }
}

pub const COMMUNITY_ROWS: [CommunityRow; 9] = [
    row(1, 44, 14, 32, 68, 7, 5, 1071.0, 733.0),
    row(2, 42, 6, 14, 37, 3, 3, 518.0, 190.0),
    row(3, 35, 3, 9, 4, 5, 4, 1503.0, 62.0),
    row(4, 19, 5, 26, 92, 2, 3, 292.0, 270.0),
    row(5, 29, 5, 17, 83, 2, 2, 1282.0, 1065.0),
    row(32, 4, 1, 25, 72, 1, 1, 18.0, 13.0),
    row(33, 3, 1, 33, 100, 1, 1, 48.0, 48.0),
    row(34, 4, 0, 0, 0, 1, 1, 57.0, 0.0),
    row(35, 4, 0, 0, 0, 1, 1, 105.0, 0.0),
];

/// Graph, partition and ledger realising [`COMMUNITY_ROWS`]: each community
/// is a path, and spanner `j % s` links to single-node filler community
/// `j % m` for `j` in `0..max(s, m)`.
pub fn community_fixture() -> (SimpleGraph, glens_core::community::Partition, glens_core::financials::FinancialLedger) {
    use glens_core::community::{CommunityId, Partition};
    use glens_core::financials::FirmFinancials;
    let mut labels = BTreeMap::new();
    let mut pairs: Vec<(EnterpriseId, EnterpriseId)> = Vec::new();
    let mut firms = BTreeMap::new();
    for r in COMMUNITY_ROWS {
        let node = |i: usize| EnterpriseId::new(format!("c{:02}_{i:03}", r.label));
        for i in 0..r.firms {
            labels.insert(node(i), CommunityId(r.label));
            if i > 0 {
                pairs.push((node(i - 1), node(i)));
            }
            let f = if i < r.defaults {
                let lost = if i == 0 { r.lost - (r.defaults - 1) as f64 } else { 1.0 };
                FirmFinancials { loan_total: lost, default_total: lost, defaulted: true }
            } else {
                let healthy = r.firms - r.defaults;
                let rest = r.loan - r.lost;
                FirmFinancials { loan_total: rest / healthy as f64, default_total: 0.0, defaulted: false }
            };
            firms.insert(node(i), f);
        }
        for j in 0..r.spanners.max(r.neighbours) {
            let filler = EnterpriseId::new(format!("f{:02}_{:02}", r.label, j % r.neighbours));
            labels.insert(filler.clone(), CommunityId(1000 + r.label * 10 + (j % r.neighbours) as u32));
            pairs.push((node(j % r.spanners), filler));
        }
    }
    let g = SimpleGraph::from_edges(labels.keys().cloned(), pairs.iter().map(|(a, b)| (a, b, 1.0)), ViewMode::Undirected);
    (g, Partition::from_labels(labels), glens_core::financials::FinancialLedger::from_map(firms))
}

/// One step of an analyst session: a partition edit or a propagation cut.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum SessionOp {
    Edit(glens_core::community::EditOp),
    Cut(EnterpriseId, EnterpriseId),
    Revert(EnterpriseId, EnterpriseId),
}

pub struct Session {
    pub undirected: SimpleGraph,
    pub partition: glens_core::community::Partition,
    pub view: glens_core::contagion::PropagationView,
}

impl Session {
    pub fn new(directed: &std::sync::Arc<SimpleGraph>, partition: glens_core::community::Partition) -> Session {
        Session {
            undirected: directed.to_undirected(),
            partition,
            view: glens_core::contagion::PropagationView::from_graph(directed.clone()),
        }
    }

    pub fn apply(&mut self, op: &SessionOp) -> Result<(), String> {
        match op {
            SessionOp::Edit(e) => self.partition = self.partition.apply(&self.undirected, e).map_err(|e| e.to_string())?,
            SessionOp::Cut(a, b) => self.view.apply_cut(a, b).map_err(|e| e.to_string())?,
            SessionOp::Revert(a, b) => self.view.revert_cut(a, b).map_err(|e| e.to_string())?,
        }
        Ok(())
    }

    /// Partition fingerprint plus a fingerprint over all propagation results.
    pub fn fingerprints(&self) -> (String, String) {
        let caps = glens_core::contagion::PathCaps { max_len: 6, max_paths: 2_000 };
        let imp = self.view.importance(caps, glens_core::Exec::default());
        let cuts = self.view.cuts().clone();
        (self.partition.fingerprint(), glens_core::fingerprint::of(&(imp, cuts)))
    }
}

/// Draws `len` valid operations against a live session, applying each.
pub fn random_session_log(session: &mut Session, rng: &mut ChaCha8Rng, len: usize) -> Vec<SessionOp> {
    use glens_core::community::{find_spanners, EditOp};
    use rand::seq::SliceRandom;
    let mut log = Vec::new();
    while log.len() < len {
        let g = &session.undirected;
        let op = match rng.gen_range(0..5) {
            0 | 1 => {
                let spanners = find_spanners(&session.partition, g);
                let Some(s) = spanners.choose(rng) else { continue };
                let target = *s.adjacent.iter().collect::<Vec<_>>().choose(rng).unwrap();
                if rng.gen_bool(0.5) {
                    SessionOp::Edit(EditOp::Merge { into: s.community, absorbed: *target })
                } else {
                    SessionOp::Edit(EditOp::Reassign { node: s.node.clone(), target: *target })
                }
            }
            2 => {
                let comms: Vec<_> = session.partition.communities().into_iter().filter(|(_, m)| m.len() > 1).collect();
                let Some((c, members)) = comms.choose(rng) else { continue };
                let u = members.choose(rng).unwrap();
                let ui = g.index_of(u).unwrap();
                let cut: Vec<_> = g
                    .neighbors(ui)
                    .into_iter()
                    .map(|v| g.id(v).clone())
                    .filter(|v| session.partition.label_of(v) == Some(*c))
                    .map(|v| (u.clone(), v))
                    .collect();
                if cut.is_empty() {
                    continue;
                }
                SessionOp::Edit(EditOp::Split { community: *c, cut })
            }
            3 => {
                let dg = session.view.graph();
                let edges: Vec<_> = dg.edges().map(|(u, v, _)| (dg.id(u).clone(), dg.id(v).clone())).collect();
                let Some((a, b)) = edges.choose(rng) else { continue };
                SessionOp::Cut(a.clone(), b.clone())
            }
            _ => {
                let cut: Vec<_> = session.view.cuts().edges.iter().cloned().collect();
                let Some((a, b)) = cut.choose(rng) else { continue };
                SessionOp::Revert(a.clone(), b.clone())
            }
        };
        if session.apply(&op).is_ok() {
            log.push(op);
        }
    }
    log
}

/// Synthetic network used by several suites, with its ground truth.
pub fn synthetic(cfg: &glens_core::ingest::SyntheticConfig) -> (glens_core::ingest::TableSet, glens_core::ingest::GroundTruth, glens_core::GuaranteeNetwork) {
    let (tables, truth) = glens_core::ingest::generate_synthetic(cfg).unwrap();
    let net = glens_core::ingest::join_to_network(&tables).unwrap();
    (tables, truth, net)
}

/// Fingerprints of everything a window's model may depend on.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowState {
    pub train_features: String,
    pub training_set: String,
    pub model: String,
    pub predict_features: String,
}

pub fn window_state(net: &glens_core::GuaranteeNetwork, t: &glens_core::risk::WindowTuple, params: &glens_core::risk::RollingParams) -> WindowState {
    use glens_core::fingerprint::of;
    use glens_core::risk::{features_at, fit_window, training_set};
    let set = training_set(net, t, params.grace_days);
    WindowState {
        train_features: of(&set.rows),
        training_set: set.fingerprint(),
        model: fit_window(&set, params).map(|m| m.fingerprint()).unwrap_or_else(|e| e.to_string()),
        predict_features: of(&features_at(net, t.predict_cutoff(), params.grace_days)),
    }
}

/// Rewrites one randomly chosen record dated at or after `cutoff`. Returns
/// false when the drawn record kind has no such record.
fn mutate_after(parts: &mut (Vec<glens_core::graph::Enterprise>, Vec<GuaranteeEdge>, Vec<glens_core::graph::LoanContract>, Vec<glens_core::graph::RepaymentEvent>), cutoff: Date, rng: &mut ChaCha8Rng) -> bool {
    use chrono::Duration;
    use glens_core::graph::{Installment, LoanContract, RepaymentEvent};
    use rand::seq::SliceRandom;
    let (ents, edges, contracts, repayments) = parts;
    let later = |rng: &mut ChaCha8Rng| cutoff + Duration::days(rng.gen_range(0..400));
    match rng.gen_range(0..8) {
        0 => {
            let mut due: Vec<_> = repayments.iter_mut().filter(|r| r.due_date >= cutoff).collect();
            let Some(r) = due.choose_mut(rng) else { return false };
            r.paid_date = if rng.gen_bool(0.3) { None } else { Some(r.due_date + Duration::days(rng.gen_range(0..200))) };
            r.paid_amount = if r.paid_date.is_some() { r.due_amount } else { 0.0 };
            r.default_flag = !r.default_flag;
            true
        }
        1 => {
            let mut open: Vec<_> = repayments.iter_mut().filter(|r| r.due_date < cutoff && r.paid_date.is_none_or(|p| p >= cutoff)).collect();
            let Some(r) = open.choose_mut(rng) else { return false };
            r.paid_date = if rng.gen_bool(0.5) { None } else { Some(later(rng)) };
            true
        }
        2 => {
            let mut recs: Vec<_> = ents.iter_mut().flat_map(|e| e.deposits.iter_mut()).filter(|d| d.as_of >= cutoff).collect();
            let Some(d) = recs.choose_mut(rng) else { return false };
            d.balance *= rng.gen_range(0.0..3.0);
            true
        }
        3 => {
            let mut recs: Vec<_> = ents.iter_mut().flat_map(|e| e.credit.iter_mut()).filter(|c| c.as_of >= cutoff).collect();
            let Some(c) = recs.choose_mut(rng) else { return false };
            c.rating = rng.gen_range(1..=10);
            true
        }
        4 => {
            let mut recs: Vec<_> = ents.iter_mut().flat_map(|e| e.profile.iter_mut()).filter(|p| p.as_of >= cutoff).collect();
            let Some(p) = recs.choose_mut(rng) else { return false };
            p.sector = "leaked".into();
            p.registered_capital *= 2.0;
            true
        }
        5 => {
            let mut recs: Vec<_> = edges.iter_mut().filter(|e| e.valid_from >= cutoff || e.valid_to.is_some_and(|t| t >= cutoff)).collect();
            let Some(e) = recs.choose_mut(rng) else { return false };
            if e.valid_from >= cutoff {
                e.amount *= rng.gen_range(0.1..5.0);
            } else {
                e.valid_to = Some(later(rng));
            }
            true
        }
        6 => {
            let loans: Vec<_> = contracts.iter().map(|c| (c.contract_id.clone(), c.borrower.clone())).collect();
            let (loan, borrower) = loans.choose(rng).unwrap().clone();
            let Some(g) = ents.iter().map(|e| e.id.clone()).filter(|id| *id != borrower).collect::<Vec<_>>().choose(rng).cloned() else { return false };
            let n = edges.len();
            edges.push(GuaranteeEdge {
                guarantor: g,
                borrower,
                amount: 1e6,
                contract_id: ContractId::new(format!("PROBE-G{n}")),
                loan_contract_id: loan,
                valid_from: later(rng),
                valid_to: None,
            });
            true
        }
        _ => {
            let id = ents.choose(rng).unwrap().id.clone();
            let start = later(rng);
            let cid = ContractId::new(format!("PROBE-L{}", contracts.len()));
            let installments: Vec<Installment> =
                (1..=6).map(|m| Installment { due_date: start + Duration::days(30 * m), due_amount: 10.0 }).collect();
            for i in &installments {
                repayments.push(RepaymentEvent {
                    contract_id: cid.clone(),
                    due_date: i.due_date,
                    due_amount: i.due_amount,
                    paid_date: None,
                    paid_amount: 0.0,
                    default_flag: true,
                });
            }
            contracts.push(LoanContract {
                contract_id: cid,
                borrower: id,
                loan_amount: 5e5,
                start_date: start,
                installments,
                capital_return: "probe".into(),
                interest_return: "probe".into(),
            });
            true
        }
    }
}

/// Mutates one to three records at or after a cutoff of window `t` and
/// checks that nothing fixed by that cutoff moved.
pub fn leakage_probe(
    net: &glens_core::GuaranteeNetwork,
    t: &glens_core::risk::WindowTuple,
    base: &WindowState,
    params: &glens_core::risk::RollingParams,
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let at_predict = rng.gen_bool(0.5);
    let cutoff = if at_predict { t.predict_cutoff() } else { t.train_cutoff() };
    let mut parts = net.clone().into_parts();
    let want = rng.gen_range(1..=3);
    let mut changed = 0;
    let mut mutated = net.clone();
    for _ in 0..200 {
        if mutate_after(&mut parts, cutoff, rng) {
            changed += 1;
        }
        if changed >= want {
            let (e, g, c, r) = parts.clone();
            mutated = glens_core::graph::build_network(e, g, c, r).map_err(|e| format!("probe built an invalid network: {e}"))?;
            if mutated.fingerprint() != net.fingerprint() {
                break;
            }
        }
    }
    if mutated.fingerprint() == net.fingerprint() {
        return Err("probe changed nothing".into());
    }
    let after = window_state(&mutated, t, params);
    if after.train_features != base.train_features {
        return Err(format!("window {}: training features moved (cutoff {cutoff})", t.index));
    }
    if at_predict {
        for (what, a, b) in [
            ("training set", &after.training_set, &base.training_set),
            ("model", &after.model, &base.model),
            ("scoring features", &after.predict_features, &base.predict_features),
        ] {
            if a != b {
                return Err(format!("window {}: {what} moved (cutoff {cutoff})", t.index));
            }
        }
    }
    Ok(())
}
