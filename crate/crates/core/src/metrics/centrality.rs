use std::collections::{BTreeMap, VecDeque};
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::exec::Exec;
use crate::graph::{EnterpriseId, SimpleGraph, Snapshot, ViewMode};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub hub: f64,
    pub authority: f64,
    pub pagerank: f64,
    pub kshell: u32,
    pub eigenvector: f64,
    pub betweenness: f64,
    pub closeness: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Hub,
    Authority,
    PageRank,
    KShell,
    Eigenvector,
    Betweenness,
    Closeness,
}

impl MetricKind {
    pub const ALL: [MetricKind; 7] = [
        MetricKind::Hub,
        MetricKind::Authority,
        MetricKind::PageRank,
        MetricKind::KShell,
        MetricKind::Eigenvector,
        MetricKind::Betweenness,
        MetricKind::Closeness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Hub => "hub",
            MetricKind::Authority => "authority",
            MetricKind::PageRank => "pagerank",
            MetricKind::KShell => "kshell",
            MetricKind::Eigenvector => "eigenvector",
            MetricKind::Betweenness => "betweenness",
            MetricKind::Closeness => "closeness",
        }
    }

    pub fn value(self, m: &NodeMetrics) -> f64 {
        match self {
            MetricKind::Hub => m.hub,
            MetricKind::Authority => m.authority,
            MetricKind::PageRank => m.pagerank,
            MetricKind::KShell => m.kshell as f64,
            MetricKind::Eigenvector => m.eigenvector,
            MetricKind::Betweenness => m.betweenness,
            MetricKind::Closeness => m.closeness,
        }
    }
}

impl FromStr for MetricKind {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| MetricsError::UnknownKind(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CentralityOptions {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub exec: Exec,
}

impl Default for CentralityOptions {
    fn default() -> Self {
        CentralityOptions { damping: 0.85, tolerance: 1e-10, max_iterations: 10_000, exec: Exec::default() }
    }
}

pub fn compute_centralities(snapshot: &Snapshot) -> Result<BTreeMap<EnterpriseId, NodeMetrics>, MetricsError> {
    compute_centralities_with(snapshot, &CentralityOptions::default())
}

/// All seven measures. HITS and PageRank use the directed view; the rest the
/// symmetrised one.
pub fn compute_centralities_with(
    snapshot: &Snapshot,
    opts: &CentralityOptions,
) -> Result<BTreeMap<EnterpriseId, NodeMetrics>, MetricsError> {
    if snapshot.is_empty() {
        return Err(MetricsError::EmptySnapshot);
    }
    let directed = snapshot.simple_view(ViewMode::Directed);
    let values = centralities_of(&directed, opts)?;
    Ok(directed.ids().iter().cloned().zip(values).collect())
}

/// Index-aligned metrics for a directed simple graph.
pub fn centralities_of(directed: &SimpleGraph, opts: &CentralityOptions) -> Result<Vec<NodeMetrics>, MetricsError> {
    let undirected = directed.to_undirected();
    let (hub, authority) = hits(directed, opts.tolerance, opts.max_iterations)?;
    let pr = pagerank(directed, opts.damping, opts.tolerance, opts.max_iterations)?;
    let ks = kshell(&undirected);
    let eig = eigenvector(&undirected, opts.tolerance, opts.max_iterations)?;
    let (bc, cc) = betweenness_closeness(&undirected, opts.exec);
    Ok((0..directed.node_count())
        .map(|i| NodeMetrics {
            hub: hub[i],
            authority: authority[i],
            pagerank: pr[i],
            kshell: ks[i],
            eigenvector: eig[i],
            betweenness: bc[i],
            closeness: cc[i],
        })
        .collect())
}

fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// PageRank over unweighted out-links; dangling mass spread uniformly.
pub fn pagerank(g: &SimpleGraph, damping: f64, tol: f64, max_iter: usize) -> Result<Vec<f64>, MetricsError> {
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    for _ in 0..max_iter {
        let dangling: f64 = (0..n).filter(|&u| g.successors(u).is_empty()).map(|u| x[u]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        let mut next = vec![base; n];
        for u in 0..n {
            let outs = g.successors(u);
            if !outs.is_empty() {
                let share = damping * x[u] / outs.len() as f64;
                for &(v, _) in outs {
                    next[v] += share;
                }
            }
        }
        let delta = l1_diff(&next, &x);
        x = next;
        if delta < tol {
            let s: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= s);
            return Ok(x);
        }
    }
    Err(MetricsError::ConvergenceFailure { metric: "pagerank", iterations: max_iter })
}

/// HITS hub and authority scores, each with unit L2 norm. An edgeless graph
/// yields all zeros.
pub fn hits(g: &SimpleGraph, tol: f64, max_iter: usize) -> Result<(Vec<f64>, Vec<f64>), MetricsError> {
    let n = g.node_count();
    if g.edge_count() == 0 {
        return Ok((vec![0.0; n], vec![0.0; n]));
    }
    let mut hub = vec![1.0 / (n as f64).sqrt(); n];
    let mut auth = vec![0.0; n];
    for _ in 0..max_iter {
        let mut a = vec![0.0; n];
        for (v, av) in a.iter_mut().enumerate() {
            *av = g.predecessors(v).iter().map(|&(u, _)| hub[u]).sum();
        }
        l2_normalize(&mut a);
        let mut h = vec![0.0; n];
        for (u, hu) in h.iter_mut().enumerate() {
            *hu = g.successors(u).iter().map(|&(v, _)| a[v]).sum();
        }
        l2_normalize(&mut h);
        let delta = l1_diff(&a, &auth) + l1_diff(&h, &hub);
        auth = a;
        hub = h;
        if delta < tol {
            return Ok((hub, auth));
        }
    }
    Err(MetricsError::ConvergenceFailure { metric: "hits", iterations: max_iter })
}

/// Eigenvector centrality (unit L2 norm) by power iteration on `A + I`,
/// which shares the leading eigenvector of `A` and does not oscillate on
/// bipartite graphs.
pub fn eigenvector(g: &SimpleGraph, tol: f64, max_iter: usize) -> Result<Vec<f64>, MetricsError> {
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..max_iter {
        let mut next = x.clone();
        for (u, nu) in next.iter_mut().enumerate() {
            *nu += g.successors(u).iter().map(|&(v, _)| x[v]).sum::<f64>();
        }
        l2_normalize(&mut next);
        let delta = l1_diff(&next, &x);
        x = next;
        if delta < tol {
            return Ok(x);
        }
    }
    Err(MetricsError::ConvergenceFailure { metric: "eigenvector", iterations: max_iter })
}

/// K-shell index by bucket peeling over undirected degrees.
pub fn kshell(g: &SimpleGraph) -> Vec<u32> {
    let n = g.node_count();
    let mut deg: Vec<usize> = (0..n).map(|u| g.degree(u)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for u in 0..n {
        buckets[deg[u]].push(u);
    }
    let mut removed = vec![false; n];
    let mut shell = vec![0u32; n];
    let mut k = 0usize;
    let mut remaining = n;
    let mut d = 0usize;
    while remaining > 0 {
        // Stale bucket entries are skipped when their degree no longer matches.
        while d <= max_deg && buckets[d].is_empty() {
            d += 1;
        }
        let u = buckets[d].pop().expect("non-empty bucket");
        if removed[u] || deg[u] != d {
            continue;
        }
        k = k.max(d);
        removed[u] = true;
        remaining -= 1;
        shell[u] = k as u32;
        for &(v, _) in g.successors(u) {
            if !removed[v] && deg[v] > 0 {
                deg[v] -= 1;
                buckets[deg[v]].push(v);
                if deg[v] < d {
                    d = deg[v];
                }
            }
        }
    }
    shell
}

const SOURCE_CHUNK: usize = 64;

/// Brandes betweenness (normalised by `(n-1)(n-2)/2`) and harmonic closeness
/// on an undirected unweighted view, parallel over blocks of source nodes.
pub fn betweenness_closeness(g: &SimpleGraph, exec: Exec) -> (Vec<f64>, Vec<f64>) {
    let n = g.node_count();
    let chunks = n.div_ceil(SOURCE_CHUNK);
    let partials = exec.map_range(chunks, |c| {
        let mut acc = vec![0.0; n];
        let mut close = Vec::with_capacity(SOURCE_CHUNK);
        let mut state = BrandesState::new(n);
        for s in c * SOURCE_CHUNK..((c + 1) * SOURCE_CHUNK).min(n) {
            close.push(state.run(g, s, &mut acc));
        }
        (acc, close)
    });
    let mut bc = vec![0.0; n];
    let mut cc = Vec::with_capacity(n);
    for (acc, close) in partials {
        for (b, a) in bc.iter_mut().zip(acc) {
            *b += a;
        }
        cc.extend(close);
    }
    let scale = if n > 2 { 1.0 / ((n - 1) as f64 * (n - 2) as f64) } else { 0.0 };
    bc.iter_mut().for_each(|b| *b *= scale);
    (bc, cc)
}

struct BrandesState {
    dist: Vec<i64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    queue: VecDeque<usize>,
}

impl BrandesState {
    fn new(n: usize) -> Self {
        BrandesState {
            dist: vec![-1; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            queue: VecDeque::new(),
        }
    }

    /// Adds source `s` dependencies into `acc`; returns the harmonic closeness of `s`.
    fn run(&mut self, g: &SimpleGraph, s: usize, acc: &mut [f64]) -> f64 {
        let n = g.node_count();
        self.dist.fill(-1);
        self.sigma.fill(0.0);
        self.delta.fill(0.0);
        self.order.clear();
        self.dist[s] = 0;
        self.sigma[s] = 1.0;
        self.queue.push_back(s);
        let mut harmonic = 0.0;
        while let Some(u) = self.queue.pop_front() {
            self.order.push(u);
            if u != s {
                harmonic += 1.0 / self.dist[u] as f64;
            }
            for &(v, _) in g.successors(u) {
                if self.dist[v] < 0 {
                    self.dist[v] = self.dist[u] + 1;
                    self.queue.push_back(v);
                }
                if self.dist[v] == self.dist[u] + 1 {
                    self.sigma[v] += self.sigma[u];
                }
            }
        }
        for &w in self.order.iter().rev() {
            for &(v, _) in g.successors(w) {
                if self.dist[v] == self.dist[w] - 1 {
                    self.delta[v] += self.sigma[v] / self.sigma[w] * (1.0 + self.delta[w]);
                }
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
        if n > 1 {
            harmonic / (n - 1) as f64
        } else {
            0.0
        }
    }
}

/// Delimited export: node id followed by the seven metric columns.
pub fn write_metrics_csv<W: Write>(metrics: &BTreeMap<EnterpriseId, NodeMetrics>, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["node_id"];
    header.extend(MetricKind::ALL.iter().map(|k| k.name()));
    w.write_record(&header)?;
    for (id, m) in metrics {
        let mut row = vec![id.to_string()];
        row.extend(MetricKind::ALL.iter().map(|k| k.value(m).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
