//! Second-order gradient boosted trees with logistic loss.

use serde::{Deserialize, Serialize};

use super::RiskError;
use crate::exec::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Penalty per leaf.
    pub gamma: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum hessian sum on each side of a split.
    pub min_child_weight: f64,
    /// Weight of positive rows; `None` uses negatives / positives.
    pub positive_weight: Option<f64>,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            gamma: 0.0,
            lambda: 1.0,
            min_child_weight: 1.0,
            positive_weight: None,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf { weight: f64 },
    Split { feature: usize, threshold: f64, default_left: bool, left: usize, right: usize },
}

/// Nodes in creation order; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn score(&self, row: &[Option<f64>]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { weight } => return weight,
                TreeNode::Split { feature, threshold, default_left, left, right } => {
                    i = match row[feature] {
                        Some(v) if v < threshold => left,
                        Some(_) => right,
                        None if default_left => left,
                        None => right,
                    };
                }
            }
        }
    }

    pub fn leaf_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf { weight } => Some(*weight),
            _ => None,
        })
    }

    fn penalty(&self, gamma: f64, lambda: f64) -> f64 {
        self.leaf_weights().map(|w| gamma + 0.5 * lambda * w * w).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub n_features: usize,
    pub params: BoostParams,
    pub positive_weight: f64,
    pub trees: Vec<Tree>,
    /// Regularized training objective before any tree and after each one.
    pub objective: Vec<f64>,
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl BoostedModel {
    pub fn margin(&self, row: &[Option<f64>]) -> f64 {
        self.trees.iter().map(|t| t.score(row)).sum()
    }

    pub fn predict_one(&self, row: &[Option<f64>]) -> Result<f64, RiskError> {
        if row.len() != self.n_features {
            return Err(RiskError::SchemaMismatch { expected: self.n_features, got: row.len() });
        }
        Ok(sigmoid(self.margin(row)))
    }

    pub fn predict(&self, rows: &[Vec<Option<f64>>]) -> Result<Vec<f64>, RiskError> {
        rows.iter().map(|r| self.predict_one(r)).collect()
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint::of(self)
    }
}

/// Weighted logistic loss at margins `f`.
fn loss(f: &[f64], y: &[bool], w: &[f64]) -> f64 {
    f.iter()
        .zip(y)
        .zip(w)
        .map(|((&m, &yi), &wi)| {
            // log(1 + e^m) - y m, evaluated stably.
            let softplus = if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
            wi * (softplus - if yi { m } else { 0.0 })
        })
        .sum()
}

/// Halvings of a tree's weights tried before giving up on a round.
const BACKTRACK_STEPS: usize = 30;

/// Fits `params.n_trees` rounds. Each round must lower the regularized
/// objective; a tree that does not is shrunk by halving, and boosting stops
/// early if even a tiny step fails.
pub fn train(x: &[Vec<Option<f64>>], y: &[bool], params: &BoostParams) -> Result<BoostedModel, RiskError> {
    let n_features = x.first().map_or(0, |r| r.len());
    if let Some(r) = x.iter().find(|r| r.len() != n_features) {
        return Err(RiskError::SchemaMismatch { expected: n_features, got: r.len() });
    }
    if x.len() != y.len() {
        return Err(RiskError::SchemaMismatch { expected: x.len(), got: y.len() });
    }
    let pos = y.iter().filter(|&&v| v).count();
    let neg = y.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(RiskError::DegenerateLabels { positives: pos, negatives: neg });
    }
    let positive_weight = params.positive_weight.unwrap_or(neg as f64 / pos as f64);
    let w: Vec<f64> = y.iter().map(|&v| if v { positive_weight } else { 1.0 }).collect();
    let sorted = Sorted::new(x, n_features);

    let mut margin = vec![0.0; x.len()];
    let mut penalty = 0.0;
    let mut objective = vec![loss(&margin, y, &w)];
    let mut trees = Vec::new();
    for _ in 0..params.n_trees {
        let (g, h): (Vec<f64>, Vec<f64>) = margin
            .iter()
            .zip(y)
            .zip(&w)
            .map(|((&m, &yi), &wi)| {
                let p = sigmoid(m);
                (wi * (p - yi as u8 as f64), wi * p * (1.0 - p))
            })
            .unzip();
        let mut tree = grow(x, &sorted, &g, &h, params);
        let before = *objective.last().unwrap();
        let mut accepted = None;
        for _ in 0..=BACKTRACK_STEPS {
            let trial: Vec<f64> = margin.iter().zip(x).map(|(&m, r)| m + tree.score(r)).collect();
            let obj = loss(&trial, y, &w) + penalty + tree.penalty(params.gamma, params.lambda);
            if obj <= before {
                accepted = Some((trial, obj));
                break;
            }
            for n in &mut tree.nodes {
                if let TreeNode::Leaf { weight } = n {
                    *weight *= 0.5;
                }
            }
        }
        let Some((trial, obj)) = accepted else { break };
        penalty += tree.penalty(params.gamma, params.lambda);
        margin = trial;
        objective.push(obj);
        trees.push(tree);
    }
    Ok(BoostedModel { n_features, params: *params, positive_weight, trees, objective })
}

/// Row indices with a present value, sorted by value, per feature.
struct Sorted {
    order: Vec<Vec<usize>>,
}

impl Sorted {
    fn new(x: &[Vec<Option<f64>>], n_features: usize) -> Sorted {
        let order = (0..n_features)
            .map(|f| {
                let mut idx: Vec<usize> = (0..x.len()).filter(|&i| x[i][f].is_some_and(f64::is_finite)).collect();
                idx.sort_by(|&a, &b| x[a][f].unwrap().total_cmp(&x[b][f].unwrap()).then(a.cmp(&b)));
                idx
            })
            .collect();
        Sorted { order }
    }
}

#[derive(Clone, Copy, Debug)]
struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
    default_left: bool,
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

fn leaf_value(g: f64, h: f64, params: &BoostParams) -> f64 {
    let denom = h + params.lambda;
    if denom > 0.0 {
        -params.learning_rate * g / denom
    } else {
        0.0
    }
}

fn grow(x: &[Vec<Option<f64>>], sorted: &Sorted, g: &[f64], h: &[f64], params: &BoostParams) -> Tree {
    let mut tree = Tree { nodes: Vec::new() };
    let all: Vec<usize> = (0..x.len()).collect();
    build(x, sorted, g, h, params, &all, 0, &mut tree);
    tree
}

#[allow(clippy::too_many_arguments)]
fn build(
    x: &[Vec<Option<f64>>],
    sorted: &Sorted,
    g: &[f64],
    h: &[f64],
    params: &BoostParams,
    rows: &[usize],
    depth: usize,
    tree: &mut Tree,
) -> usize {
    let id = tree.nodes.len();
    let gs: f64 = rows.iter().map(|&i| g[i]).sum();
    let hs: f64 = rows.iter().map(|&i| h[i]).sum();
    tree.nodes.push(TreeNode::Leaf { weight: leaf_value(gs, hs, params) });
    if depth >= params.max_depth || rows.len() < 2 {
        return id;
    }
    let Some(best) = best_split(x, sorted, g, h, params, rows, gs, hs) else { return id };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| match x[i][best.feature] {
        Some(v) if v.is_finite() => v < best.threshold,
        _ => best.default_left,
    });
    let left = build(x, sorted, g, h, params, &left_rows, depth + 1, tree);
    let right = build(x, sorted, g, h, params, &right_rows, depth + 1, tree);
    tree.nodes[id] = TreeNode::Split {
        feature: best.feature,
        threshold: best.threshold,
        default_left: best.default_left,
        left,
        right,
    };
    id
}

/// Exact greedy search; ties keep the lowest feature, then the lowest
/// threshold, then missing values sent right.
#[allow(clippy::too_many_arguments)]
fn best_split(
    x: &[Vec<Option<f64>>],
    sorted: &Sorted,
    g: &[f64],
    h: &[f64],
    params: &BoostParams,
    rows: &[usize],
    gs: f64,
    hs: f64,
) -> Option<BestSplit> {
    let mut member = vec![false; x.len()];
    for &i in rows {
        member[i] = true;
    }
    let lambda = params.lambda;
    let parent = score(gs, hs, lambda);
    let per_feature = params.exec.map_range(sorted.order.len(), |f| {
        let present: Vec<usize> = sorted.order[f].iter().copied().filter(|&i| member[i]).collect();
        let (gp, hp): (f64, f64) = present.iter().fold((0.0, 0.0), |(a, b), &i| (a + g[i], b + h[i]));
        let (gm, hm) = (gs - gp, hs - hp);
        let mut best: Option<BestSplit> = None;
        let (mut gl, mut hl) = (0.0, 0.0);
        for k in 0..present.len().saturating_sub(1) {
            let i = present[k];
            gl += g[i];
            hl += h[i];
            let (a, b) = (x[i][f].unwrap(), x[present[k + 1]][f].unwrap());
            if a == b {
                continue;
            }
            let threshold = a + (b - a) / 2.0;
            for default_left in [false, true] {
                let (gl2, hl2) = if default_left { (gl + gm, hl + hm) } else { (gl, hl) };
                let (gr2, hr2) = (gs - gl2, hs - hl2);
                if hl2 < params.min_child_weight || hr2 < params.min_child_weight {
                    continue;
                }
                let gain = 0.5 * (score(gl2, hl2, lambda) + score(gr2, hr2, lambda) - parent) - params.gamma;
                if gain > 0.0 && best.is_none_or(|bs| gain > bs.gain) {
                    best = Some(BestSplit { gain, feature: f, threshold, default_left });
                }
            }
        }
        best
    });
    per_feature.into_iter().flatten().fold(None, |acc: Option<BestSplit>, s| match acc {
        Some(a) if a.gain >= s.gain => Some(a),
        _ => Some(s),
    })
}
