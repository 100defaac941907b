use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{active_population, extract_features, feature_names, label_defaults, network_metrics_before, CategoryEncoder, FeatureVector};
use super::gbdt::{train, BoostParams, BoostedModel};
use super::windows::{WindowPlan, WindowTuple};
use super::RiskError;
use crate::control::RunControl;
use crate::exec::Exec;
use crate::graph::{Date, EnterpriseId, GuaranteeNetwork};
use crate::metrics::RiskScore;

pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RollingParams {
    pub boost: BoostParams,
    /// Days after the due date before a late payment counts as a default.
    pub grace_days: i64,
    /// Permute training labels with this seed (null-signal control).
    pub shuffle_seed: Option<u64>,
    #[serde(skip)]
    pub exec: Exec,
}

/// Features and labels one window's model is fitted on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub window: WindowTuple,
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<bool>,
}

impl TrainingSet {
    pub fn fingerprint(&self) -> String {
        crate::fingerprint::of(self)
    }
}

/// Features at `cutoff` for every enterprise with an active loan then.
pub fn features_at(network: &GuaranteeNetwork, cutoff: Date, grace_days: i64) -> Vec<FeatureVector> {
    let metrics = network_metrics_before(network, cutoff);
    active_population(network, cutoff)
        .iter()
        .map(|id| {
            let m = metrics.as_ref().and_then(|m| m.get(id));
            extract_features(network, id, cutoff, grace_days, m).expect("population has active loans")
        })
        .collect()
}

pub fn training_set(network: &GuaranteeNetwork, window: &WindowTuple, grace_days: i64) -> TrainingSet {
    let rows = features_at(network, window.train_cutoff(), grace_days);
    let labels = rows.iter().map(|r| label_defaults(network, &r.enterprise, window.observe, grace_days)).collect();
    TrainingSet { window: *window, rows, labels }
}

/// A fitted window model as exported: trees plus the frozen encoders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowModel {
    pub version: u32,
    pub window: WindowTuple,
    pub feature_names: Vec<String>,
    pub encoder: CategoryEncoder,
    pub booster: BoostedModel,
    pub training_fingerprint: String,
}

impl WindowModel {
    pub fn fingerprint(&self) -> String {
        crate::fingerprint::of(self)
    }

    pub fn predict(&self, rows: &[FeatureVector]) -> Result<Vec<f64>, RiskError> {
        let x: Vec<Vec<Option<f64>>> = rows.iter().map(|r| self.encoder.encode(r)).collect();
        self.booster.predict(&x)
    }
}

pub fn fit_window(set: &TrainingSet, params: &RollingParams) -> Result<WindowModel, RiskError> {
    let mut labels = set.labels.clone();
    if let Some(seed) = params.shuffle_seed {
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ set.window.index as u64));
    }
    let encoder = CategoryEncoder::fit(&set.rows);
    let x: Vec<Vec<Option<f64>>> = set.rows.iter().map(|r| encoder.encode(r)).collect();
    let booster = train(&x, &labels, &params.boost)?;
    Ok(WindowModel {
        version: MODEL_VERSION,
        window: set.window,
        feature_names: feature_names().into_iter().map(String::from).collect(),
        encoder,
        booster,
        training_fingerprint: set.fingerprint(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub window: usize,
    /// Absent when the evaluated population has a single class.
    pub auc: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
    pub population: usize,
}

/// Area under the ROC curve by the rank-sum formula, ties counted half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += idx[i..=j].iter().filter(|&&k| labels[k]).count() as f64 * mid;
        i = j + 1;
    }
    Some((rank_sum - (pos * (pos + 1)) as f64 / 2.0) / (pos * neg) as f64)
}

pub fn evaluate(window: usize, probabilities: &[f64], labels: &[bool]) -> EvaluationReport {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &l) in probabilities.iter().zip(labels) {
        match (p >= 0.5, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    EvaluationReport {
        window,
        auc: auc(probabilities, labels),
        precision: (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64),
        recall: (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64),
        true_positive: tp,
        false_positive: fp,
        true_negative: tn,
        false_negative: fn_,
        population: probabilities.len(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RollingResult {
    pub scores: Vec<RiskScore>,
    pub reports: Vec<EvaluationReport>,
    /// Window index → fitted model fingerprint.
    pub model_fingerprints: BTreeMap<usize, String>,
    pub warnings: Vec<String>,
    pub cancelled: bool,
}

impl RollingResult {
    /// Mean AUC over windows where it is defined.
    pub fn mean_auc(&self) -> Option<f64> {
        let aucs: Vec<f64> = self.reports.iter().filter_map(|r| r.auc).collect();
        (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64)
    }
}

struct WindowOutcome {
    scores: Vec<RiskScore>,
    report: Option<EvaluationReport>,
    fingerprint: Option<String>,
    warning: Option<String>,
}

fn run_window(network: &GuaranteeNetwork, t: &WindowTuple, params: &RollingParams) -> WindowOutcome {
    let set = training_set(network, t, params.grace_days);
    let model = match fit_window(&set, params) {
        Ok(m) => m,
        Err(e) => {
            return WindowOutcome {
                scores: Vec::new(),
                report: None,
                fingerprint: None,
                warning: Some(format!("window {} skipped: {e}", t.index)),
            }
        }
    };
    let rows = features_at(network, t.predict_cutoff(), params.grace_days);
    let probs = model.predict(&rows).expect("schema fixed by feature table");
    let truth: Vec<bool> =
        rows.iter().map(|r| label_defaults(network, &r.enterprise, t.evaluate, params.grace_days)).collect();
    let scores = rows
        .iter()
        .zip(&probs)
        .map(|(r, &p)| RiskScore { enterprise: r.enterprise.clone(), window_end: t.predict.end, probability: p })
        .collect();
    WindowOutcome {
        scores,
        report: Some(evaluate(t.index, &probs, &truth)),
        fingerprint: Some(model.fingerprint()),
        warning: None,
    }
}

pub fn rolling_predict(network: &GuaranteeNetwork, plan: &WindowPlan, params: &RollingParams) -> RollingResult {
    rolling_predict_with(network, plan, params, None)
}

/// Windows run independently (in parallel under [`Exec::Parallel`]); a
/// cancelled run keeps the windows finished so far.
pub fn rolling_predict_with(
    network: &GuaranteeNetwork,
    plan: &WindowPlan,
    params: &RollingParams,
    ctrl: Option<&RunControl>,
) -> RollingResult {
    let total = plan.tuples.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let outcomes = params.exec.map(&plan.tuples, |t| {
        if ctrl.is_some_and(|c| c.is_cancelled()) {
            return None;
        }
        let out = run_window(network, t, params);
        let finished = done.fetch_add(1, std::sync::atomic::Ordering::SeqCst) + 1;
        if let Some(c) = ctrl {
            c.report(finished, total);
        }
        Some(out)
    });
    let mut result = RollingResult::default();
    for (t, out) in plan.tuples.iter().zip(outcomes) {
        let Some(out) = out else {
            result.cancelled = true;
            continue;
        };
        result.scores.extend(out.scores);
        result.reports.extend(out.report);
        if let Some(fp) = out.fingerprint {
            result.model_fingerprints.insert(t.index, fp);
        }
        result.warnings.extend(out.warning);
    }
    result
}

/// Enterprises in a window's training population, for probes and reports.
pub fn training_population(network: &GuaranteeNetwork, window: &WindowTuple) -> Vec<EnterpriseId> {
    active_population(network, window.train_cutoff())
}
