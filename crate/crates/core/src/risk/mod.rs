//! Default-risk prediction under a rolling window protocol.

mod features;
mod gbdt;
mod rolling;
mod windows;

pub use features::{
    active_population, extract_features, feature_names, is_active_loan, label_defaults, network_metrics_before,
    CategoryEncoder, FeatureGroup, FeatureSpec, FeatureVector, FEATURES,
};
pub use gbdt::{sigmoid, train, BoostParams, BoostedModel, Tree, TreeNode};
pub use rolling::{
    auc, evaluate, features_at, fit_window, rolling_predict, rolling_predict_with, training_population, training_set,
    EvaluationReport, RollingParams, RollingResult, TrainingSet, WindowModel, MODEL_VERSION,
};
pub use windows::{build_windows, DateInterval, WindowPlan, WindowTuple};

use thiserror::Error;

use crate::graph::Date;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("span {from}..{to} holds no complete window tuple")]
    SpanTooShort { from: Date, to: Date },
    #[error("window width {width_months} and stride {stride_months} must be positive")]
    InvalidWindow { width_months: u32, stride_months: u32 },
    #[error("enterprise {0} has no active loan at the cutoff")]
    NoActiveLoan(String),
    #[error("unknown enterprise {0}")]
    UnknownEnterprise(String),
    #[error("training labels need both classes ({positives} positive, {negatives} negative)")]
    DegenerateLabels { positives: usize, negatives: usize },
    #[error("expected {expected} features, got {got}")]
    SchemaMismatch { expected: usize, got: usize },
}

impl RiskError {
    pub fn code(&self) -> &'static str {
        match self {
            RiskError::SpanTooShort { .. } => "SpanTooShort",
            RiskError::InvalidWindow { .. } => "InvalidWindow",
            RiskError::NoActiveLoan(_) => "NoActiveLoan",
            RiskError::UnknownEnterprise(_) => "UnknownEnterprise",
            RiskError::DegenerateLabels { .. } => "DegenerateLabels",
            RiskError::SchemaMismatch { .. } => "SchemaMismatch",
        }
    }
}
