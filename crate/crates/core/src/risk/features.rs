//! Per-enterprise features at a cutoff date. Nothing dated on or after the
//! cutoff is read: profile, rating and deposit records must be dated before
//! it, repayments count only if due before it (with payments dated before
//! it), and network measures come from the snapshot of the previous day.

use std::collections::BTreeMap;

use chrono::Months;
use serde::{Deserialize, Serialize};

use super::windows::DateInterval;
use super::RiskError;
use crate::graph::{Date, EnterpriseId, GuaranteeNetwork, LoanContract, Snapshot};
use crate::metrics::{compute_centralities_with, CentralityOptions, MetricKind, NodeMetrics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    BasicProfile,
    CreditBehavior,
    ActiveLoan,
    NetworkStructure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub name: &'static str,
    pub group: FeatureGroup,
    pub categorical: bool,
}

const fn num(name: &'static str, group: FeatureGroup) -> FeatureSpec {
    FeatureSpec { name, group, categorical: false }
}

const fn cat(name: &'static str, group: FeatureGroup) -> FeatureSpec {
    FeatureSpec { name, group, categorical: true }
}

use FeatureGroup::*;

pub const FEATURES: [FeatureSpec; 25] = [
    cat("business_nature", BasicProfile),
    num("registered_capital", BasicProfile),
    cat("enterprise_scale", BasicProfile),
    num("employee_count", BasicProfile),
    cat("sector", BasicProfile),
    cat("guarantor_type", BasicProfile),
    num("credit_rating", BasicProfile),
    num("deposit_balance", BasicProfile),
    num("deposit_change_3m", BasicProfile),
    num("default_count", CreditBehavior),
    num("default_amount", CreditBehavior),
    num("total_loan_amount", CreditBehavior),
    num("loan_count", CreditBehavior),
    num("default_rate", CreditBehavior),
    num("active_amount", ActiveLoan),
    num("active_count", ActiveLoan),
    cat("capital_return", ActiveLoan),
    cat("interest_return", ActiveLoan),
    num("hub", NetworkStructure),
    num("authority", NetworkStructure),
    num("pagerank", NetworkStructure),
    num("kshell", NetworkStructure),
    num("eigenvector", NetworkStructure),
    num("betweenness", NetworkStructure),
    num("closeness", NetworkStructure),
];

pub fn feature_names() -> Vec<&'static str> {
    FEATURES.iter().map(|f| f.name).collect()
}

/// Raw features aligned with [`FEATURES`]: numeric slots in `values`,
/// categorical slots in `categories`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub enterprise: EnterpriseId,
    pub cutoff: Date,
    pub values: Vec<Option<f64>>,
    pub categories: Vec<Option<String>>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURES.iter().position(|f| f.name == name).and_then(|i| self.values[i])
    }

    pub fn category(&self, name: &str) -> Option<&str> {
        FEATURES.iter().position(|f| f.name == name).and_then(|i| self.categories[i].as_deref())
    }
}

/// Known before `cutoff`: started before it and not yet matured.
pub fn is_active_loan(c: &LoanContract, cutoff: Date) -> bool {
    c.start_date < cutoff && c.maturity() >= cutoff
}

/// Enterprises with an active loan at `cutoff`, in id order.
pub fn active_population(network: &GuaranteeNetwork, cutoff: Date) -> Vec<EnterpriseId> {
    network
        .enterprises
        .keys()
        .filter(|id| network.contracts_of(id).any(|c| is_active_loan(c, cutoff)))
        .cloned()
        .collect()
}

/// True iff an installment due in `window` was unpaid, or paid more than
/// `grace_days` late, as known before the window closes.
pub fn label_defaults(network: &GuaranteeNetwork, enterprise: &EnterpriseId, window: DateInterval, grace_days: i64) -> bool {
    network.contracts_of(enterprise).any(|c| {
        network
            .repayments_of(&c.contract_id)
            .any(|r| window.contains(r.due_date) && r.is_default_as_of(grace_days, window.end))
    })
}

/// Network measures at the day before `cutoff`; `None` when the snapshot is
/// empty or a measure fails to converge.
pub fn network_metrics_before(network: &GuaranteeNetwork, cutoff: Date) -> Option<BTreeMap<EnterpriseId, NodeMetrics>> {
    let day = cutoff.pred_opt()?;
    let snap = Snapshot::at(network, day);
    compute_centralities_with(&snap, &CentralityOptions::default()).ok()
}

pub fn extract_features(
    network: &GuaranteeNetwork,
    enterprise: &EnterpriseId,
    cutoff: Date,
    grace_days: i64,
    metrics: Option<&NodeMetrics>,
) -> Result<FeatureVector, RiskError> {
    let ent = network.enterprise(enterprise).ok_or_else(|| RiskError::UnknownEnterprise(enterprise.to_string()))?;
    let contracts: Vec<&LoanContract> = network.contracts_of(enterprise).filter(|c| c.start_date < cutoff).collect();
    let active: Vec<&&LoanContract> = contracts.iter().filter(|c| c.maturity() >= cutoff).collect();
    if active.is_empty() {
        return Err(RiskError::NoActiveLoan(enterprise.to_string()));
    }
    let mut values = vec![None; FEATURES.len()];
    let mut categories = vec![None; FEATURES.len()];
    let mut set = |name: &str, v: Option<f64>| values[FEATURES.iter().position(|f| f.name == name).unwrap()] = v;

    let profile = ent.profile_before(cutoff);
    set("registered_capital", profile.map(|p| p.registered_capital));
    set("employee_count", profile.map(|p| p.employee_count as f64));
    set("credit_rating", ent.rating_before(cutoff).map(f64::from));
    let last_day = cutoff.pred_opt().unwrap_or(cutoff);
    let deposit_now = ent.deposit_on(last_day);
    let deposit_then = last_day.checked_sub_months(Months::new(3)).and_then(|d| ent.deposit_on(d));
    set("deposit_balance", deposit_now);
    set(
        "deposit_change_3m",
        match (deposit_now, deposit_then) {
            (Some(a), Some(b)) if b > 0.0 => Some((a - b) / b),
            _ => None,
        },
    );

    let (mut defaults, mut default_amount, mut due_count) = (0usize, 0.0, 0usize);
    for c in &contracts {
        for r in network.repayments_of(&c.contract_id).filter(|r| r.due_date < cutoff) {
            due_count += 1;
            if r.is_default_as_of(grace_days, cutoff) {
                defaults += 1;
                default_amount += r.due_amount;
            }
        }
    }
    set("default_count", Some(defaults as f64));
    set("default_amount", Some(default_amount));
    set("total_loan_amount", Some(contracts.iter().map(|c| c.loan_amount).sum()));
    set("loan_count", Some(contracts.len() as f64));
    set("default_rate", Some(if due_count > 0 { defaults as f64 / due_count as f64 } else { 0.0 }));
    set("active_amount", Some(active.iter().map(|c| c.loan_amount).sum()));
    set("active_count", Some(active.len() as f64));

    for kind in MetricKind::ALL {
        set(kind.name(), metrics.map(|m| kind.value(m)));
    }

    let mut put = |name: &str, v: Option<String>| categories[FEATURES.iter().position(|f| f.name == name).unwrap()] = v;
    put("business_nature", profile.map(|p| p.business_nature.clone()));
    put("enterprise_scale", profile.map(|p| p.enterprise_scale.clone()));
    put("sector", profile.map(|p| p.sector.clone()));
    // The guarantor type carries no date of its own; it is used once the
    // enterprise has any profile on record before the cutoff.
    put("guarantor_type", profile.and(ent.guarantor_type.clone()));
    let latest = active.iter().max_by_key(|c| (c.start_date, c.contract_id.clone())).unwrap();
    put("capital_return", Some(latest.capital_return.clone()));
    put("interest_return", Some(latest.interest_return.clone()));

    Ok(FeatureVector { enterprise: enterprise.clone(), cutoff, values, categories })
}

/// Category → code dictionaries, built from training rows only. Unseen
/// categories encode as missing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryEncoder {
    pub codes: BTreeMap<String, BTreeMap<String, u32>>,
}

impl CategoryEncoder {
    pub fn fit(rows: &[FeatureVector]) -> CategoryEncoder {
        let mut codes: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
        for (i, f) in FEATURES.iter().enumerate().filter(|(_, f)| f.categorical) {
            let mut seen: Vec<&str> = rows.iter().filter_map(|r| r.categories[i].as_deref()).collect();
            seen.sort_unstable();
            seen.dedup();
            codes.insert(f.name.to_string(), seen.into_iter().enumerate().map(|(k, s)| (s.to_string(), k as u32)).collect());
        }
        CategoryEncoder { codes }
    }

    pub fn encode(&self, row: &FeatureVector) -> Vec<Option<f64>> {
        FEATURES
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if f.categorical {
                    let dict = self.codes.get(f.name)?;
                    row.categories[i].as_ref().and_then(|s| dict.get(s)).map(|&c| c as f64)
                } else {
                    row.values[i]
                }
            })
            .collect()
    }
}
