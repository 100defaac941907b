use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::tables::TableSet;

/// Corpus-level counts. The default rate is given against repayments and
/// against contracts; a rate is absent when its denominator is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverallStats {
    pub customer_count: usize,
    pub guarantee_relation_count: usize,
    pub contract_count: usize,
    pub repayment_count: usize,
    /// Installments flagged as defaulted.
    pub default_count: usize,
    /// Contracts with at least one flagged installment.
    pub defaulted_contract_count: usize,
    /// `default_count / repayment_count`, four significant digits.
    pub default_rate_by_repayments: Option<f64>,
    /// `defaulted_contract_count / contract_count`, four significant digits.
    pub default_rate_by_contracts: Option<f64>,
}

pub fn round_significant(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

pub fn overall_stats(tables: &TableSet) -> OverallStats {
    let customers: BTreeSet<&str> = tables.customer_profile.iter().map(|r| r.customer_id.as_str()).collect();
    let flagged: Vec<_> = tables.default_status.iter().filter(|r| r.default_flag).collect();
    let bad_contracts: BTreeSet<&str> = flagged.iter().map(|r| r.contract_id.as_str()).collect();
    let rate = |num: usize, den: usize| (den > 0).then(|| round_significant(num as f64 / den as f64, 4));
    OverallStats {
        customer_count: customers.len(),
        guarantee_relation_count: tables.guarantee_relationship.len(),
        contract_count: tables.loan_contract.len(),
        repayment_count: tables.repayment_status.len(),
        default_count: flagged.len(),
        defaulted_contract_count: bad_contracts.len(),
        default_rate_by_repayments: rate(flagged.len(), tables.repayment_status.len()),
        default_rate_by_contracts: rate(bad_contracts.len(), tables.loan_contract.len()),
    }
}
