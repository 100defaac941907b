//! Per-firm loan and default totals shared by community and motif statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::{Date, EnterpriseId, GuaranteeNetwork};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FirmFinancials {
    /// Sum of loan amounts of the firm's contracts in the span.
    pub loan_total: f64,
    /// Sum of loan amounts of contracts with at least one default event.
    pub default_total: f64,
    /// Any default event in the firm's repayment history within the span.
    pub defaulted: bool,
}

/// Loan and default totals for every firm.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FinancialLedger {
    firms: BTreeMap<EnterpriseId, FirmFinancials>,
}

impl FinancialLedger {
    /// Totals over contracts overlapping `span` (inclusive); `None` uses all history.
    pub fn from_network(network: &GuaranteeNetwork, span: Option<(Date, Date)>, grace_days: i64) -> Self {
        let mut firms: BTreeMap<EnterpriseId, FirmFinancials> =
            network.enterprises.keys().map(|id| (id.clone(), FirmFinancials::default())).collect();
        for c in network.contracts.values() {
            if let Some((from, to)) = span {
                if c.start_date > to || c.maturity() < from {
                    continue;
                }
            }
            let defaulted = network.repayments_of(&c.contract_id).any(|r| {
                span.is_none_or(|(from, to)| from <= r.due_date && r.due_date <= to) && r.is_default(grace_days)
            });
            let f = firms.entry(c.borrower.clone()).or_default();
            f.loan_total += c.loan_amount;
            if defaulted {
                f.default_total += c.loan_amount;
                f.defaulted = true;
            }
        }
        FinancialLedger { firms }
    }

    pub fn from_map(firms: BTreeMap<EnterpriseId, FirmFinancials>) -> Self {
        FinancialLedger { firms }
    }

    /// Zero totals for unknown firms.
    pub fn get(&self, id: &EnterpriseId) -> FirmFinancials {
        self.firms.get(id).copied().unwrap_or_default()
    }

    pub fn is_defaulted(&self, id: &EnterpriseId) -> bool {
        self.get(id).defaulted
    }

    pub fn defaulted(&self) -> BTreeSet<EnterpriseId> {
        self.firms.iter().filter(|(_, f)| f.defaulted).map(|(id, _)| id.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EnterpriseId, &FirmFinancials)> {
        self.firms.iter()
    }
}

/// Whole-percent value rounded half-up, as shown in the summary tables.
pub fn percent_half_up(ratio: f64) -> u32 {
    // The small epsilon absorbs representation error such as 0.285 * 100 = 28.499999.
    (ratio * 100.0 + 0.5 + 1e-9).floor() as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up_rounding() {
        assert_eq!(percent_half_up(14.0 / 44.0), 32);
        assert_eq!(percent_half_up(733.0 / 1071.0), 68);
        assert_eq!(percent_half_up(0.125), 13);
        assert_eq!(percent_half_up(0.0), 0);
        assert_eq!(percent_half_up(1.0), 100);
    }
}
