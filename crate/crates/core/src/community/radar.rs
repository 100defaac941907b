//! Six-axis financial profile per community.

use std::collections::BTreeMap;

use chrono::Months;
use serde::{Deserialize, Serialize};

use super::partition::{CommunityId, Partition};
use crate::financials::FinancialLedger;
use crate::graph::{EnterpriseId, GuaranteeNetwork, Snapshot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadarAxis {
    Defaults,
    LoanToCapital,
    DepositLoss,
    SectorConcentration,
    GuaranteeToCapital,
    CreditRating,
}

impl RadarAxis {
    pub const ALL: [RadarAxis; 6] = [
        RadarAxis::Defaults,
        RadarAxis::LoanToCapital,
        RadarAxis::DepositLoss,
        RadarAxis::SectorConcentration,
        RadarAxis::GuaranteeToCapital,
        RadarAxis::CreditRating,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarProfile {
    pub community: CommunityId,
    /// Raw values in [`RadarAxis::ALL`] order.
    pub raw: [f64; 6],
    /// Each axis divided by its maximum over the partition.
    pub normalized: [f64; 6],
}

impl RadarProfile {
    pub fn raw_of(&self, axis: RadarAxis) -> f64 {
        self.raw[axis as usize]
    }

    pub fn normalized_of(&self, axis: RadarAxis) -> f64 {
        self.normalized[axis as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarReport {
    pub profiles: Vec<RadarProfile>,
    /// Firms left out of capital, sector or rating axes for lack of records.
    pub missing_financials: Vec<EnterpriseId>,
}

impl RadarReport {
    pub fn profile(&self, c: CommunityId) -> Option<&RadarProfile> {
        self.profiles.iter().find(|p| p.community == c)
    }
}

/// Profiles as of the snapshot date. Loan and guarantee amounts are divided
/// by registered capital; deposit loss is the relative fall of the summed
/// deposit balance over the trailing year (zero when it rose).
pub fn radar_profiles(
    partition: &Partition,
    snapshot: &Snapshot,
    network: &GuaranteeNetwork,
    ledger: &FinancialLedger,
) -> RadarReport {
    let as_of = snapshot.as_of;
    let after = as_of.succ_opt().unwrap_or(as_of);
    let year_ago = as_of.checked_sub_months(Months::new(12)).unwrap_or(as_of);
    let mut guaranteed: BTreeMap<&EnterpriseId, f64> = BTreeMap::new();
    for e in &snapshot.edges {
        *guaranteed.entry(&e.guarantor).or_default() += e.amount;
    }

    let mut missing = Vec::new();
    let mut profiles = Vec::new();
    for (c, members) in partition.communities() {
        let (mut defaults, mut loans, mut capital, mut given) = (0usize, 0.0, 0.0, 0.0);
        let (mut dep_now, mut dep_before) = (0.0, 0.0);
        let mut sectors: BTreeMap<&str, usize> = BTreeMap::new();
        let (mut rating_sum, mut rated) = (0.0, 0usize);
        for id in &members {
            let f = ledger.get(id);
            defaults += f.defaulted as usize;
            let Some(ent) = network.enterprise(id) else {
                missing.push(id.clone());
                continue;
            };
            match ent.profile_before(after) {
                Some(p) if p.registered_capital > 0.0 => {
                    capital += p.registered_capital;
                    loans += f.loan_total;
                    given += guaranteed.get(id).copied().unwrap_or(0.0);
                    *sectors.entry(p.sector.as_str()).or_default() += 1;
                }
                _ => missing.push(id.clone()),
            }
            if let Some(r) = ent.rating_before(after) {
                rating_sum += r as f64;
                rated += 1;
            }
            dep_now += ent.deposit_on(as_of).unwrap_or(0.0);
            dep_before += ent.deposit_on(year_ago).unwrap_or(0.0);
        }
        let profiled: usize = sectors.values().sum();
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        let raw = [
            defaults as f64 / members.len() as f64,
            ratio(loans, capital),
            ratio(dep_before - dep_now, dep_before).max(0.0),
            ratio(sectors.values().copied().max().unwrap_or(0) as f64, profiled as f64),
            ratio(given, capital),
            ratio(rating_sum, rated as f64),
        ];
        profiles.push(RadarProfile { community: c, raw, normalized: [0.0; 6] });
    }
    for axis in 0..6 {
        let max = profiles.iter().map(|p| p.raw[axis]).fold(0.0, f64::max);
        for p in &mut profiles {
            p.normalized[axis] = if max > 0.0 { p.raw[axis] / max } else { 0.0 };
        }
    }
    missing.sort();
    missing.dedup();
    RadarReport { profiles, missing_financials: missing }
}
