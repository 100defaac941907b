use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GraphError;

pub type Date = chrono::NaiveDate;

/// Opaque enterprise identifier (bank exports replace names by encrypted ids).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnterpriseId(pub String);

impl EnterpriseId {
    pub fn new(id: impl Into<String>) -> Self {
        EnterpriseId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EnterpriseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EnterpriseId {
    fn from(s: &str) -> Self {
        EnterpriseId(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContractId(pub String);

impl ContractId {
    pub fn new(id: impl Into<String>) -> Self {
        ContractId(id.into())
    }
}

impl fmt::Display for ContractId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ContractId {
    fn from(s: &str) -> Self {
        ContractId(s.to_string())
    }
}

/// One dated customer-profile record. Enterprises update their profile when
/// applying for loans, so an enterprise carries a history of these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub as_of: Date,
    pub business_nature: String,
    pub registered_capital: f64,
    pub enterprise_scale: String,
    pub employee_count: u32,
    pub sector: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreditRecord {
    pub as_of: Date,
    /// Ordinal grade, 1 = best.
    pub rating: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepositRecord {
    pub as_of: Date,
    pub balance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enterprise {
    pub id: EnterpriseId,
    /// Sorted by `as_of`.
    pub profile: Vec<ProfileRecord>,
    /// Sorted by `as_of`.
    pub credit: Vec<CreditRecord>,
    /// Sorted by `as_of`; the deposit series used for deposit-loss figures.
    pub deposits: Vec<DepositRecord>,
    pub guarantor_type: Option<String>,
}

fn latest_before<T>(items: &[T], date_of: impl Fn(&T) -> Date, cutoff: Date) -> Option<&T> {
    let n = items.partition_point(|r| date_of(r) < cutoff);
    n.checked_sub(1).map(|i| &items[i])
}

impl Enterprise {
    pub fn new(id: impl Into<String>) -> Self {
        Enterprise {
            id: EnterpriseId(id.into()),
            profile: Vec::new(),
            credit: Vec::new(),
            deposits: Vec::new(),
            guarantor_type: None,
        }
    }

    /// Latest profile record dated strictly before `cutoff`.
    pub fn profile_before(&self, cutoff: Date) -> Option<&ProfileRecord> {
        latest_before(&self.profile, |r| r.as_of, cutoff)
    }

    pub fn latest_profile(&self) -> Option<&ProfileRecord> {
        self.profile.last()
    }

    pub fn rating_before(&self, cutoff: Date) -> Option<u8> {
        latest_before(&self.credit, |r| r.as_of, cutoff).map(|r| r.rating)
    }

    pub fn latest_rating(&self) -> Option<u8> {
        self.credit.last().map(|r| r.rating)
    }

    /// Deposit balance in force on `date` (latest record at or before it).
    pub fn deposit_on(&self, date: Date) -> Option<f64> {
        latest_before(&self.deposits, |r| r.as_of, date.succ_opt().unwrap_or(date)).map(|r| r.balance)
    }

    pub fn registered_capital(&self) -> Option<f64> {
        self.latest_profile().map(|p| p.registered_capital)
    }

    pub fn sector(&self) -> Option<&str> {
        self.latest_profile().map(|p| p.sector.as_str())
    }

    fn sort_histories(&mut self) {
        self.profile.sort_by_key(|r| r.as_of);
        self.credit.sort_by_key(|r| r.as_of);
        self.deposits.sort_by_key(|r| r.as_of);
    }
}

/// A guarantee contract: `guarantor` assumes `borrower`'s obligation on
/// the loan `loan_contract_id` while the guarantee is valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeEdge {
    pub guarantor: EnterpriseId,
    pub borrower: EnterpriseId,
    pub amount: f64,
    /// Guarantee contract id; unique per edge.
    pub contract_id: ContractId,
    pub loan_contract_id: ContractId,
    pub valid_from: Date,
    /// `None` means open-ended.
    pub valid_to: Option<Date>,
}

impl GuaranteeEdge {
    pub fn is_active(&self, as_of: Date) -> bool {
        self.valid_from <= as_of && self.valid_to.is_none_or(|end| as_of <= end)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Installment {
    pub due_date: Date,
    pub due_amount: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoanContract {
    pub contract_id: ContractId,
    pub borrower: EnterpriseId,
    pub loan_amount: f64,
    pub start_date: Date,
    /// Strictly increasing due dates.
    pub installments: Vec<Installment>,
    pub capital_return: String,
    pub interest_return: String,
}

impl LoanContract {
    /// Last due date, or the start date for a contract without a schedule.
    pub fn maturity(&self) -> Date {
        self.installments.last().map_or(self.start_date, |i| i.due_date)
    }

    pub fn is_active(&self, as_of: Date) -> bool {
        self.start_date <= as_of && as_of <= self.maturity()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepaymentEvent {
    pub contract_id: ContractId,
    pub due_date: Date,
    pub due_amount: f64,
    pub paid_date: Option<Date>,
    pub paid_amount: f64,
    /// Default flag as exported by the bank (zero-day grace).
    pub default_flag: bool,
}

impl RepaymentEvent {
    /// Default status with a grace period, using only what is known strictly
    /// before `known_before`: a payment dated on or after it counts as absent.
    pub fn is_default_as_of(&self, grace_days: i64, known_before: Date) -> bool {
        match self.paid_date {
            Some(paid) if paid < known_before => paid > self.due_date + chrono::Duration::days(grace_days),
            _ => true,
        }
    }

    /// Default status with full hindsight.
    pub fn is_default(&self, grace_days: i64) -> bool {
        match self.paid_date {
            Some(paid) => paid > self.due_date + chrono::Duration::days(grace_days),
            None => true,
        }
    }

    /// The date from which this record is observable in full.
    pub fn record_date(&self) -> Date {
        self.paid_date.map_or(self.due_date, |p| p.max(self.due_date))
    }
}

/// Validated, read-only guarantee network.
#[derive(Clone, Debug, Serialize)]
pub struct GuaranteeNetwork {
    pub enterprises: BTreeMap<EnterpriseId, Enterprise>,
    pub edges: Vec<GuaranteeEdge>,
    pub contracts: BTreeMap<ContractId, LoanContract>,
    pub repayments: Vec<RepaymentEvent>,
    #[serde(skip)]
    index: NetworkIndex,
}

#[derive(Clone, Debug, Default)]
struct NetworkIndex {
    contracts_by_borrower: HashMap<EnterpriseId, Vec<ContractId>>,
    repayments_by_contract: HashMap<ContractId, Vec<usize>>,
}

impl GuaranteeNetwork {
    pub fn enterprise(&self, id: &EnterpriseId) -> Option<&Enterprise> {
        self.enterprises.get(id)
    }

    /// Loan contracts borrowed by `id`, in contract-id order.
    pub fn contracts_of<'a>(&'a self, id: &EnterpriseId) -> impl Iterator<Item = &'a LoanContract> + 'a {
        self.index
            .contracts_by_borrower
            .get(id)
            .into_iter()
            .flatten()
            .map(move |cid| &self.contracts[cid])
    }

    /// Repayment events of one contract, ordered by due date.
    pub fn repayments_of<'a>(&'a self, contract: &ContractId) -> impl Iterator<Item = &'a RepaymentEvent> + 'a {
        self.index
            .repayments_by_contract
            .get(contract)
            .into_iter()
            .flatten()
            .map(move |&i| &self.repayments[i])
    }

    /// Earliest and latest dates appearing in the records.
    pub fn date_span(&self) -> Option<(Date, Date)> {
        let dates = self
            .edges
            .iter()
            .flat_map(|e| std::iter::once(e.valid_from).chain(e.valid_to))
            .chain(self.contracts.values().flat_map(|c| [c.start_date, c.maturity()]))
            .chain(self.repayments.iter().map(|r| r.record_date()));
        dates.fold(None, |acc, d| match acc {
            None => Some((d, d)),
            Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
        })
    }

    /// Content hash of the joined network.
    pub fn fingerprint(&self) -> String {
        crate::fingerprint::of(self)
    }

    /// Rebuilds a network from its parts, re-running validation.
    pub fn into_parts(self) -> (Vec<Enterprise>, Vec<GuaranteeEdge>, Vec<LoanContract>, Vec<RepaymentEvent>) {
        (
            self.enterprises.into_values().collect(),
            self.edges,
            self.contracts.into_values().collect(),
            self.repayments,
        )
    }
}

fn check_money(kind: &'static str, id: &str, what: &str, v: f64, strictly_positive: bool) -> Result<(), GraphError> {
    let ok = v.is_finite() && if strictly_positive { v > 0.0 } else { v >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(GraphError::InvalidRecord {
            kind,
            id: id.to_string(),
            reason: format!("{what} must be {} (got {v})", if strictly_positive { "> 0" } else { ">= 0" }),
        })
    }
}

/// Validates referential integrity and record invariants, then indexes the network.
pub fn build_network(
    enterprises: Vec<Enterprise>,
    edges: Vec<GuaranteeEdge>,
    contracts: Vec<LoanContract>,
    repayments: Vec<RepaymentEvent>,
) -> Result<GuaranteeNetwork, GraphError> {
    let mut ents = BTreeMap::new();
    for mut e in enterprises {
        for p in &e.profile {
            check_money("enterprise", e.id.as_str(), "registered_capital", p.registered_capital, false)?;
        }
        for d in &e.deposits {
            check_money("enterprise", e.id.as_str(), "deposit balance", d.balance, false)?;
        }
        e.sort_histories();
        if let Some(prev) = ents.insert(e.id.clone(), e) {
            return Err(GraphError::DuplicateId { kind: "enterprise", id: prev.id.0 });
        }
    }

    let mut cmap = BTreeMap::new();
    for c in contracts {
        let cid = c.contract_id.0.clone();
        if !ents.contains_key(&c.borrower) {
            return Err(GraphError::UnknownEnterprise { id: c.borrower.0, context: format!("loan contract {cid}") });
        }
        check_money("loan contract", &cid, "loan_amount", c.loan_amount, true)?;
        if c.installments.windows(2).any(|w| w[0].due_date >= w[1].due_date) {
            return Err(GraphError::InvalidRecord {
                kind: "loan contract",
                id: cid,
                reason: "installment due dates must be strictly increasing".into(),
            });
        }
        if let Some(prev) = cmap.insert(c.contract_id.clone(), c) {
            return Err(GraphError::DuplicateId { kind: "loan contract", id: prev.contract_id.0 });
        }
    }

    let mut seen_edges = BTreeSet::new();
    for e in &edges {
        let cid = &e.contract_id.0;
        for id in [&e.guarantor, &e.borrower] {
            if !ents.contains_key(id) {
                return Err(GraphError::UnknownEnterprise { id: id.0.clone(), context: format!("guarantee {cid}") });
            }
        }
        if e.guarantor == e.borrower {
            return Err(GraphError::SelfGuarantee { contract_id: cid.clone() });
        }
        if e.valid_to.is_some_and(|end| end < e.valid_from) {
            return Err(GraphError::InvalidInterval { contract_id: cid.clone() });
        }
        check_money("guarantee", cid, "amount", e.amount, true)?;
        match cmap.get(&e.loan_contract_id) {
            None => {
                return Err(GraphError::UnknownContract {
                    id: e.loan_contract_id.0.clone(),
                    context: format!("guarantee {cid}"),
                })
            }
            Some(loan) if loan.borrower != e.borrower => {
                return Err(GraphError::InvalidRecord {
                    kind: "guarantee",
                    id: cid.clone(),
                    reason: format!("borrower {} does not hold loan {}", e.borrower, loan.contract_id),
                })
            }
            Some(_) => {}
        }
        if !seen_edges.insert(e.contract_id.clone()) {
            return Err(GraphError::DuplicateId { kind: "guarantee", id: cid.clone() });
        }
    }

    let mut index = NetworkIndex::default();
    for (cid, c) in &cmap {
        index.contracts_by_borrower.entry(c.borrower.clone()).or_default().push(cid.clone());
    }
    for (i, r) in repayments.iter().enumerate() {
        if !cmap.contains_key(&r.contract_id) {
            return Err(GraphError::UnknownContract {
                id: r.contract_id.0.clone(),
                context: format!("repayment due {}", r.due_date),
            });
        }
        check_money("repayment", &r.contract_id.0, "paid_amount", r.paid_amount, false)?;
        index.repayments_by_contract.entry(r.contract_id.clone()).or_default().push(i);
    }
    for idxs in index.repayments_by_contract.values_mut() {
        idxs.sort_by_key(|&i| repayments[i].due_date);
    }

    Ok(GuaranteeNetwork { enterprises: ents, edges, contracts: cmap, repayments, index })
}
