use std::collections::{BTreeMap, HashMap};

use super::tables::TableSet;
use super::IngestError;
use crate::graph::{
    build_network, ContractId, CreditRecord, Date, DepositRecord, Enterprise, EnterpriseId, GuaranteeEdge,
    GuaranteeNetwork, Installment, LoanContract, ProfileRecord, RepaymentEvent,
};

fn missing(table: &str, row: usize, column: &str, value: &str, target: &str) -> IngestError {
    IngestError::Join {
        table: table.into(),
        row: row + 1,
        column: column.into(),
        value: value.into(),
        target: target.into(),
    }
}

/// Joins the tables by customer id and contract id and validates the result.
/// Every customer must have a profile row; every reference must resolve.
pub fn join_to_network(tables: &TableSet) -> Result<GuaranteeNetwork, IngestError> {
    let mut ents: BTreeMap<String, Enterprise> = BTreeMap::new();
    for r in &tables.customer_profile {
        ents.entry(r.customer_id.clone()).or_insert_with(|| Enterprise::new(r.customer_id.clone())).profile.push(
            ProfileRecord {
                as_of: r.as_of,
                business_nature: r.business_nature.clone(),
                registered_capital: r.registered_capital,
                enterprise_scale: r.enterprise_scale.clone(),
                employee_count: r.employee_count,
                sector: r.sector.clone(),
            },
        );
    }
    for (i, r) in tables.loan_account.iter().enumerate() {
        let e = ents
            .get_mut(&r.customer_id)
            .ok_or_else(|| missing("loan_account", i, "customer_id", &r.customer_id, "customer_profile"))?;
        e.deposits.push(DepositRecord { as_of: r.as_of, balance: r.deposit_balance });
    }
    for (i, r) in tables.customer_credit.iter().enumerate() {
        let e = ents
            .get_mut(&r.customer_id)
            .ok_or_else(|| missing("customer_credit", i, "customer_id", &r.customer_id, "customer_profile"))?;
        e.credit.push(CreditRecord { as_of: r.as_of, rating: r.credit_rating });
    }
    let mut gtype: BTreeMap<&str, (Date, &str)> = BTreeMap::new();
    for (i, r) in tables.guarantee_profile.iter().enumerate() {
        if !ents.contains_key(&r.customer_id) {
            return Err(missing("guarantee_profile", i, "customer_id", &r.customer_id, "customer_profile"));
        }
        let slot = gtype.entry(&r.customer_id).or_insert((r.as_of, &r.guarantor_type));
        if r.as_of >= slot.0 {
            *slot = (r.as_of, &r.guarantor_type);
        }
    }
    for (id, (_, t)) in gtype {
        ents.get_mut(id).expect("checked above").guarantor_type = Some(t.to_string());
    }

    // Schedules and repayment events come from the repayment table; the
    // default table supplies the exported flag for each installment.
    let mut contract_rows: HashMap<&str, usize> = HashMap::new();
    for (i, r) in tables.loan_contract.iter().enumerate() {
        if !ents.contains_key(&r.customer_id) {
            return Err(missing("loan_contract", i, "customer_id", &r.customer_id, "customer_profile"));
        }
        contract_rows.insert(&r.contract_id, i);
    }
    let mut flags: HashMap<(&str, Date), bool> = HashMap::new();
    for (i, r) in tables.default_status.iter().enumerate() {
        if !contract_rows.contains_key(r.contract_id.as_str()) {
            return Err(missing("default_status", i, "contract_id", &r.contract_id, "loan_contract"));
        }
        flags.insert((&r.contract_id, r.due_date), r.default_flag);
    }
    let mut schedules: HashMap<&str, Vec<Installment>> = HashMap::new();
    let mut repayments = Vec::with_capacity(tables.repayment_status.len());
    for (i, r) in tables.repayment_status.iter().enumerate() {
        if !contract_rows.contains_key(r.contract_id.as_str()) {
            return Err(missing("repayment_status", i, "contract_id", &r.contract_id, "loan_contract"));
        }
        schedules.entry(&r.contract_id).or_default().push(Installment { due_date: r.due_date, due_amount: r.due_amount });
        let flag = flags.get(&(r.contract_id.as_str(), r.due_date)).copied().unwrap_or(false);
        repayments.push(RepaymentEvent {
            contract_id: ContractId::new(r.contract_id.clone()),
            due_date: r.due_date,
            due_amount: r.due_amount,
            paid_date: r.paid_date,
            paid_amount: r.paid_amount,
            default_flag: flag,
        });
    }
    let contracts = tables
        .loan_contract
        .iter()
        .map(|r| {
            let mut installments = schedules.remove(r.contract_id.as_str()).unwrap_or_default();
            installments.sort_by_key(|i| i.due_date);
            LoanContract {
                contract_id: ContractId::new(r.contract_id.clone()),
                borrower: EnterpriseId::new(r.customer_id.clone()),
                loan_amount: r.loan_amount,
                start_date: r.start_date,
                installments,
                capital_return: r.capital_return.clone(),
                interest_return: r.interest_return.clone(),
            }
        })
        .collect();

    let terms: HashMap<&str, usize> =
        tables.guarantee_contract.iter().enumerate().map(|(i, r)| (r.guarantee_id.as_str(), i)).collect();
    let mut related = vec![false; tables.guarantee_contract.len()];
    let mut edges = Vec::with_capacity(tables.guarantee_relationship.len());
    for (i, r) in tables.guarantee_relationship.iter().enumerate() {
        let &t = terms
            .get(r.guarantee_id.as_str())
            .ok_or_else(|| missing("guarantee_relationship", i, "guarantee_id", &r.guarantee_id, "guarantee_contract"))?;
        if !contract_rows.contains_key(r.contract_id.as_str()) {
            return Err(missing("guarantee_relationship", i, "contract_id", &r.contract_id, "loan_contract"));
        }
        for (col, id) in [("guarantor_id", &r.guarantor_id), ("borrower_id", &r.borrower_id)] {
            if !ents.contains_key(id) {
                return Err(missing("guarantee_relationship", i, col, id, "customer_profile"));
            }
        }
        related[t] = true;
        let c = &tables.guarantee_contract[t];
        edges.push(GuaranteeEdge {
            guarantor: EnterpriseId::new(r.guarantor_id.clone()),
            borrower: EnterpriseId::new(r.borrower_id.clone()),
            amount: c.amount,
            contract_id: ContractId::new(r.guarantee_id.clone()),
            loan_contract_id: ContractId::new(r.contract_id.clone()),
            valid_from: c.valid_from,
            valid_to: c.valid_to,
        });
    }
    if let Some(i) = related.iter().position(|&r| !r) {
        let id = &tables.guarantee_contract[i].guarantee_id;
        return Err(missing("guarantee_contract", i, "guarantee_id", id, "guarantee_relationship"));
    }

    Ok(build_network(ents.into_values().collect(), edges, contracts, repayments)?)
}
