use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use csv::StringRecord;
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::graph::Date;

pub const MANIFEST_FILE: &str = "manifest.json";

pub const TABLE_NAMES: [&str; 9] = [
    "customer_profile",
    "loan_account",
    "repayment_status",
    "guarantee_profile",
    "customer_credit",
    "loan_contract",
    "guarantee_relationship",
    "guarantee_contract",
    "default_status",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomerProfileRow {
    pub customer_id: String,
    pub as_of: Date,
    pub business_nature: String,
    pub registered_capital: f64,
    pub enterprise_scale: String,
    pub employee_count: u32,
    pub sector: String,
}

/// Deposit balance on the customer's loan account.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoanAccountRow {
    pub customer_id: String,
    pub as_of: Date,
    pub deposit_balance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepaymentStatusRow {
    pub contract_id: String,
    pub due_date: Date,
    pub due_amount: f64,
    pub paid_date: Option<Date>,
    pub paid_amount: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeProfileRow {
    pub customer_id: String,
    pub guarantor_type: String,
    pub as_of: Date,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomerCreditRow {
    pub customer_id: String,
    pub as_of: Date,
    pub credit_rating: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoanContractRow {
    pub contract_id: String,
    pub customer_id: String,
    pub loan_amount: f64,
    pub start_date: Date,
    pub capital_return: String,
    pub interest_return: String,
}

/// Who guarantees whom, for which loan contract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeRelationshipRow {
    pub guarantee_id: String,
    pub guarantor_id: String,
    pub borrower_id: String,
    pub contract_id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeContractRow {
    pub guarantee_id: String,
    pub amount: f64,
    pub valid_from: Date,
    pub valid_to: Option<Date>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultStatusRow {
    pub contract_id: String,
    pub due_date: Date,
    #[serde(serialize_with = "flag_digit")]
    pub default_flag: bool,
}

fn flag_digit<S: serde::Serializer>(flag: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(*flag as u8)
}

/// The nine record collections exported by the bank.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TableSet {
    pub customer_profile: Vec<CustomerProfileRow>,
    pub loan_account: Vec<LoanAccountRow>,
    pub repayment_status: Vec<RepaymentStatusRow>,
    pub guarantee_profile: Vec<GuaranteeProfileRow>,
    pub customer_credit: Vec<CustomerCreditRow>,
    pub loan_contract: Vec<LoanContractRow>,
    pub guarantee_relationship: Vec<GuaranteeRelationshipRow>,
    pub guarantee_contract: Vec<GuaranteeContractRow>,
    pub default_status: Vec<DefaultStatusRow>,
}

impl TableSet {
    pub fn row_counts(&self) -> BTreeMap<&'static str, usize> {
        let counts = [
            self.customer_profile.len(),
            self.loan_account.len(),
            self.repayment_status.len(),
            self.guarantee_profile.len(),
            self.customer_credit.len(),
            self.loan_contract.len(),
            self.guarantee_relationship.len(),
            self.guarantee_contract.len(),
            self.default_status.len(),
        ];
        TABLE_NAMES.into_iter().zip(counts).collect()
    }
}

struct Fields<'a> {
    table: &'static str,
    line: u64,
    record: &'a StringRecord,
    cols: &'a [usize],
    names: &'a [&'static str],
}

impl Fields<'_> {
    fn fail(&self, i: usize, reason: impl Into<String>) -> IngestError {
        IngestError::ParseError {
            table: self.table.into(),
            row: self.line,
            column: self.names[i].into(),
            reason: reason.into(),
        }
    }

    fn raw(&self, i: usize) -> &str {
        self.record.get(self.cols[i]).unwrap_or("").trim()
    }

    fn text(&self, i: usize) -> Result<String, IngestError> {
        match self.raw(i) {
            "" => Err(self.fail(i, "empty value")),
            s => Ok(s.to_string()),
        }
    }

    fn money(&self, i: usize) -> Result<f64, IngestError> {
        let s = self.raw(i);
        let ok = !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
        match s.parse::<f64>() {
            Ok(v) if ok && v.is_finite() => Ok(v),
            _ => Err(self.fail(i, format!("invalid amount {s:?}"))),
        }
    }

    fn date(&self, i: usize) -> Result<Date, IngestError> {
        let s = self.raw(i);
        Date::parse_from_str(s, "%Y-%m-%d").map_err(|_| self.fail(i, format!("invalid date {s:?}")))
    }

    fn opt_date(&self, i: usize) -> Result<Option<Date>, IngestError> {
        if self.raw(i).is_empty() {
            Ok(None)
        } else {
            self.date(i).map(Some)
        }
    }

    fn int<T: std::str::FromStr>(&self, i: usize) -> Result<T, IngestError> {
        let s = self.raw(i);
        s.parse().map_err(|_| self.fail(i, format!("invalid integer {s:?}")))
    }

    fn flag(&self, i: usize) -> Result<bool, IngestError> {
        match self.raw(i).to_ascii_lowercase().as_str() {
            "1" | "true" | "y" | "yes" => Ok(true),
            "0" | "false" | "n" | "no" => Ok(false),
            s => Err(self.fail(i, format!("invalid flag {s:?}"))),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> IngestError {
    IngestError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn read_table<T>(
    table: &'static str,
    path: &Path,
    names: &[&'static str],
    parse: impl Fn(&Fields) -> Result<T, IngestError>,
) -> Result<Vec<T>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| io_err(path, e))?;
    let headers = reader.headers().map_err(|e| io_err(path, e))?.clone();
    let cols = names
        .iter()
        .map(|name| {
            headers.iter().position(|h| h.trim() == *name).ok_or_else(|| IngestError::ParseError {
                table: table.into(),
                row: 1,
                column: (*name).into(),
                reason: "column missing from header".into(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let record = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            IngestError::ParseError { table: table.into(), row: line, column: String::new(), reason: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        out.push(parse(&Fields { table, line, record: &record, cols: &cols, names })?);
    }
    Ok(out)
}

/// Reads the nine tables listed in a JSON manifest `{table: relative path}`.
/// `source` is the manifest file or a directory containing `manifest.json`.
pub fn load_tables(source: &Path) -> Result<TableSet, IngestError> {
    let manifest_path = if source.is_dir() { source.join(MANIFEST_FILE) } else { source.to_path_buf() };
    let root = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = fs::read_to_string(&manifest_path).map_err(|e| io_err(&manifest_path, e))?;
    let manifest: BTreeMap<String, String> =
        serde_json::from_str(&text).map_err(|e| IngestError::Manifest(e.to_string()))?;
    let path_of = |table: &str| -> Result<PathBuf, IngestError> {
        manifest.get(table).map(|p| root.join(p)).ok_or_else(|| IngestError::MissingTable(table.into()))
    };
    for t in TABLE_NAMES {
        path_of(t)?;
    }

    Ok(TableSet {
        customer_profile: read_table(
            "customer_profile",
            &path_of("customer_profile")?,
            &["customer_id", "as_of", "business_nature", "registered_capital", "enterprise_scale", "employee_count", "sector"],
            |f| {
                Ok(CustomerProfileRow {
                    customer_id: f.text(0)?,
                    as_of: f.date(1)?,
                    business_nature: f.text(2)?,
                    registered_capital: f.money(3)?,
                    enterprise_scale: f.text(4)?,
                    employee_count: f.int(5)?,
                    sector: f.text(6)?,
                })
            },
        )?,
        loan_account: read_table(
            "loan_account",
            &path_of("loan_account")?,
            &["customer_id", "as_of", "deposit_balance"],
            |f| Ok(LoanAccountRow { customer_id: f.text(0)?, as_of: f.date(1)?, deposit_balance: f.money(2)? }),
        )?,
        repayment_status: read_table(
            "repayment_status",
            &path_of("repayment_status")?,
            &["contract_id", "due_date", "due_amount", "paid_date", "paid_amount"],
            |f| {
                Ok(RepaymentStatusRow {
                    contract_id: f.text(0)?,
                    due_date: f.date(1)?,
                    due_amount: f.money(2)?,
                    paid_date: f.opt_date(3)?,
                    paid_amount: f.money(4)?,
                })
            },
        )?,
        guarantee_profile: read_table(
            "guarantee_profile",
            &path_of("guarantee_profile")?,
            &["customer_id", "guarantor_type", "as_of"],
            |f| Ok(GuaranteeProfileRow { customer_id: f.text(0)?, guarantor_type: f.text(1)?, as_of: f.date(2)? }),
        )?,
        customer_credit: read_table(
            "customer_credit",
            &path_of("customer_credit")?,
            &["customer_id", "as_of", "credit_rating"],
            |f| Ok(CustomerCreditRow { customer_id: f.text(0)?, as_of: f.date(1)?, credit_rating: f.int(2)? }),
        )?,
        loan_contract: read_table(
            "loan_contract",
            &path_of("loan_contract")?,
            &["contract_id", "customer_id", "loan_amount", "start_date", "capital_return", "interest_return"],
            |f| {
                Ok(LoanContractRow {
                    contract_id: f.text(0)?,
                    customer_id: f.text(1)?,
                    loan_amount: f.money(2)?,
                    start_date: f.date(3)?,
                    capital_return: f.text(4)?,
                    interest_return: f.text(5)?,
                })
            },
        )?,
        guarantee_relationship: read_table(
            "guarantee_relationship",
            &path_of("guarantee_relationship")?,
            &["guarantee_id", "guarantor_id", "borrower_id", "contract_id"],
            |f| {
                Ok(GuaranteeRelationshipRow {
                    guarantee_id: f.text(0)?,
                    guarantor_id: f.text(1)?,
                    borrower_id: f.text(2)?,
                    contract_id: f.text(3)?,
                })
            },
        )?,
        guarantee_contract: read_table(
            "guarantee_contract",
            &path_of("guarantee_contract")?,
            &["guarantee_id", "amount", "valid_from", "valid_to"],
            |f| {
                Ok(GuaranteeContractRow {
                    guarantee_id: f.text(0)?,
                    amount: f.money(1)?,
                    valid_from: f.date(2)?,
                    valid_to: f.opt_date(3)?,
                })
            },
        )?,
        default_status: read_table(
            "default_status",
            &path_of("default_status")?,
            &["contract_id", "due_date", "default_flag"],
            |f| Ok(DefaultStatusRow { contract_id: f.text(0)?, due_date: f.date(1)?, default_flag: f.flag(2)? }),
        )?,
    })
}

fn write_one<T: Serialize>(dir: &Path, table: &str, rows: &[T], header: &[&str]) -> Result<(), IngestError> {
    let path = dir.join(format!("{table}.csv"));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(header).map_err(|e| io_err(&path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))
}

/// Writes one CSV per table plus `manifest.json` into `dir`.
pub fn write_tables(dir: &Path, tables: &TableSet) -> Result<(), IngestError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_one(dir, "customer_profile", &tables.customer_profile, &[
        "customer_id", "as_of", "business_nature", "registered_capital", "enterprise_scale", "employee_count", "sector",
    ])?;
    write_one(dir, "loan_account", &tables.loan_account, &["customer_id", "as_of", "deposit_balance"])?;
    write_one(dir, "repayment_status", &tables.repayment_status, &[
        "contract_id", "due_date", "due_amount", "paid_date", "paid_amount",
    ])?;
    write_one(dir, "guarantee_profile", &tables.guarantee_profile, &["customer_id", "guarantor_type", "as_of"])?;
    write_one(dir, "customer_credit", &tables.customer_credit, &["customer_id", "as_of", "credit_rating"])?;
    write_one(dir, "loan_contract", &tables.loan_contract, &[
        "contract_id", "customer_id", "loan_amount", "start_date", "capital_return", "interest_return",
    ])?;
    write_one(dir, "guarantee_relationship", &tables.guarantee_relationship, &[
        "guarantee_id", "guarantor_id", "borrower_id", "contract_id",
    ])?;
    write_one(dir, "guarantee_contract", &tables.guarantee_contract, &["guarantee_id", "amount", "valid_from", "valid_to"])?;
    write_one(dir, "default_status", &tables.default_status, &["contract_id", "due_date", "default_flag"])?;
    let manifest: BTreeMap<&str, String> = TABLE_NAMES.iter().map(|t| (*t, format!("{t}.csv"))).collect();
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
}
