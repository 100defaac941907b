use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Motif;
use crate::financials::{percent_half_up, FinancialLedger};
use crate::graph::EnterpriseId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifReport {
    pub motif: Motif,
    pub instances: usize,
    /// Size of the union of matched node sets.
    pub firms: usize,
    pub default_firms: usize,
    pub ratio_default_firms: f64,
    /// Absent when the covered firms hold no loans.
    pub ratio_default_amount: Option<f64>,
    pub total_loan_amount: f64,
    pub total_default_amount: f64,
    /// Defaulted covered firms over covered firms.
    pub priority: f64,
}

pub fn motif_report(motif: &Motif, embeddings: &[Vec<EnterpriseId>], ledger: &FinancialLedger) -> MotifReport {
    let covered: BTreeSet<&EnterpriseId> = embeddings.iter().flatten().collect();
    let firms = covered.len();
    let mut default_firms = 0;
    let (mut loan, mut default) = (0.0, 0.0);
    for id in &covered {
        let f = ledger.get(id);
        default_firms += f.defaulted as usize;
        loan += f.loan_total;
        default += f.default_total;
    }
    let priority = if firms == 0 { 0.0 } else { default_firms as f64 / firms as f64 };
    MotifReport {
        motif: *motif,
        instances: embeddings.len(),
        firms,
        default_firms,
        ratio_default_firms: priority,
        ratio_default_amount: (loan > 0.0).then(|| default / loan),
        total_loan_amount: loan,
        total_default_amount: default,
        priority,
    }
}

/// Descending priority, then descending amount ratio, then canonical code.
pub fn rank_motifs(mut reports: Vec<MotifReport>) -> Vec<MotifReport> {
    reports.sort_by(|a, b| {
        b.priority
            .total_cmp(&a.priority)
            .then_with(|| b.ratio_default_amount.unwrap_or(-1.0).total_cmp(&a.ratio_default_amount.unwrap_or(-1.0)))
            .then_with(|| a.motif.code().cmp(&b.motif.code()))
    });
    reports
}

/// Delimited export with the summary-table columns.
pub fn write_reports_csv<W: Write>(reports: &[MotifReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "motif",
        "instances",
        "firms",
        "default_firms",
        "ratio_default_firms_pct",
        "ratio_default_amount_pct",
        "total_loan_amount",
        "total_default_amount",
    ])?;
    for r in reports {
        w.write_record([
            r.motif.code().to_string(),
            r.instances.to_string(),
            r.firms.to_string(),
            r.default_firms.to_string(),
            percent_half_up(r.ratio_default_firms).to_string(),
            r.ratio_default_amount.map(|x| percent_half_up(x).to_string()).unwrap_or_default(),
            r.total_loan_amount.to_string(),
            r.total_default_amount.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
