use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};

use chrono::{Datelike, Months};
use thiserror::Error;

use glens_core::community::{detect_communities, Partition};
use glens_core::financials::FinancialLedger;
use glens_core::graph::Date;
use glens_core::ingest::{generate_synthetic, join_to_network, load_tables, IngestError, SyntheticConfig};
use glens_core::metrics::{compute_centralities, MetricsError, NodeMetrics};
use glens_core::{EnterpriseId, GuaranteeNetwork, Snapshot};

/// Days after a due date before a late installment counts as a default.
pub const GRACE_DAYS: i64 = 0;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no dataset: set GLENS_DATA or pass --data")]
    DatasetMissing,
    #[error("dataset has no dated records")]
    Empty,
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

type MetricMap = BTreeMap<EnterpriseId, NodeMetrics>;

/// One immutable joined network plus memoised read-only derivations.
pub struct Dataset {
    pub network: GuaranteeNetwork,
    pub fingerprint: String,
    pub span: (Date, Date),
    /// First of the month with the most active guarantees.
    pub default_date: Date,
    pub ledger: FinancialLedger,
    metrics: Mutex<HashMap<Date, Arc<Result<MetricMap, MetricsError>>>>,
    partitions: Mutex<HashMap<(Date, usize), Arc<Partition>>>,
}

impl Dataset {
    pub fn new(network: GuaranteeNetwork) -> Result<Dataset, DatasetError> {
        let span = network.date_span().ok_or(DatasetError::Empty)?;
        let default_date = busiest_month(&network, span);
        let ledger = FinancialLedger::from_network(&network, None, GRACE_DAYS);
        Ok(Dataset {
            fingerprint: network.fingerprint(),
            network,
            span,
            default_date,
            ledger,
            metrics: Mutex::default(),
            partitions: Mutex::default(),
        })
    }

    /// `root` is a manifest file or a directory holding `manifest.json`.
    pub fn load(root: &Path) -> Result<Dataset, DatasetError> {
        let tables = load_tables(root)?;
        Dataset::new(join_to_network(&tables)?)
    }

    pub fn synthetic(cfg: &SyntheticConfig) -> Result<Dataset, DatasetError> {
        let (tables, _) = generate_synthetic(cfg)?;
        Dataset::new(join_to_network(&tables)?)
    }

    pub fn date_or_default(&self, date: Option<Date>) -> Date {
        date.unwrap_or(self.default_date)
    }

    pub fn snapshot(&self, date: Option<Date>) -> Snapshot {
        Snapshot::at(&self.network, self.date_or_default(date))
    }

    pub fn centralities(&self, date: Date) -> Arc<Result<MetricMap, MetricsError>> {
        if let Some(m) = self.metrics.lock().expect("metrics cache").get(&date) {
            return m.clone();
        }
        let computed = Arc::new(compute_centralities(&Snapshot::at(&self.network, date)));
        self.metrics.lock().expect("metrics cache").entry(date).or_insert(computed).clone()
    }

    /// Detected partition at `date`; identical inputs always give the same value.
    pub fn partition(&self, date: Date, steps: usize) -> Arc<Partition> {
        if let Some(p) = self.partitions.lock().expect("partition cache").get(&(date, steps)) {
            return p.clone();
        }
        let p = Arc::new(detect_communities(&Snapshot::at(&self.network, date), steps));
        self.partitions.lock().expect("partition cache").entry((date, steps)).or_insert(p).clone()
    }
}

fn busiest_month(network: &GuaranteeNetwork, span: (Date, Date)) -> Date {
    let mut month = span.0.with_day(1).expect("day 1 exists");
    let mut best = (0usize, span.0);
    while month <= span.1 {
        let active = network.edges.iter().filter(|e| e.is_active(month)).count();
        if active > best.0 {
            best = (active, month);
        }
        month = month + Months::new(1);
    }
    best.1
}
