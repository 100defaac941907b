use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::http::StatusCode;
use serde::{Deserialize, Serialize};

use glens_core::community::{
    community_stats, treemap_layout, CommunityId, CommunityStats, EditOp, Partition, SizeMeasure, TreemapLayout,
};
use glens_core::contagion::{CutSet, PathCaps, PropagationResult, PropagationView};
use glens_core::graph::Date;
use glens_core::patterns::{edit_motif, EditOutcome, Motif, MotifEdit};
use glens_core::{fingerprint, EnterpriseId, SimpleGraph, Snapshot, ViewMode};

use crate::dataset::Dataset;
use crate::error::ApiError;

/// One analyst edit as posted to `/sessions/{id}/edits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditRequest {
    Merge { into: CommunityId, absorbed: CommunityId },
    Reassign { node: EnterpriseId, target: CommunityId },
    Split { community: CommunityId, cut: Vec<(EnterpriseId, EnterpriseId)> },
    /// Removes guarantor → borrower from the session's propagation view.
    Cut {
        guarantor: EnterpriseId,
        borrower: EnterpriseId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<EnterpriseId>,
    },
    Revert {
        guarantor: EnterpriseId,
        borrower: EnterpriseId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<EnterpriseId>,
    },
    /// Edits `motif` when given, otherwise the session's current motif.
    MotifEdit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        motif: Option<Motif>,
        edit: MotifEdit,
    },
}

impl EditRequest {
    fn partition_op(&self) -> Option<EditOp> {
        match self {
            EditRequest::Merge { into, absorbed } => Some(EditOp::Merge { into: *into, absorbed: *absorbed }),
            EditRequest::Reassign { node, target } => Some(EditOp::Reassign { node: node.clone(), target: *target }),
            EditRequest::Split { community, cut } => Some(EditOp::Split { community: *community, cut: cut.clone() }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsDelta {
    /// New or changed communities.
    pub changed: Vec<CommunityStats>,
    pub removed: Vec<CommunityId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EditResponse {
    pub revision: u64,
    pub fingerprint: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats_delta: Option<StatsDelta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub treemap: Option<TreemapLayout>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cuts: Option<CutSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagation: Option<PropagationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub motif: Option<EditOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionSummary {
    pub id: String,
    pub date: Date,
    pub created_unix: u64,
    pub revision: u64,
    pub partition_revision: u64,
    pub communities: usize,
    pub cuts: CutSet,
    pub motif: Option<Motif>,
    pub fingerprint: String,
    pub log: Vec<EditRequest>,
}

/// Isolated editing state over one snapshot. Edits are applied in order and
/// a rejected edit leaves the state untouched.
pub struct Session {
    pub id: String,
    pub date: Date,
    created_unix: u64,
    revision: u64,
    snapshot: Snapshot,
    undirected: SimpleGraph,
    partition: Partition,
    stats: Vec<CommunityStats>,
    view: PropagationView,
    motif: Option<Motif>,
    log: Vec<EditRequest>,
}

impl Session {
    pub fn new(id: String, dataset: &Dataset, date: Date, steps: usize) -> Session {
        let snapshot = Snapshot::at(&dataset.network, date);
        let directed = Arc::new(snapshot.simple_view(ViewMode::Directed));
        let undirected = directed.to_undirected();
        let partition = (*dataset.partition(date, steps)).clone();
        let stats = community_stats(&partition, &undirected, &dataset.ledger);
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Session {
            id,
            date,
            created_unix,
            revision: 0,
            snapshot,
            undirected,
            partition,
            stats,
            view: PropagationView::from_graph(directed),
            motif: None,
            log: Vec::new(),
        }
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn stats(&self) -> &[CommunityStats] {
        &self.stats
    }

    pub fn view(&self) -> &PropagationView {
        &self.view
    }

    /// Hash of everything an edit can change; independent of id and clock.
    pub fn fingerprint(&self) -> String {
        fingerprint::of(&(self.revision, self.partition.fingerprint(), self.view.cuts(), self.motif))
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            date: self.date,
            created_unix: self.created_unix,
            revision: self.revision,
            partition_revision: self.partition.revision(),
            communities: self.stats.len(),
            cuts: self.view.cuts().clone(),
            motif: self.motif,
            fingerprint: self.fingerprint(),
            log: self.log.clone(),
        }
    }

    pub fn apply(&mut self, req: &EditRequest, dataset: &Dataset, caps: PathCaps) -> Result<EditResponse, ApiError> {
        let mut out = EditResponse {
            revision: 0,
            fingerprint: String::new(),
            stats_delta: None,
            treemap: None,
            cuts: None,
            propagation: None,
            motif: None,
        };
        if let Some(op) = req.partition_op() {
            let next = self.partition.apply(&self.undirected, &op)?;
            let stats = community_stats(&next, &self.undirected, &dataset.ledger);
            out.stats_delta = Some(delta(&self.stats, &stats));
            out.treemap = Some(treemap_layout(&stats, SizeMeasure::default()));
            self.partition = next;
            self.stats = stats;
        } else {
            match req {
                EditRequest::Cut { guarantor, borrower, seed } | EditRequest::Revert { guarantor, borrower, seed } => {
                    // Validate the seed before touching the cut set.
                    if let Some(s) = seed {
                        self.view.contagion_set(s)?;
                    }
                    if matches!(req, EditRequest::Cut { .. }) {
                        self.view.apply_cut(guarantor, borrower)?;
                    } else {
                        self.view.revert_cut(guarantor, borrower)?;
                    }
                    out.cuts = Some(self.view.cuts().clone());
                    if let Some(s) = seed {
                        out.propagation = Some(self.view.enumerate_paths(s, caps)?);
                    }
                }
                EditRequest::MotifEdit { motif, edit } => {
                    let base = motif.or(self.motif).ok_or_else(|| {
                        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "NoMotif", "session has no motif to edit")
                    })?;
                    let outcome = edit_motif(&base, *edit)?;
                    self.motif = Some(outcome.motif);
                    out.motif = Some(outcome);
                }
                _ => unreachable!("partition edits handled above"),
            }
        }
        self.revision += 1;
        self.log.push(req.clone());
        out.revision = self.revision;
        out.fingerprint = self.fingerprint();
        Ok(out)
    }
}

fn delta(before: &[CommunityStats], after: &[CommunityStats]) -> StatsDelta {
    let old: BTreeMap<CommunityId, &CommunityStats> = before.iter().map(|s| (s.community, s)).collect();
    let new: BTreeMap<CommunityId, &CommunityStats> = after.iter().map(|s| (s.community, s)).collect();
    StatsDelta {
        changed: after.iter().filter(|s| old.get(&s.community).copied() != Some(s)).cloned().collect(),
        removed: old.keys().filter(|c| !new.contains_key(c)).copied().collect(),
    }
}
