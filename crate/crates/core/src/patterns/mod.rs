//! Guarantee circles, directed motif classes, census, network-wide matching
//! and default-priority ranking.

mod canon;
mod census;
mod circles;
mod matching;
mod motif;
mod report;
mod scan;

pub use canon::{enumerate_motif_classes, is_weakly_connected, max_pairs, pair_bit};
pub use census::{motif_census, motif_census_with, CensusOptions, CensusReport, ClassCount};
pub use circles::{detect_circles, detect_circles_with, CircleKind, CircleOptions, CircleReport, GuaranteeCircle};
pub use matching::{match_motif, match_motif_with, MatchOptions, MatchResult};
pub use motif::{edit_motif, CanonicalCode, EditOutcome, Motif, MotifEdit, MAX_MOTIF_NODES};
pub use report::{motif_report, rank_motifs, write_reports_csv, MotifReport};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("motif size {0} outside the supported range")]
    MotifSize(usize),
    #[error("motif is not weakly connected")]
    DisconnectedResult,
    #[error("edit would exceed {0} nodes")]
    SizeCapExceeded(usize),
    #[error("self-loops are not allowed in motifs")]
    SelfLoop,
    #[error("no slot {0} in motif")]
    NoSuchSlot(usize),
    #[error("edge {0}->{1} already present")]
    DuplicateEdge(usize, usize),
    #[error("edge {0}->{1} not present")]
    MissingEdge(usize, usize),
    #[error("malformed canonical code {0:?}")]
    BadCode(String),
}

impl PatternError {
    pub fn code(&self) -> &'static str {
        match self {
            PatternError::MotifSize(_) => "MotifSize",
            PatternError::DisconnectedResult => "DisconnectedResult",
            PatternError::SizeCapExceeded(_) => "SizeCapExceeded",
            PatternError::SelfLoop => "SelfLoop",
            PatternError::NoSuchSlot(_) => "NoSuchSlot",
            PatternError::DuplicateEdge(..) => "DuplicateEdge",
            PatternError::MissingEdge(..) => "MissingEdge",
            PatternError::BadCode(_) => "BadCode",
        }
    }
}
