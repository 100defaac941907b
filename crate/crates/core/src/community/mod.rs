//! Community detection, boundary spanners and the analyst's edit operations.

mod partition;
mod radar;
mod stats;
mod treemap;
mod walktrap;

pub use partition::{CommunityId, EditOp, Partition};
pub use radar::{radar_profiles, RadarAxis, RadarProfile, RadarReport};
pub use stats::{community_stats, find_spanners, CommunityStats, Spanner};
pub use treemap::{treemap_layout, SizeMeasure, TreemapLayout, TreemapRect};
pub use walktrap::{detect_communities, detect_communities_in, modularity, DEFAULT_WALK_STEPS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CommunityError {
    #[error("unknown community {0}")]
    UnknownCommunity(u32),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("communities {0} and {1} share no edge")]
    NotNeighbours(u32, u32),
    #[error("cannot merge community {0} with itself")]
    SameCommunity(u32),
    #[error("node {0} has no neighbour outside its community")]
    NotASpanner(String),
    #[error("node {0} has no neighbour in community {1}")]
    NotAdjacent(String, u32),
    #[error("edge {0} -- {1} is not inside community {2}")]
    NotAnInternalEdge(String, String, u32),
    #[error("removing the cut edges leaves community {0} connected")]
    NotACut(u32),
    #[error("partition does not cover node {0}")]
    Uncovered(String),
}

impl CommunityError {
    pub fn code(&self) -> &'static str {
        match self {
            CommunityError::UnknownCommunity(_) => "UnknownCommunity",
            CommunityError::UnknownNode(_) => "UnknownNode",
            CommunityError::NotNeighbours(..) => "NotNeighbours",
            CommunityError::SameCommunity(_) => "SameCommunity",
            CommunityError::NotASpanner(_) => "NotASpanner",
            CommunityError::NotAdjacent(..) => "NotAdjacent",
            CommunityError::NotAnInternalEdge(..) => "NotAnInternalEdge",
            CommunityError::NotACut(_) => "NotACut",
            CommunityError::Uncovered(_) => "Uncovered",
        }
    }
}
