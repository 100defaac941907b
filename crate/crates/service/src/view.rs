//! Render models for the analyst UI. Everything here is derived from API
//! payloads alone; no analytic computation happens on this side.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use glens_core::community::{CommunityId, Spanner};
use glens_core::contagion::SankeyLink;
use glens_core::EnterpriseId;

use crate::api::SnapshotPayload;
use crate::session::EditRequest;

pub const MIN_RADIUS: f64 = 4.0;
pub const MAX_RADIUS: f64 = 24.0;
pub const EMPTY_MESSAGE: &str = "No guarantees are active on this date.";

/// Drops payloads from a different dataset and responses that arrive after
/// a newer one was already applied.
#[derive(Clone, Debug, Default)]
pub struct ViewState {
    pub session: Option<String>,
    fingerprint: Option<String>,
    issued: u64,
    applied: u64,
}

impl ViewState {
    pub fn new(fingerprint: impl Into<String>) -> Self {
        ViewState { fingerprint: Some(fingerprint.into()), ..Default::default() }
    }

    /// Version tag for the next outgoing request.
    pub fn issue(&mut self) -> u64 {
        self.issued += 1;
        self.issued
    }

    pub fn accept(&mut self, version: u64, fingerprint: &str) -> bool {
        if self.fingerprint.as_deref().is_some_and(|f| f != fingerprint) || version <= self.applied {
            return false;
        }
        self.fingerprint.get_or_insert_with(|| fingerprint.to_string());
        self.applied = version;
        true
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenderNode {
    pub id: EnterpriseId,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    /// `"defaulted"` draws the red ring.
    pub class: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenderedGraph {
    pub nodes: Vec<RenderNode>,
    pub edges: Vec<(usize, usize)>,
    pub empty_message: Option<&'static str>,
}

/// Radius linear in the metric over its observed range.
pub fn radius(value: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        MIN_RADIUS + (value - lo) / (hi - lo) * (MAX_RADIUS - MIN_RADIUS)
    } else {
        (MIN_RADIUS + MAX_RADIUS) / 2.0
    }
}

/// Node sizes from `sizes` (a metric or risk payload); positions from a
/// force-directed layout seeded by the dataset fingerprint.
pub fn network_view(snapshot: &SnapshotPayload, sizes: &BTreeMap<EnterpriseId, f64>, fingerprint: &str) -> RenderedGraph {
    if snapshot.nodes.is_empty() {
        return RenderedGraph { nodes: Vec::new(), edges: Vec::new(), empty_message: Some(EMPTY_MESSAGE) };
    }
    let index: BTreeMap<&EnterpriseId, usize> = snapshot.nodes.iter().enumerate().map(|(i, n)| (&n.id, i)).collect();
    let edges: Vec<(usize, usize)> = snapshot
        .edges
        .iter()
        .filter_map(|e| Some((*index.get(&e.guarantor)?, *index.get(&e.borrower)?)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let values: Vec<f64> = snapshot.nodes.iter().map(|n| sizes.get(&n.id).copied().unwrap_or(0.0)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pos = layout(snapshot.nodes.len(), &edges, seed_of(fingerprint));
    let nodes = snapshot
        .nodes
        .iter()
        .zip(values)
        .zip(pos)
        .map(|((n, v), (x, y))| RenderNode {
            id: n.id.clone(),
            x,
            y,
            radius: radius(v, lo, hi),
            class: if n.defaulted { "defaulted" } else { "normal" },
        })
        .collect();
    RenderedGraph { nodes, edges, empty_message: None }
}

fn seed_of(fingerprint: &str) -> u64 {
    fingerprint.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

const GRAVITY: f64 = 4.0;

/// Fruchterman-Reingold on the unit square, fixed iteration count.
fn layout(n: usize, edges: &[(usize, usize)], seed: u64) -> Vec<(f64, f64)> {
    let mut state = seed | 1;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut pos: Vec<(f64, f64)> = (0..n).map(|_| (next(), next())).collect();
    let k = (1.0 / n as f64).sqrt();
    let iterations = 50;
    for it in 0..iterations {
        let temp = 0.1 * (1.0 - it as f64 / iterations as f64);
        let mut disp = vec![(0.0, 0.0); n];
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                let d = (dx * dx + dy * dy).sqrt().max(1e-6);
                let f = k * k / d;
                disp[i].0 += dx / d * f;
                disp[i].1 += dy / d * f;
                disp[j].0 -= dx / d * f;
                disp[j].1 -= dy / d * f;
            }
        }
        for &(u, v) in edges {
            let (dx, dy) = (pos[u].0 - pos[v].0, pos[u].1 - pos[v].1);
            let d = (dx * dx + dy * dy).sqrt().max(1e-6);
            let f = d * d / k;
            disp[u].0 -= dx / d * f;
            disp[u].1 -= dy / d * f;
            disp[v].0 += dx / d * f;
            disp[v].1 += dy / d * f;
        }
        // Pull towards the centre so disconnected parts stay on screen.
        for (p, d) in pos.iter().zip(disp.iter_mut()) {
            d.0 += GRAVITY * (0.5 - p.0);
            d.1 += GRAVITY * (0.5 - p.1);
        }
        for (p, (dx, dy)) in pos.iter_mut().zip(disp) {
            let len = (dx * dx + dy * dy).sqrt().max(1e-9);
            p.0 = (p.0 + dx / len * len.min(temp)).clamp(0.0, 1.0);
            p.1 = (p.1 + dy / len * len.min(temp)).clamp(0.0, 1.0);
        }
    }
    pos
}

/// Pointer gestures on the treemap and propagation panels.
#[derive(Clone, Debug, PartialEq)]
pub enum Gesture {
    /// Selects a block; highlights adjacent communities, no edit.
    ClickBlock { community: CommunityId },
    /// Moves the spanner into the target community.
    ClickSpanner { spanner: Spanner, target: CommunityId },
    /// Merges the target community into the spanner's own.
    DoubleClickSpanner { spanner: Spanner, target: CommunityId },
    /// Splits the community along one internal edge.
    DoubleClickEdge { community: CommunityId, a: EnterpriseId, b: EnterpriseId },
    /// Cuts a guarantee in the propagation view and re-renders paths of `seed`.
    ClickPathEdge { guarantor: EnterpriseId, borrower: EnterpriseId, seed: EnterpriseId },
}

/// The single edit a gesture posts, if any.
pub fn gesture_request(g: &Gesture) -> Option<EditRequest> {
    match g {
        Gesture::ClickBlock { .. } => None,
        Gesture::ClickSpanner { spanner, target } => {
            Some(EditRequest::Reassign { node: spanner.node.clone(), target: *target })
        }
        Gesture::DoubleClickSpanner { spanner, target } => {
            Some(EditRequest::Merge { into: spanner.community, absorbed: *target })
        }
        Gesture::DoubleClickEdge { community, a, b } => {
            Some(EditRequest::Split { community: *community, cut: vec![(a.clone(), b.clone())] })
        }
        Gesture::ClickPathEdge { guarantor, borrower, seed } => Some(EditRequest::Cut {
            guarantor: guarantor.clone(),
            borrower: borrower.clone(),
            seed: Some(seed.clone()),
        }),
    }
}

/// Communities to highlight when `community` is selected.
pub fn adjacent_communities(community: CommunityId, spanners: &[Spanner]) -> BTreeSet<CommunityId> {
    spanners.iter().filter(|s| s.community == community).flat_map(|s| s.adjacent.iter().copied()).collect()
}

/// Band widths in pixels, linear in link value; the largest gets `max_px`.
pub fn band_thickness(links: &[SankeyLink], max_px: f64) -> Vec<f64> {
    let max = links.iter().map(|l| l.value).fold(0.0, f64::max);
    links.iter().map(|l| if max > 0.0 { l.value / max * max_px } else { 0.0 }).collect()
}

/// Sequential scale from pale yellow (0) to dark red (1).
pub fn heat_color(p: f64) -> String {
    const LO: [f64; 3] = [255.0, 247.0, 236.0];
    const HI: [f64; 3] = [127.0, 0.0, 0.0];
    let t = if p.is_finite() { p.clamp(0.0, 1.0) } else { 0.0 };
    let c: Vec<u8> = LO.iter().zip(HI).map(|(a, b)| (a + (b - a) * t).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}
