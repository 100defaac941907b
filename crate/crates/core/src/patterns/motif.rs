use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::canon::{canonicalize, is_weakly_connected, max_pairs, pair_bit};
use super::PatternError;

pub const MAX_MOTIF_NODES: usize = 6;

/// Isomorphism-invariant identifier of a motif class: node count plus the
/// minimal adjacency bitset. Rendered as `k4-000000a3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode {
    pub k: u8,
    pub bits: u32,
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}-{:08x}", self.k, self.bits)
    }
}

impl FromStr for CanonicalCode {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PatternError::BadCode(s.to_string());
        let (k, bits) = s.strip_prefix('k').and_then(|r| r.split_once('-')).ok_or_else(bad)?;
        let k: u8 = k.parse().map_err(|_| bad())?;
        let bits = u32::from_str_radix(bits, 16).map_err(|_| bad())?;
        Ok(CanonicalCode { k, bits })
    }
}

impl Serialize for CanonicalCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CanonicalCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A weakly connected digraph on `k` slots, stored in canonical slot order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Motif {
    k: usize,
    bits: u32,
}

impl Motif {
    /// Canonicalises an arbitrary slot labelling.
    pub fn new(k: usize, edges: &[(usize, usize)]) -> Result<Motif, PatternError> {
        Ok(Self::with_mapping(k, edges)?.0)
    }

    fn with_mapping(k: usize, edges: &[(usize, usize)]) -> Result<(Motif, Vec<u8>), PatternError> {
        if !(2..=MAX_MOTIF_NODES).contains(&k) {
            return Err(PatternError::MotifSize(k));
        }
        let mut raw = 0u32;
        for &(u, v) in edges {
            if u >= k || v >= k {
                return Err(PatternError::NoSuchSlot(u.max(v)));
            }
            if u == v {
                return Err(PatternError::SelfLoop);
            }
            raw |= 1 << pair_bit(k, u, v);
        }
        if !is_weakly_connected(k, raw) {
            return Err(PatternError::DisconnectedResult);
        }
        let (bits, perm) = canonicalize(k, raw);
        Ok((Motif { k, bits }, perm))
    }

    /// Trusted constructor for codes that are already canonical.
    pub(crate) fn from_canonical(k: usize, bits: u32) -> Motif {
        Motif { k, bits }
    }

    /// Builds the motif from an existing raw adjacency code (any labelling).
    pub fn from_raw_code(k: usize, raw: u32) -> Result<Motif, PatternError> {
        if !(2..=MAX_MOTIF_NODES).contains(&k) {
            return Err(PatternError::MotifSize(k));
        }
        if raw >> max_pairs(k) != 0 {
            return Err(PatternError::BadCode(format!("{raw:x}")));
        }
        if !is_weakly_connected(k, raw) {
            return Err(PatternError::DisconnectedResult);
        }
        Ok(Motif { k, bits: canonicalize(k, raw).0 })
    }

    pub fn from_code(code: CanonicalCode) -> Result<Motif, PatternError> {
        Self::from_raw_code(code.k as usize, code.bits)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn code(&self) -> CanonicalCode {
        CanonicalCode { k: self.k as u8, bits: self.bits }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.bits & (1 << pair_bit(self.k, u, v)) != 0
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.k;
        (0..k).flat_map(|u| (0..k).map(move |v| (u, v))).filter(|&(u, v)| self.has_edge(u, v)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.bits.count_ones() as usize
    }
}

impl fmt::Display for Motif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.code().fmt(f)
    }
}

#[derive(Serialize, Deserialize)]
struct MotifJson {
    k: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    code: Option<CanonicalCode>,
}

impl Serialize for Motif {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MotifJson { k: self.k, edges: self.edges(), code: Some(self.code()) }.serialize(s)
    }
}

/// Accepts any labelling; the `code` field, if present, must match.
impl<'de> Deserialize<'de> for Motif {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MotifJson::deserialize(d)?;
        let m = Motif::new(j.k, &j.edges).map_err(serde::de::Error::custom)?;
        if let Some(code) = j.code {
            if code != m.code() {
                return Err(serde::de::Error::custom(format!("code {code} does not match edges ({})", m.code())));
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MotifEdit {
    /// New slot joined to `attach` by one edge (new → attach when `outgoing`).
    AddNode { attach: usize, outgoing: bool },
    RemoveNode { slot: usize },
    AddEdge { from: usize, to: usize },
    RemoveEdge { from: usize, to: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOutcome {
    pub motif: Motif,
    /// Slot of the edited motif → slot of the result (`None` for a removed slot).
    pub slot_map: Vec<Option<usize>>,
}

/// Applies one edit and re-canonicalises.
pub fn edit_motif(motif: &Motif, edit: MotifEdit) -> Result<EditOutcome, PatternError> {
    let k = motif.k();
    let check = |s: usize| if s < k { Ok(()) } else { Err(PatternError::NoSuchSlot(s)) };
    let mut edges = motif.edges();
    let mut new_k = k;
    let mut keep: Vec<Option<usize>> = (0..k).map(Some).collect();
    match edit {
        MotifEdit::AddNode { attach, outgoing } => {
            check(attach)?;
            if k + 1 > MAX_MOTIF_NODES {
                return Err(PatternError::SizeCapExceeded(MAX_MOTIF_NODES));
            }
            new_k = k + 1;
            edges.push(if outgoing { (k, attach) } else { (attach, k) });
        }
        MotifEdit::RemoveNode { slot } => {
            check(slot)?;
            if k <= 2 {
                return Err(PatternError::MotifSize(k - 1));
            }
            new_k = k - 1;
            let shift = |s: usize| if s > slot { s - 1 } else { s };
            edges = edges
                .into_iter()
                .filter(|&(u, v)| u != slot && v != slot)
                .map(|(u, v)| (shift(u), shift(v)))
                .collect();
            keep = (0..k).map(|s| (s != slot).then(|| shift(s))).collect();
        }
        MotifEdit::AddEdge { from, to } => {
            check(from)?;
            check(to)?;
            if from == to {
                return Err(PatternError::SelfLoop);
            }
            if motif.has_edge(from, to) {
                return Err(PatternError::DuplicateEdge(from, to));
            }
            edges.push((from, to));
        }
        MotifEdit::RemoveEdge { from, to } => {
            check(from)?;
            check(to)?;
            if !motif.has_edge(from, to) {
                return Err(PatternError::MissingEdge(from, to));
            }
            edges.retain(|&e| e != (from, to));
        }
    }
    let (result, perm) = Motif::with_mapping(new_k, &edges)?;
    let slot_map = keep.into_iter().map(|s| s.map(|s| perm[s] as usize)).collect();
    Ok(EditOutcome { motif: result, slot_map })
}
