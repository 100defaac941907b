//! Canonical adjacency codes for small digraphs.
//!
//! A k-node digraph without self-loops is a bitset over the k(k-1) ordered
//! slot pairs. Its canonical code is the minimum bitset over all k! slot
//! relabelings. For k <= 5 a full raw→canonical table is built once by
//! visiting codes in increasing order and stamping each orbit with its first
//! (hence minimal) member; k = 6 falls back to scanning all 720 relabelings.

use std::sync::OnceLock;

use super::PatternError;

pub const TABLE_MAX_K: usize = 5;

pub fn max_pairs(k: usize) -> usize {
    k * k.saturating_sub(1)
}

/// Bit position of the ordered pair `(i, j)`, `i != j`.
pub fn pair_bit(k: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < k && j < k);
    i * (k - 1) + if j < i { j } else { j - 1 }
}

pub(crate) struct PermSet {
    pub(crate) perms: Vec<Vec<u8>>,
    /// Per permutation, old bit position -> new bit position.
    bit_maps: Vec<Vec<u8>>,
    /// Index of each permutation's inverse.
    inverse: Vec<usize>,
}

fn permutations(k: usize) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Vec<u8>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for s in 0..used.len() {
            if !used[s] {
                used[s] = true;
                prefix.push(s as u8);
                rec(prefix, used, out);
                prefix.pop();
                used[s] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

impl PermSet {
    fn new(k: usize) -> Self {
        let perms = permutations(k);
        let bit_maps = perms
            .iter()
            .map(|p| {
                let mut m = vec![0u8; max_pairs(k)];
                for i in 0..k {
                    for j in 0..k {
                        if i != j {
                            m[pair_bit(k, i, j)] = pair_bit(k, p[i] as usize, p[j] as usize) as u8;
                        }
                    }
                }
                m
            })
            .collect();
        let inverse = perms
            .iter()
            .map(|p| {
                let inv = invert(p);
                perms.iter().position(|q| *q == inv).expect("inverse permutation")
            })
            .collect();
        PermSet { perms, bit_maps, inverse }
    }

    pub(crate) fn apply(&self, idx: usize, code: u32) -> u32 {
        let map = &self.bit_maps[idx];
        let mut out = 0u32;
        let mut rest = code;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            out |= 1 << map[b];
            rest &= rest - 1;
        }
        out
    }
}

pub(crate) fn perm_set(k: usize) -> &'static PermSet {
    static SETS: OnceLock<Vec<PermSet>> = OnceLock::new();
    &SETS.get_or_init(|| (0..=6).map(PermSet::new).collect())[k]
}

/// Raw code -> (canonical code, index of a permutation mapping raw onto it).
struct CanonTable {
    canon: Vec<u32>,
    perm: Vec<u8>,
}

fn build_table(k: usize) -> CanonTable {
    let size = 1usize << max_pairs(k);
    let ps = perm_set(k);
    let mut canon = vec![u32::MAX; size];
    let mut perm = vec![0u8; size];
    for c in 0..size {
        if canon[c] != u32::MAX {
            continue;
        }
        let c32 = c as u32;
        for pi in 0..ps.perms.len() {
            let image = ps.apply(pi, c32) as usize;
            if canon[image] == u32::MAX {
                canon[image] = c32;
                // perm `pi` maps c -> image; its inverse maps image -> c.
                perm[image] = ps.inverse[pi] as u8;
            }
        }
    }
    CanonTable { canon, perm }
}

fn invert(p: &[u8]) -> Vec<u8> {
    let mut inv = vec![0u8; p.len()];
    for (i, &pi) in p.iter().enumerate() {
        inv[pi as usize] = i as u8;
    }
    inv
}

fn table(k: usize) -> &'static CanonTable {
    static TABLES: OnceLock<Vec<CanonTable>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=TABLE_MAX_K).map(build_table).collect())[k]
}

/// Canonical code and the slot permutation (old slot -> new slot) producing it.
pub(crate) fn canonicalize(k: usize, code: u32) -> (u32, Vec<u8>) {
    let ps = perm_set(k);
    if k <= TABLE_MAX_K {
        let t = table(k);
        let c = code as usize;
        (t.canon[c], ps.perms[t.perm[c] as usize].clone())
    } else {
        let (best, idx) = (0..ps.perms.len())
            .map(|i| (ps.apply(i, code), i))
            .min()
            .expect("at least one permutation");
        (best, ps.perms[idx].clone())
    }
}

/// Canonical code only; table lookup for k <= 5.
pub(crate) fn canonical_code(k: usize, code: u32) -> u32 {
    if k <= TABLE_MAX_K {
        table(k).canon[code as usize]
    } else {
        canonicalize(k, code).0
    }
}

pub fn is_weakly_connected(k: usize, code: u32) -> bool {
    if k <= 1 {
        return true;
    }
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut groups = k;
    for i in 0..k {
        for j in 0..k {
            if i != j && code & (1 << pair_bit(k, i, j)) != 0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                    groups -= 1;
                }
            }
        }
    }
    groups == 1
}

/// All weakly connected k-node digraph classes (no self-loops), as
/// ascending canonical codes.
pub fn enumerate_motif_classes(k: usize) -> Result<Vec<super::Motif>, PatternError> {
    if !(3..=TABLE_MAX_K).contains(&k) {
        return Err(PatternError::MotifSize(k));
    }
    let t = table(k);
    Ok(t.canon
        .iter()
        .enumerate()
        .filter(|&(raw, &c)| raw as u32 == c && is_weakly_connected(k, c))
        .map(|(_, &c)| super::Motif::from_canonical(k, c))
        .collect())
}
