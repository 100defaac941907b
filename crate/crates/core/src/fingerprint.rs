//! Content hashes used to identify datasets, models and edit results.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the JSON serialisation of `value`.
///
/// Map-typed fields must be ordered (BTreeMap) for the hash to be stable.
pub fn of<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serialisable value");
    of_bytes(&bytes)
}

pub fn of_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
