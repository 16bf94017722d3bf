use sha2::{Digest, Sha256};

use crate::scalar::Real;

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a sequence of scalars, widened to little-endian `f64`.
pub(crate) fn scalars_hex<T: Real>(values: impl IntoIterator<Item = T>) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_f64_lossless().to_le_bytes());
    }
    hex::encode(h.finalize())
}
