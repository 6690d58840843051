//! Shared output formatting.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with keys in declaration order and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// SHA-256 of the compact JSON encoding.
pub fn json_digest<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_roundtrip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }
}
