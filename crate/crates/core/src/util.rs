use sha2::{Digest, Sha256};

/// Scientific notation with 12 significant digits, e.g. `2.50000000000e-1`.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// SHA-256 over the little-endian bit patterns of `values`, hex encoded.
pub fn digest_f64(values: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_bits().to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_round_trips_to_twelve_digits() {
        let x = 1.0 / 3.0;
        let s = fmt_sig12(x);
        assert_eq!(s, "3.33333333333e-1");
        let back: f64 = s.parse().unwrap();
        assert!((back - x).abs() / x < 1e-11);
    }

    #[test]
    fn digest_distinguishes_bit_patterns() {
        assert_ne!(digest_f64(&[0.0]), digest_f64(&[-0.0]));
        assert_eq!(digest_f64(&[1.0, 2.0]), digest_f64(&[1.0, 2.0]));
    }
}
