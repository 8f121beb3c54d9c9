//! Output helpers: stable syndrome hashing, float formatting, and file
//! writing with uniform error handling.

use std::io::Write;
use std::path::Path;

/// FNV-1a over a word sequence; stable across platforms and runs.
pub fn fnv1a64(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    }
    h
}

/// Hash of a defect list (ascending face indices).
pub fn defect_hash(defects: &[usize]) -> u64 {
    fnv1a64(defects.iter().map(|&d| d as u64))
}

/// Hash of a +/-1 sign vector.
pub fn sign_hash(signs: &[i8]) -> u64 {
    fnv1a64(signs.iter().map(|&s| if s == 1 { 1u64 } else { 0 }))
}

/// Shortest-roundtrip float formatting (Rust's default `Display`), with a
/// fixed spelling for non-finite values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v}")
    }
}

pub fn fmt_opt_log(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None => "-inf".to_string(),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_are_stable_and_order_sensitive() {
        assert_eq!(defect_hash(&[]), fnv1a64([]));
        assert_ne!(defect_hash(&[1, 2]), defect_hash(&[2, 1]));
        assert_eq!(defect_hash(&[3, 7]), defect_hash(&[3, 7]));
        assert_ne!(sign_hash(&[1, -1]), sign_hash(&[-1, 1]));
    }

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_opt_log(None), "-inf");
    }
}
