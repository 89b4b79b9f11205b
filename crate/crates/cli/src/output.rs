//! Deterministic text outputs: CSV fields (12 significant digits), the
//! metadata sidecar, and the scene hash.

use std::fmt::Write as _;

/// Decimal formatting with 12 significant digits; bit-exact across runs.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

/// FNV-1a 64-bit hash of the scene file bytes.
pub fn scene_hash(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a64:{h:016x}")
}

/// Builder for `key = value` sidecar documents. Every sidecar embeds the
/// tool version, the scene hash and the seed.
pub struct Sidecar {
    lines: Vec<(String, String)>,
}

impl Sidecar {
    pub fn new(scene_hash: &str, seed: u64) -> Self {
        let mut s = Sidecar { lines: Vec::new() };
        s.push("version", env!("CARGO_PKG_VERSION"));
        s.push("scene_hash", scene_hash);
        s.push("seed", seed.to_string());
        s
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
