use serde::{Deserialize, Serialize};

/// Sparse feature vector: `(index, count)` pairs sorted by index, counts > 0.
pub type SparseFeatures = Vec<(u32, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedAffiliation {
    pub tokens: Vec<String>,
    pub features: SparseFeatures,
}

/// Lowercased maximal runs of alphanumeric characters.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// 64-bit FNV-1a over the UTF-8 bytes of `token`.
pub fn fnv1a64(token: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in token.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Bucket of `token` in a hashed vocabulary of size `dim`.
pub fn feature_index(token: &str, dim: usize) -> u32 {
    (fnv1a64(token) % dim as u64) as u32
}

pub fn hash_features(tokens: &[String], dim: usize) -> SparseFeatures {
    let mut idx: Vec<u32> = tokens.iter().map(|t| feature_index(t, dim)).collect();
    idx.sort_unstable();
    let mut out: SparseFeatures = Vec::with_capacity(idx.len());
    for i in idx {
        match out.last_mut() {
            Some((j, c)) if *j == i => *c += 1.0,
            _ => out.push((i, 1.0)),
        }
    }
    out
}

pub fn tokenize_affiliation(text: &str, dim: usize) -> TokenizedAffiliation {
    let tokens = tokens(text);
    let features = hash_features(&tokens, dim);
    TokenizedAffiliation { tokens, features }
}
