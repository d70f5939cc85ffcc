//! Sentence embedding providers for the semantic layer.
//!
//! Two backends ship: a deterministic character-trigram hasher and a lookup
//! table of precomputed vectors (for vectors produced by an external encoder).

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Sparse storage of a fixed-dimension real vector. Entries are sorted by
/// index and never store an explicit zero.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl EmbeddingVector {
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid(
                "embedding dimension must be positive".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("embedding has non-finite entries".into()));
        }
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .collect();
        Ok(EmbeddingVector {
            dim: values.len(),
            entries,
        })
    }

    /// Builds from `(index, value)` pairs; repeated indices are summed.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid(
                "embedding dimension must be positive".into(),
            ));
        }
        let mut entries: Vec<(u32, f64)> = pairs.into_iter().collect();
        if let Some((i, _)) = entries.iter().find(|(i, _)| *i as usize >= dim) {
            return Err(Error::Invalid(format!(
                "index {i} out of range for dim {dim}"
            )));
        }
        entries.sort_by_key(|(i, _)| *i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|(_, v)| *v != 0.0);
        if merged.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::Invalid("embedding has non-finite entries".into()));
        }
        Ok(EmbeddingVector {
            dim,
            entries: merged,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Non-zero entries, sorted by index.
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(index as u32), |(i, _)| *i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &EmbeddingVector) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        let mut sum = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        Ok(sum)
    }

    pub fn normalized(&self) -> Result<EmbeddingVector> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(EmbeddingVector {
            dim: self.dim,
            entries: self.entries.iter().map(|&(i, v)| (i, v / norm)).collect(),
        })
    }

    /// Arithmetic mean of equal-dimension vectors.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a EmbeddingVector>) -> Result<Self> {
        let mut dim = None;
        let mut count = 0usize;
        let mut pairs = Vec::new();
        for v in vectors {
            match dim {
                None => dim = Some(v.dim),
                Some(d) if d != v.dim => {
                    return Err(Error::DimensionMismatch {
                        left: d,
                        right: v.dim,
                    })
                }
                _ => {}
            }
            count += 1;
            pairs.extend_from_slice(&v.entries);
        }
        let dim = dim.ok_or(Error::EmptyInput)?;
        let summed = Self::from_pairs(dim, pairs)?;
        Ok(EmbeddingVector {
            dim,
            entries: summed
                .entries
                .into_iter()
                .map(|(i, v)| (i, v / count as f64))
                .collect(),
        })
    }
}

/// Cosine similarity. Fails on dimension mismatch or a zero vector.
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    let dot = u.dot(v)?;
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector>;
}

pub const LEXICAL_DIM: usize = 32768;
pub const DEFAULT_LEXICAL_SEED: u64 = 0x5eed_c0de;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a with the offset basis xor-ed with `seed`.
pub fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET ^ seed, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Hashed character-trigram counts, L2-normalized.
///
/// The lowercased text is wrapped as `^text$` and every overlapping window
/// of three characters is hashed into one of `dim` buckets.
#[derive(Clone, Debug)]
pub struct LexicalEmbedder {
    seed: u64,
    dim: usize,
}

impl Default for LexicalEmbedder {
    fn default() -> Self {
        LexicalEmbedder {
            seed: DEFAULT_LEXICAL_SEED,
            dim: LEXICAL_DIM,
        }
    }
}

impl LexicalEmbedder {
    pub fn new(seed: u64, dim: usize) -> Self {
        assert!(dim > 0, "dim must be positive");
        LexicalEmbedder { seed, dim }
    }

    pub fn trigrams(text: &str) -> Vec<String> {
        let padded: Vec<char> = std::iter::once('^')
            .chain(text.to_lowercase().chars())
            .chain(std::iter::once('$'))
            .collect();
        padded.windows(3).map(|w| w.iter().collect()).collect()
    }

    pub fn bucket(&self, trigram: &str) -> u32 {
        (fnv1a64(self.seed, trigram.as_bytes()) % self.dim as u64) as u32
    }
}

impl EmbeddingProvider for LexicalEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::EmptyInput);
        }
        let pairs = Self::trigrams(text)
            .into_iter()
            .map(|t| (self.bucket(&t), 1.0));
        EmbeddingVector::from_pairs(self.dim, pairs)?.normalized()
    }
}

/// Exact-text lookup of precomputed vectors.
#[derive(Clone, Debug)]
pub struct VectorStore {
    dim: usize,
    vectors: HashMap<String, EmbeddingVector>,
}

const VECTOR_MAGIC: &[u8; 8] = b"CMVECS01";

impl VectorStore {
    pub fn from_entries(entries: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let mut dim = None;
        let mut vectors = HashMap::with_capacity(entries.len());
        for (text, values) in entries {
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::Config(format!(
                        "vector file has mixed dimensions ({d} and {})",
                        values.len()
                    )))
                }
                _ => {}
            }
            vectors.insert(text, EmbeddingVector::from_dense(&values)?);
        }
        let dim = dim.ok_or_else(|| Error::Config("vector file is empty".into()))?;
        Ok(VectorStore { dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for VectorStore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        if text.trim().is_empty() {
            return Err(Error::EmptyInput);
        }
        self.vectors
            .get(text)
            .cloned()
            .ok_or_else(|| Error::ProviderUnavailable(text.to_string()))
    }
}

/// Loads a vector file: either the binary format written by [`write_vectors`]
/// or JSON (an object mapping text to an array of numbers).
pub fn load_vectors(path: &Path) -> Result<VectorStore> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(VECTOR_MAGIC) {
        decode_binary(&bytes[VECTOR_MAGIC.len()..])
    } else {
        let map: serde_json::Map<String, serde_json::Value> = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Config(format!("vector file {}: {e}", path.display())))?;
        let mut entries = Vec::with_capacity(map.len());
        for (text, value) in map {
            let values: Vec<f64> = serde_json::from_value(value)
                .map_err(|e| Error::Config(format!("vector for {text:?}: {e}")))?;
            entries.push((text, values));
        }
        VectorStore::from_entries(entries)
    }
}

fn decode_binary(mut data: &[u8]) -> Result<VectorStore> {
    fn read_u32(data: &mut &[u8]) -> Result<u32> {
        let mut buf = [0u8; 4];
        data.read_exact(&mut buf)
            .map_err(|_| Error::Config("vector file truncated".into()))?;
        Ok(u32::from_le_bytes(buf))
    }
    let dim = read_u32(&mut data)? as usize;
    let count = read_u32(&mut data)? as usize;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let len = read_u32(&mut data)? as usize;
        if data.len() < len {
            return Err(Error::Config("vector file truncated".into()));
        }
        let (text, rest) = data.split_at(len);
        let text = String::from_utf8(text.to_vec())
            .map_err(|_| Error::Config("vector file: text is not UTF-8".into()))?;
        data = rest;
        let mut values = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut buf = [0u8; 8];
            data.read_exact(&mut buf)
                .map_err(|_| Error::Config("vector file truncated".into()))?;
            values.push(f64::from_le_bytes(buf));
        }
        entries.push((text, values));
    }
    if !data.is_empty() {
        return Err(Error::Config("vector file has trailing bytes".into()));
    }
    VectorStore::from_entries(entries)
}

/// Writes the binary vector format: magic, dim, count, then
/// `(u32 length, UTF-8 text, dim × f64)` records, all little-endian.
pub fn write_vectors(path: &Path, entries: &[(String, Vec<f64>)]) -> Result<()> {
    let dim = entries.first().map(|(_, v)| v.len()).unwrap_or(0);
    if entries.iter().any(|(_, v)| v.len() != dim) {
        return Err(Error::Invalid("mixed vector dimensions".into()));
    }
    let mut out = Vec::new();
    out.extend_from_slice(VECTOR_MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    for (text, values) in entries {
        out.extend_from_slice(&(text.len() as u32).to_le_bytes());
        out.extend_from_slice(text.as_bytes());
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))
}

/// Backend selector as given on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedderSpec {
    Lexical,
    Vectors(std::path::PathBuf),
}

impl std::str::FromStr for EmbedderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "lexical" {
            Ok(EmbedderSpec::Lexical)
        } else if let Some(path) = s.strip_prefix("vectors:") {
            Ok(EmbedderSpec::Vectors(path.into()))
        } else {
            Err(Error::Config(format!(
                "unknown embedder {s:?} (expected `lexical` or `vectors:<path>`)"
            )))
        }
    }
}

impl EmbedderSpec {
    pub fn build(&self) -> Result<Box<dyn EmbeddingProvider>> {
        match self {
            EmbedderSpec::Lexical => Ok(Box::new(LexicalEmbedder::default())),
            EmbedderSpec::Vectors(path) => Ok(Box::new(load_vectors(path)?)),
        }
    }
}
