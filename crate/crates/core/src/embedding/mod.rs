//! Material embeddings and cosine-similarity matching.
//!
//! An [`EmbeddingDatabase`] is built once from preprocessed material
//! embeddings and is read-only afterwards. Queries are matched by scanning
//! every record with [`cosine_similarity`]; ties go to the record inserted
//! first.

mod format;

pub use format::{parse_text_import, read_database, write_database, FormatError, MAGIC, VERSION};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("embedding has zero norm")]
    DegenerateVector,
    #[error("embedding must have at least one component")]
    EmptyVector,
    #[error("embedding component {index} is not finite")]
    NonFinite { index: usize },
    #[error("duplicate material name {0:?}")]
    DuplicateMaterial(String),
    #[error("material name must not be empty")]
    EmptyName,
    #[error("database has no records")]
    EmptyDatabase,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("threshold {0} outside [-1, 1]")]
    InvalidThreshold(f64),
}

/// A finite, non-empty feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(components: Vec<f64>) -> Result<Self, EmbeddingError> {
        if components.is_empty() {
            return Err(EmbeddingError::EmptyVector);
        }
        if let Some(index) = components.iter().position(|c| !c.is_finite()) {
            return Err(EmbeddingError::NonFinite { index });
        }
        Ok(Self(components))
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, EmbeddingError> {
        Self::new(self.0.iter().map(|c| c * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = EmbeddingError;

    fn try_from(value: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(value: EmbeddingVector) -> Self {
        value.0
    }
}

/// Cosine of the angle between `a` and `b`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if a.dimension() != b.dimension() {
        return Err(EmbeddingError::Dimension {
            expected: a.dimension(),
            actual: b.dimension(),
        });
    }
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::DegenerateVector);
    }
    Ok(cosine_with_norms(a.components(), na, b.components(), nb))
}

fn cosine_with_norms(a: &[f64], norm_a: f64, b: &[f64], norm_b: f64) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (norm_a * norm_b)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRecord {
    pub name: String,
    pub audio_key: String,
    pub embedding: EmbeddingVector,
}

/// Immutable collection of material records sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDatabase {
    dimension: usize,
    records: Vec<MaterialRecord>,
    norms: Vec<f64>,
}

/// One `(name, embedding, audio_key)` entry for [`EmbeddingDatabase::build`].
pub type DatabaseEntry = (String, EmbeddingVector, String);

impl EmbeddingDatabase {
    pub fn build<I>(entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = DatabaseEntry>,
    {
        let mut records = Vec::new();
        let mut norms = Vec::new();
        let mut seen = HashSet::new();
        let mut dimension = None;
        for (name, embedding, audio_key) in entries {
            if name.is_empty() {
                return Err(EmbeddingError::EmptyName);
            }
            let dim = *dimension.get_or_insert(embedding.dimension());
            if embedding.dimension() != dim {
                return Err(EmbeddingError::Dimension {
                    expected: dim,
                    actual: embedding.dimension(),
                });
            }
            let norm = embedding.norm();
            if norm == 0.0 {
                return Err(EmbeddingError::DegenerateVector);
            }
            if !seen.insert(name.clone()) {
                return Err(EmbeddingError::DuplicateMaterial(name));
            }
            norms.push(norm);
            records.push(MaterialRecord {
                name,
                audio_key,
                embedding,
            });
        }
        Ok(Self {
            dimension: dimension.unwrap_or(0),
            records,
            norms,
        })
    }

    /// Dimension of every stored embedding; 0 for an empty database.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn records(&self) -> &[MaterialRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&MaterialRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Similarity of `query` against every record, in insertion order.
    pub fn similarities(&self, query: &EmbeddingVector) -> Result<Vec<f64>, EmbeddingError> {
        if self.records.is_empty() {
            return Err(EmbeddingError::EmptyDatabase);
        }
        if query.dimension() != self.dimension {
            return Err(EmbeddingError::Dimension {
                expected: self.dimension,
                actual: query.dimension(),
            });
        }
        let nq = query.norm();
        if nq == 0.0 {
            return Err(EmbeddingError::DegenerateVector);
        }
        Ok(self
            .records
            .iter()
            .zip(&self.norms)
            .map(|(r, &nr)| cosine_with_norms(query.components(), nq, r.embedding.components(), nr))
            .collect())
    }

    fn ranked(&self, query: &EmbeddingVector) -> Result<Vec<(usize, f64)>, EmbeddingError> {
        let mut ranked: Vec<(usize, f64)> = self.similarities(query)?.into_iter().enumerate().collect();
        // stable sort keeps insertion order among equal similarities
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(ranked)
    }

    /// Best record for `query`, or `None` when its similarity is below `threshold`.
    pub fn match_material(
        &self,
        query: &EmbeddingVector,
        threshold: f64,
    ) -> Result<Option<MatchResult>, EmbeddingError> {
        if !(-1.0..=1.0).contains(&threshold) {
            return Err(EmbeddingError::InvalidThreshold(threshold));
        }
        let ranked = self.ranked(query)?;
        let (best, similarity) = ranked[0];
        if similarity < threshold {
            return Ok(None);
        }
        let record = &self.records[best];
        Ok(Some(MatchResult {
            material: record.name.clone(),
            audio_key: record.audio_key.clone(),
            similarity,
            ranked_candidates: ranked
                .into_iter()
                .map(|(i, s)| Candidate {
                    name: self.records[i].name.clone(),
                    similarity: s,
                })
                .collect(),
        }))
    }

    /// The `k` most similar records, descending, insertion order on ties.
    pub fn top_k(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<Candidate>, EmbeddingError> {
        if k == 0 {
            return Err(EmbeddingError::InvalidK);
        }
        let mut ranked = self.ranked(query)?;
        ranked.truncate(k);
        Ok(ranked
            .into_iter()
            .map(|(i, s)| Candidate {
                name: self.records[i].name.clone(),
                similarity: s,
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub material: String,
    pub audio_key: String,
    pub similarity: f64,
    /// All records ordered by similarity (descending) then insertion index.
    pub ranked_candidates: Vec<Candidate>,
}

impl fmt::Display for MatchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:.6})", self.material, self.similarity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(c.to_vec()).unwrap()
    }

    fn db2() -> EmbeddingDatabase {
        EmbeddingDatabase::build(vec![
            ("wood".to_string(), v(&[1.0, 0.0]), "WS".to_string()),
            ("metal".to_string(), v(&[0.0, 1.0]), "MW".to_string()),
        ])
        .unwrap()
    }

    #[test]
    fn cosine_basic_cases() {
        assert_eq!(
            cosine_similarity(&v(&[1.0, 0.0, 0.0]), &v(&[1.0, 0.0, 0.0])).unwrap(),
            1.0
        );
        assert_eq!(cosine_similarity(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        // dot = 32, |a||b| = sqrt(14 * 77)
        let c = cosine_similarity(&v(&[1.0, 2.0, 3.0]), &v(&[4.0, 5.0, 6.0])).unwrap();
        assert!((c - 0.974632).abs() < 1e-6, "{c}");
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine_similarity(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(EmbeddingError::Dimension { .. })
        ));
        assert_eq!(
            cosine_similarity(&v(&[0.0, 0.0]), &v(&[1.0, 2.0])),
            Err(EmbeddingError::DegenerateVector)
        );
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert_eq!(EmbeddingVector::new(vec![]), Err(EmbeddingError::EmptyVector));
        assert_eq!(
            EmbeddingVector::new(vec![1.0, f64::NAN]),
            Err(EmbeddingError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn build_errors() {
        let dup = EmbeddingDatabase::build(vec![
            ("wood".to_string(), v(&[1.0]), "a".to_string()),
            ("wood".to_string(), v(&[2.0]), "b".to_string()),
        ]);
        assert_eq!(dup, Err(EmbeddingError::DuplicateMaterial("wood".into())));
        let mixed = EmbeddingDatabase::build(vec![
            ("a".to_string(), v(&vec![1.0; 64]), "a".to_string()),
            ("b".to_string(), v(&vec![1.0; 128]), "b".to_string()),
        ]);
        assert!(matches!(
            mixed,
            Err(EmbeddingError::Dimension {
                expected: 64,
                actual: 128
            })
        ));
        let zero = EmbeddingDatabase::build(vec![("a".to_string(), v(&[0.0, 0.0]), "a".to_string())]);
        assert_eq!(zero, Err(EmbeddingError::DegenerateVector));
    }

    #[test]
    fn exact_member_lookup() {
        let m = db2().match_material(&v(&[1.0, 0.0]), 0.5).unwrap().unwrap();
        assert_eq!(m.material, "wood");
        assert_eq!(m.similarity, 1.0);
        assert_eq!(m.audio_key, "WS");
    }

    #[test]
    fn below_threshold_is_no_match() {
        // cos([0.9, 0.1], [1, 0]) = 0.9 / sqrt(0.82) = 0.993884
        let best = 0.9 / 0.82f64.sqrt();
        assert!(best < 0.99 + 0.004 && best > 0.99);
        let m = db2().match_material(&v(&[0.9, 0.1]), 0.99).unwrap();
        assert_eq!(m.map(|m| m.material), Some("wood".to_string()));
        let none = db2().match_material(&v(&[0.9, 0.1]), 0.995).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn ties_prefer_insertion_order() {
        let db = EmbeddingDatabase::build(vec![
            ("b".to_string(), v(&[1.0, 1.0]), "x".to_string()),
            ("a".to_string(), v(&[2.0, 2.0]), "y".to_string()),
        ])
        .unwrap();
        let m = db.match_material(&v(&[3.0, 3.0]), 0.0).unwrap().unwrap();
        assert_eq!(m.material, "b");
    }

    #[test]
    fn empty_database_and_bad_k() {
        let db = EmbeddingDatabase::build(Vec::new()).unwrap();
        assert_eq!(db.match_material(&v(&[1.0]), 0.0), Err(EmbeddingError::EmptyDatabase));
        assert_eq!(db2().top_k(&v(&[1.0, 0.0]), 0), Err(EmbeddingError::InvalidK));
    }

    #[test]
    fn top_k_truncation_and_consistency() {
        let db = db2();
        let q = v(&[0.3, 0.7]);
        let all = db.top_k(&q, 10).unwrap();
        assert_eq!(all.len(), 2);
        let best = db.match_material(&q, -1.0).unwrap().unwrap();
        let one = db.top_k(&q, 1).unwrap();
        assert_eq!(one[0].name, best.material);
        assert_eq!(one[0].similarity, best.similarity);
    }
}
