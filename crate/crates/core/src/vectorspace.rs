//! TF-IDF models over token streams and exhaustive cosine search.
//!
//! Weighting uses raw term counts for tf and the smoothed inverse document
//! frequency `ln((1 + N) / (1 + df)) + 1`; every vector is L2-normalized so
//! cosine similarity reduces to a dot product.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::textpipe::TokenStream;
use crate::{Error, Result};

/// Magic first line of a serialized [`TfidfModel`].
pub const MODEL_MAGIC: &str = "DWMODEL/1";

/// Sparse vector with strictly increasing term indices and non-zero weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a vector from `(index, weight)` pairs. Pairs must be sorted by
    /// strictly increasing index; zero weights are dropped.
    pub fn from_sorted(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut v = Self::default();
        for (idx, w) in pairs {
            if v.indices.last().is_some_and(|&last| last >= idx) {
                return Err(Error::InvalidInput(format!(
                    "sparse indices not strictly increasing at {idx}"
                )));
            }
            if w != 0.0 {
                v.indices.push(idx);
                v.values.push(w);
            }
        }
        Ok(v)
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Dot product against a dense vector indexed by term.
    fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, w)| w * dense[i as usize]).sum()
    }
}

/// Cosine similarity of two unit-norm vectors; 0.0 when either is zero.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    if a.is_zero() || b.is_zero() {
        return 0.0;
    }
    a.dot(b)
}

/// A fitted TF-IDF model for one text field.
#[derive(Debug, Clone)]
pub struct TfidfModel {
    /// Terms in index order (sorted lexicographically).
    terms: Vec<String>,
    vocabulary: HashMap<String, u32>,
    idf: Vec<f64>,
    doc_ids: Vec<String>,
    doc_vectors: Vec<SparseVector>,
}

impl PartialEq for TfidfModel {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
            && self.idf == other.idf
            && self.doc_ids == other.doc_ids
            && self.doc_vectors == other.doc_vectors
    }
}

impl TfidfModel {
    /// Fits a model over `(doc id, tokens)` pairs.
    pub fn fit<'a, I>(documents: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a TokenStream)>,
    {
        let documents: Vec<(&str, &TokenStream)> = documents.into_iter().collect();
        let terms: Vec<String> = documents
            .iter()
            .flat_map(|(_, tokens)| tokens.iter())
            .collect::<BTreeSet<&str>>()
            .into_iter()
            .map(str::to_owned)
            .collect();
        let vocabulary: HashMap<String, u32> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();

        let counts: Vec<Vec<(u32, u32)>> = documents
            .iter()
            .map(|(_, tokens)| term_counts(&vocabulary, tokens))
            .collect();

        let mut df = vec![0u32; terms.len()];
        for doc in &counts {
            for &(idx, _) in doc {
                df[idx as usize] += 1;
            }
        }
        let n = documents.len() as f64;
        let idf = df
            .iter()
            .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
            .collect();

        let mut model = Self {
            terms,
            vocabulary,
            idf,
            doc_ids: documents.iter().map(|(id, _)| (*id).to_owned()).collect(),
            doc_vectors: Vec::new(),
        };
        model.doc_vectors = counts.iter().map(|c| model.weigh(c)).collect();
        model
    }

    /// Vectorizes `tokens`; unknown terms are ignored.
    pub fn transform(&self, tokens: &TokenStream) -> SparseVector {
        self.weigh(&term_counts(&self.vocabulary, tokens))
    }

    fn weigh(&self, counts: &[(u32, u32)]) -> SparseVector {
        let raw: Vec<(u32, f64)> = counts
            .iter()
            .map(|&(idx, tf)| (idx, tf as f64 * self.idf[idx as usize]))
            .collect();
        let norm = raw.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return SparseVector::zero();
        }
        SparseVector {
            indices: raw.iter().map(|&(i, _)| i).collect(),
            values: raw.iter().map(|&(_, w)| w / norm).collect(),
        }
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_index(&self, term: &str) -> Option<u32> {
        self.vocabulary.get(term).copied()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.term_index(term).map(|i| self.idf[i as usize])
    }

    pub fn idf_table(&self) -> &[f64] {
        &self.idf
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_vector(&self, position: usize) -> &SparseVector {
        &self.doc_vectors[position]
    }

    pub fn doc_vector_by_id(&self, id: &str) -> Option<&SparseVector> {
        self.doc_ids
            .iter()
            .position(|d| d == id)
            .map(|p| &self.doc_vectors[p])
    }

    /// Cosine of `query` against every document, in document order.
    pub fn scores(&self, query: &SparseVector) -> Vec<f64> {
        if query.is_zero() {
            return vec![0.0; self.doc_vectors.len()];
        }
        let mut dense = vec![0.0; self.terms.len()];
        for (i, w) in query.iter() {
            if let Some(slot) = dense.get_mut(i as usize) {
                *slot = w;
            }
        }
        self.doc_vectors
            .iter()
            .map(|d| d.dot_dense(&dense))
            .collect()
    }

    /// The `k` best-scoring documents not in `exclude`, by score descending
    /// and then id ascending.
    pub fn top_k(
        &self,
        query: &SparseVector,
        k: usize,
        exclude: &HashSet<&str>,
    ) -> Vec<(String, f64)> {
        let scores = self.scores(query);
        let mut ranked: Vec<(&str, f64)> = self
            .doc_ids
            .iter()
            .map(String::as_str)
            .zip(scores)
            .filter(|(id, _)| !exclude.contains(id))
            .collect();
        ranked.sort_by(|a, b| rank_order((a.0, a.1), (b.0, b.1)));
        ranked.truncate(k);
        ranked
            .into_iter()
            .map(|(id, s)| (id.to_owned(), s))
            .collect()
    }

    /// Serializes the model as a `DWMODEL/1` artifact.
    pub fn write_artifact<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{MODEL_MAGIC}")?;
        let doc = ArtifactRepr {
            kind: "tfidf".into(),
            n_docs: self.doc_ids.len(),
            terms: self.terms.clone(),
            idf: self.idf.clone(),
            docs: self
                .doc_ids
                .iter()
                .zip(&self.doc_vectors)
                .map(|(id, v)| DocRepr {
                    id: id.clone(),
                    indices: v.indices.clone(),
                    values: v.values.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &doc)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn to_artifact_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_artifact(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    /// Decodes a `DWMODEL/1` artifact, validating every structural invariant.
    pub fn from_artifact_bytes(bytes: &[u8]) -> Result<Self> {
        let magic = MODEL_MAGIC.as_bytes();
        let rest = bytes
            .strip_prefix(magic)
            .and_then(|r| r.strip_prefix(b"\n"))
            .ok_or_else(|| Error::Artifact(format!("missing {MODEL_MAGIC} header")))?;
        let repr: ArtifactRepr =
            serde_json::from_slice(rest).map_err(|e| Error::Artifact(format!("body: {e}")))?;
        repr.into_model()
    }
}

/// Ranking order shared by every top-k path: score descending, id ascending.
pub(crate) fn rank_order(a: (&str, f64), b: (&str, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

fn term_counts(vocabulary: &HashMap<String, u32>, tokens: &TokenStream) -> Vec<(u32, u32)> {
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for t in tokens.iter() {
        if let Some(&idx) = vocabulary.get(t) {
            *counts.entry(idx).or_default() += 1;
        }
    }
    let mut counts: Vec<(u32, u32)> = counts.into_iter().collect();
    counts.sort_unstable_by_key(|&(idx, _)| idx);
    counts
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArtifactRepr {
    kind: String,
    n_docs: usize,
    terms: Vec<String>,
    idf: Vec<f64>,
    docs: Vec<DocRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocRepr {
    id: String,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl ArtifactRepr {
    fn into_model(self) -> Result<TfidfModel> {
        let bad = |m: String| Err(Error::Artifact(m));
        if self.kind != "tfidf" {
            return bad(format!("unknown model kind {:?}", self.kind));
        }
        if self.terms.windows(2).any(|w| w[0] >= w[1]) {
            return bad("terms not strictly sorted".into());
        }
        if self.idf.len() != self.terms.len() {
            return bad("idf table length differs from vocabulary".into());
        }
        if self.idf.iter().any(|w| !w.is_finite() || *w < 1.0) {
            return bad("idf values must be finite and >= 1".into());
        }
        if self.docs.len() != self.n_docs {
            return bad(format!(
                "n_docs is {} but {} documents present",
                self.n_docs,
                self.docs.len()
            ));
        }
        let vocab_len = self.terms.len();
        let mut doc_ids = Vec::with_capacity(self.docs.len());
        let mut doc_vectors = Vec::with_capacity(self.docs.len());
        for doc in self.docs {
            if doc.indices.len() != doc.values.len() {
                return bad(format!("document {:?}: ragged vector", doc.id));
            }
            if doc.indices.windows(2).any(|w| w[0] >= w[1])
                || doc.indices.last().is_some_and(|&i| i as usize >= vocab_len)
            {
                return bad(format!("document {:?}: bad term indices", doc.id));
            }
            if doc.values.iter().any(|w| !w.is_finite() || *w == 0.0) {
                return bad(format!("document {:?}: bad weights", doc.id));
            }
            doc_ids.push(doc.id);
            doc_vectors.push(SparseVector {
                indices: doc.indices,
                values: doc.values,
            });
        }
        let vocabulary = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(TfidfModel {
            terms: self.terms,
            vocabulary,
            idf: self.idf,
            doc_ids,
            doc_vectors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(words: &[&str]) -> TokenStream {
        words.iter().copied().collect()
    }

    fn two_docs() -> TfidfModel {
        let d1 = ts(&["cat", "sat"]);
        let d2 = ts(&["cat", "ran"]);
        TfidfModel::fit([("d1", &d1), ("d2", &d2)])
    }

    #[test]
    fn fit_matches_hand_computation() {
        let m = two_docs();
        assert_eq!(m.idf("cat"), Some(1.0));
        assert!((m.idf("sat").unwrap() - (1.5f64.ln() + 1.0)).abs() < 1e-12);
        assert!((m.idf("sat").unwrap() - 1.405465).abs() < 1e-6);
        let v = m.doc_vector(0);
        let cat = m.term_index("cat").unwrap();
        let sat = m.term_index("sat").unwrap();
        assert!((v.get(cat) - 0.57974).abs() < 1e-5);
        assert!((v.get(sat) - 0.81480).abs() < 1e-5);
    }

    #[test]
    fn empty_fit() {
        let m = TfidfModel::fit(std::iter::empty());
        assert_eq!(m.vocabulary_size(), 0);
        assert_eq!(m.n_docs(), 0);
        assert!(m.transform(&ts(&["x"])).is_zero());
    }

    #[test]
    fn single_term_normalizes_to_one() {
        let d = ts(&["a2", "a2"]);
        let m = TfidfModel::fit([("d1", &d)]);
        assert_eq!(m.idf("a2"), Some(1.0));
        assert_eq!(m.doc_vector(0).iter().collect::<Vec<_>>(), [(0, 1.0)]);
    }

    #[test]
    fn transform_cases() {
        let m = two_docs();
        let cat = m.transform(&ts(&["cat"]));
        assert_eq!(
            cat.iter().collect::<Vec<_>>(),
            [(m.term_index("cat").unwrap(), 1.0)]
        );
        assert!(m.transform(&ts(&["zebra"])).is_zero());
        assert_eq!(&m.transform(&ts(&["cat", "sat"])), m.doc_vector(0));
    }

    #[test]
    fn cosine_conventions() {
        let m = two_docs();
        let v = m.doc_vector(0);
        assert!((cosine(v, v) - 1.0).abs() < 1e-9);
        let sat = m.transform(&ts(&["sat"]));
        let ran = m.transform(&ts(&["ran"]));
        assert_eq!(cosine(&sat, &ran), 0.0);
        assert_eq!(cosine(&SparseVector::zero(), v), 0.0);
    }

    #[test]
    fn top_k_cases() {
        let d1 = ts(&["alpha", "shared"]);
        let d2 = ts(&["beta"]);
        let d3 = ts(&["gamma", "shared"]);
        let m = TfidfModel::fit([("d1", &d1), ("d2", &d2), ("d3", &d3)]);
        let none = HashSet::new();

        let q = m.doc_vector(1).clone();
        let hits = m.top_k(&q, 1, &none);
        assert_eq!(hits[0].0, "d2");
        assert!((hits[0].1 - 1.0).abs() < 1e-12);

        assert_eq!(m.top_k(&q, 5, &none).len(), 3);

        // d1 and d3 are symmetric with respect to "shared"
        let q = m.transform(&ts(&["shared"]));
        let ids: Vec<_> = m.top_k(&q, 2, &none).into_iter().map(|r| r.0).collect();
        assert_eq!(ids, ["d1", "d3"]);

        let exclude: HashSet<&str> = ["d1"].into();
        assert_eq!(m.top_k(&q, 1, &exclude)[0].0, "d3");
    }

    #[test]
    fn artifact_round_trip() {
        let m = two_docs();
        let bytes = m.to_artifact_bytes();
        assert!(bytes.starts_with(b"DWMODEL/1\n"));
        let back = TfidfModel::from_artifact_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_artifact_bytes(), bytes);
    }

    #[test]
    fn artifact_rejects_garbage() {
        assert!(TfidfModel::from_artifact_bytes(b"").is_err());
        assert!(TfidfModel::from_artifact_bytes(b"DWMODEL/2\n{}").is_err());
        let bad = br#"DWMODEL/1
{"kind":"tfidf","n_docs":1,"terms":["a"],"idf":[1.0],"docs":[{"id":"x","indices":[3],"values":[1.0]}]}"#;
        assert!(matches!(
            TfidfModel::from_artifact_bytes(bad),
            Err(Error::Artifact(_))
        ));
    }

    #[test]
    fn sparse_from_sorted_validates() {
        assert!(SparseVector::from_sorted([(2, 1.0), (1, 1.0)]).is_err());
        let v = SparseVector::from_sorted([(1, 0.0), (4, 2.0)]).unwrap();
        assert_eq!(v.nnz(), 1);
    }
}
