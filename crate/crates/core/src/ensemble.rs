//! Four-field TF-IDF ensemble and draft-question recommendations.
//!
//! Every post is vectorized under four independent models: its question
//! content, its instructor answer, its student answer and its follow-up
//! discussion. A draft is scored against a post by the weighted average of
//! the four per-field cosines.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{timestamp, ClassCorpus, Post};
use crate::textpipe::{preprocess, TokenStream};
use crate::vectorspace::{rank_order, TfidfModel};
use crate::{Error, Result};

/// Number of suggestions shown while drafting.
pub const DEFAULT_K: usize = 5;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;
const ENSEMBLE_MAGIC: &str = "DWENSEMBLE/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Title, body and tags.
    QuestionContent,
    InstructorAnswer,
    StudentAnswer,
    /// Every follow-up's text and contributions.
    Followups,
}

impl FieldKind {
    pub const ALL: [FieldKind; 4] = [
        FieldKind::QuestionContent,
        FieldKind::InstructorAnswer,
        FieldKind::StudentAnswer,
        FieldKind::Followups,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::QuestionContent => "question_content",
            FieldKind::InstructorAnswer => "instructor_answer",
            FieldKind::StudentAnswer => "student_answer",
            FieldKind::Followups => "followups",
        }
    }

    /// Raw text of this field for `post`; empty when the field is absent.
    pub fn text_of(self, post: &Post) -> String {
        match self {
            FieldKind::QuestionContent => join_nonempty(
                [post.title.as_str(), post.body.as_str()]
                    .into_iter()
                    .chain(post.tags.iter().map(String::as_str)),
            ),
            FieldKind::InstructorAnswer => post.instructor_answer.clone().unwrap_or_default(),
            FieldKind::StudentAnswer => post.student_answer.clone().unwrap_or_default(),
            FieldKind::Followups => join_nonempty(post.followups.iter().flat_map(|f| {
                std::iter::once(f.text.as_str()).chain(f.contributions.iter().map(String::as_str))
            })),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn join_nonempty<'a>(parts: impl Iterator<Item = &'a str>) -> String {
    parts
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// One value per [`FieldKind`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerField<T> {
    pub question_content: T,
    pub instructor_answer: T,
    pub student_answer: T,
    pub followups: T,
}

impl<T> PerField<T> {
    pub fn from_fn(mut f: impl FnMut(FieldKind) -> T) -> Self {
        Self {
            question_content: f(FieldKind::QuestionContent),
            instructor_answer: f(FieldKind::InstructorAnswer),
            student_answer: f(FieldKind::StudentAnswer),
            followups: f(FieldKind::Followups),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (FieldKind, &T)> {
        FieldKind::ALL.into_iter().map(move |k| (k, &self[k]))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerField<U> {
        PerField::from_fn(|k| f(&self[k]))
    }
}

impl<T> Index<FieldKind> for PerField<T> {
    type Output = T;

    fn index(&self, kind: FieldKind) -> &T {
        match kind {
            FieldKind::QuestionContent => &self.question_content,
            FieldKind::InstructorAnswer => &self.instructor_answer,
            FieldKind::StudentAnswer => &self.student_answer,
            FieldKind::Followups => &self.followups,
        }
    }
}

impl<T> IndexMut<FieldKind> for PerField<T> {
    fn index_mut(&mut self, kind: FieldKind) -> &mut T {
        match kind {
            FieldKind::QuestionContent => &mut self.question_content,
            FieldKind::InstructorAnswer => &mut self.instructor_answer,
            FieldKind::StudentAnswer => &mut self.student_answer,
            FieldKind::Followups => &mut self.followups,
        }
    }
}

/// Field weights: non-negative, summing to one, with question content
/// strictly the heaviest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PerField<f64>", into = "PerField<f64>")]
pub struct Weights(PerField<f64>);

impl Weights {
    pub fn new(weights: PerField<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidWeights(m));
        for (kind, &w) in weights.iter() {
            if !w.is_finite() || w < 0.0 {
                return bad(format!("{kind} weight {w} must be finite and non-negative"));
            }
        }
        let sum: f64 = weights.iter().map(|(_, w)| w).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return bad(format!("weights sum to {sum}, expected 1"));
        }
        let question = weights.question_content;
        if let Some((kind, w)) = weights.iter().skip(1).find(|(_, &w)| w >= question) {
            return bad(format!(
                "question_content weight {question} must exceed {kind} weight {w}"
            ));
        }
        Ok(Self(weights))
    }

    /// Scales raw non-negative weights so they sum to one, then validates.
    pub fn normalized(raw: PerField<f64>) -> Result<Self> {
        let sum: f64 = raw.iter().map(|(_, w)| w).sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
        }
        Self::new(raw.map(|w| w / sum))
    }

    pub fn get(&self, kind: FieldKind) -> f64 {
        self.0[kind]
    }

    pub fn as_per_field(&self) -> &PerField<f64> {
        &self.0
    }

    /// Weighted sum of per-field scores, accumulated in field order.
    pub fn combine(&self, scores: &PerField<f64>) -> f64 {
        FieldKind::ALL
            .iter()
            .map(|&k| self.0[k] * scores[k])
            .fold(0.0, |acc, x| acc + x)
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self(PerField {
            question_content: 0.70,
            instructor_answer: 0.10,
            student_answer: 0.10,
            followups: 0.10,
        })
    }
}

impl TryFrom<PerField<f64>> for Weights {
    type Error = Error;

    fn try_from(value: PerField<f64>) -> Result<Self> {
        Weights::new(value)
    }
}

impl From<Weights> for PerField<f64> {
    fn from(w: Weights) -> Self {
        w.0
    }
}

/// A question being composed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftQuestion {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl DraftQuestion {
    pub fn new(title: impl Into<String>, body: impl Into<String>, tags: Vec<String>) -> Self {
        Self {
            title: title.into(),
            body: body.into(),
            tags,
        }
    }

    /// Draft built from an existing post's question content.
    pub fn from_post(post: &Post) -> Self {
        Self::new(post.title.clone(), post.body.clone(), post.tags.clone())
    }

    pub fn is_empty(&self) -> bool {
        self.title.trim().is_empty()
            && self.body.trim().is_empty()
            && self.tags.iter().all(|t| t.trim().is_empty())
    }

    /// Title, body and tags joined by single spaces.
    pub fn text(&self) -> String {
        join_nonempty(
            [self.title.as_str(), self.body.as_str()]
                .into_iter()
                .chain(self.tags.iter().map(String::as_str)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub post_id: String,
    pub score: f64,
    pub per_field_scores: PerField<f64>,
}

/// The four fitted field models of one class plus their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    class_id: String,
    models: PerField<TfidfModel>,
    weights: Weights,
    trained_at: DateTime<Utc>,
}

impl EnsembleModel {
    /// Fits all four field models over `corpus`.
    pub fn fit(corpus: &ClassCorpus, weights: Weights) -> Self {
        Self::fit_at(corpus, weights, Utc::now())
    }

    /// [`EnsembleModel::fit`] with an explicit training timestamp.
    pub fn fit_at(corpus: &ClassCorpus, weights: Weights, trained_at: DateTime<Utc>) -> Self {
        let models = PerField::from_fn(|kind| {
            let docs: Vec<TokenStream> = corpus
                .posts()
                .iter()
                .map(|p| preprocess(&kind.text_of(p)))
                .collect();
            TfidfModel::fit(
                corpus
                    .posts()
                    .iter()
                    .zip(&docs)
                    .map(|(p, d)| (p.id.as_str(), d)),
            )
        });
        Self {
            class_id: corpus.class_id().to_owned(),
            models,
            weights,
            trained_at,
        }
    }

    pub fn class_id(&self) -> &str {
        &self.class_id
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn trained_at(&self) -> DateTime<Utc> {
        self.trained_at
    }

    pub fn model(&self, kind: FieldKind) -> &TfidfModel {
        &self.models[kind]
    }

    pub fn n_posts(&self) -> usize {
        self.models.question_content.n_docs()
    }

    pub fn post_ids(&self) -> &[String] {
        self.models.question_content.doc_ids()
    }

    /// Per-field cosine of the draft against every post, in post order.
    fn field_scores(&self, draft: &DraftQuestion) -> Result<PerField<Vec<f64>>> {
        if draft.is_empty() {
            return Err(Error::EmptyDraft);
        }
        let tokens = preprocess(&draft.text());
        Ok(self
            .models
            .map(|model| model.scores(&model.transform(&tokens))))
    }

    fn recommendation(&self, scores: &PerField<Vec<f64>>, i: usize) -> Recommendation {
        let per_field = scores.map(|s| s[i]);
        Recommendation {
            post_id: self.post_ids()[i].clone(),
            score: self.weights.combine(&per_field),
            per_field_scores: per_field,
        }
    }

    /// One recommendation per post, in corpus order.
    pub fn score_draft(&self, draft: &DraftQuestion) -> Result<Vec<Recommendation>> {
        let scores = self.field_scores(draft)?;
        Ok((0..self.n_posts())
            .map(|i| self.recommendation(&scores, i))
            .collect())
    }

    /// The `k` best posts for `draft`, best first. Zero-score posts are
    /// never returned.
    pub fn recommend(&self, draft: &DraftQuestion, k: usize) -> Result<Vec<Recommendation>> {
        let scores = self.field_scores(draft)?;
        let ids = self.post_ids();
        let mut ranked: Vec<(usize, f64)> = (0..self.n_posts())
            .map(|i| (i, self.weights.combine(&scores.map(|s| s[i]))))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        ranked.sort_by(|a, b| rank_order((&ids[a.0], a.1), (&ids[b.0], b.1)));
        ranked.truncate(k);
        Ok(ranked
            .into_iter()
            .map(|(i, _)| self.recommendation(&scores, i))
            .collect())
    }

    /// Writes the ensemble into `dir`: one `DWMODEL/1` file per field plus
    /// an `ensemble.json` manifest.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for kind in FieldKind::ALL {
            std::fs::write(
                dir.join(model_file_name(kind)),
                self.models[kind].to_artifact_bytes(),
            )?;
        }
        let manifest = Manifest {
            format: ENSEMBLE_MAGIC.into(),
            class_id: self.class_id.clone(),
            trained_at: self.trained_at,
            weights: self.weights,
            models: PerField::from_fn(model_file_name),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(dir.join(MANIFEST_FILE), bytes)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest_path = dir.join(MANIFEST_FILE);
        if !manifest_path.exists() {
            return Err(Error::NotFound(manifest_path));
        }
        let manifest = parse_manifest(&std::fs::read(&manifest_path)?)?;
        let mut models = Vec::with_capacity(4);
        for (_, file) in manifest.models.iter() {
            if file.contains('/') || file.contains("..") {
                return Err(Error::Artifact(format!(
                    "model path {file:?} escapes directory"
                )));
            }
            models.push(TfidfModel::from_artifact_bytes(&std::fs::read(
                dir.join(file),
            )?)?);
        }
        let mut models = models.into_iter();
        let models = PerField::from_fn(|_| models.next().expect("four models"));
        Self::assemble(
            manifest.class_id,
            models,
            manifest.weights,
            manifest.trained_at,
        )
    }

    /// Builds an ensemble from already-fitted field models, checking that
    /// they cover the same posts in the same order.
    pub fn assemble(
        class_id: String,
        models: PerField<TfidfModel>,
        weights: Weights,
        trained_at: DateTime<Utc>,
    ) -> Result<Self> {
        let ids = models.question_content.doc_ids();
        if models.iter().any(|(_, m)| m.doc_ids() != ids) {
            return Err(Error::Artifact("field models cover different posts".into()));
        }
        Ok(Self {
            class_id,
            models,
            weights,
            trained_at,
        })
    }
}

/// Convenience wrapper matching [`EnsembleModel::fit`] with validated raw
/// weights.
pub fn fit_ensemble(corpus: &ClassCorpus, weights: PerField<f64>) -> Result<EnsembleModel> {
    Ok(EnsembleModel::fit(corpus, Weights::new(weights)?))
}

const MANIFEST_FILE: &str = "ensemble.json";

fn model_file_name(kind: FieldKind) -> String {
    format!("{}.dwm", kind.as_str())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: String,
    class_id: String,
    #[serde(with = "timestamp")]
    trained_at: DateTime<Utc>,
    weights: Weights,
    models: PerField<String>,
}

fn parse_manifest(bytes: &[u8]) -> Result<Manifest> {
    let manifest: Manifest = serde_json::from_slice(bytes)
        .map_err(|e| Error::Artifact(format!("ensemble manifest: {e}")))?;
    if manifest.format != ENSEMBLE_MAGIC {
        return Err(Error::Artifact(format!(
            "unsupported ensemble format {:?}",
            manifest.format
        )));
    }
    Ok(manifest)
}

/// Validates an ensemble manifest without touching the filesystem.
pub fn check_manifest(bytes: &[u8]) -> Result<()> {
    parse_manifest(bytes).map(|_| ())
}
