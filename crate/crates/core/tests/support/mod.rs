//! Brute-force reference implementations shared by the integration and
//! acceptance tests. Nothing here calls into the vector space or ensemble
//! code it is used to check: vectors are dense, terms are looked up by
//! linear search, and ranking is a plain sort.

#![allow(dead_code)]

use dupwatch_core::{preprocess, ClassCorpus, DraftQuestion, Post};
use rand::Rng;

/// Dense TF-IDF model: sorted terms, idf per term, one dense unit vector per
/// document.
pub struct DenseModel {
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl DenseModel {
    pub fn fit(docs: &[Vec<String>]) -> Self {
        let mut terms: Vec<String> = docs.iter().flatten().cloned().collect();
        terms.sort();
        terms.dedup();
        let n = docs.len() as f64;
        let idf: Vec<f64> = terms
            .iter()
            .map(|t| {
                let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
                ((1.0 + n) / (1.0 + df)).ln() + 1.0
            })
            .collect();
        let mut model = DenseModel {
            terms,
            idf,
            vectors: Vec::new(),
        };
        model.vectors = docs.iter().map(|d| model.transform(d)).collect();
        model
    }

    pub fn transform(&self, tokens: &[String]) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .terms
            .iter()
            .zip(&self.idf)
            .map(|(t, idf)| tokens.iter().filter(|x| *x == t).count() as f64 * idf)
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }

    pub fn weight(&self, vector: &[f64], term: &str) -> f64 {
        self.terms
            .iter()
            .position(|t| t == term)
            .map_or(0.0, |i| vector[i])
    }
}

pub fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The four field texts of a post, built directly from the record.
pub fn field_texts(p: &Post) -> [String; 4] {
    let mut question = vec![p.title.clone(), p.body.clone()];
    question.extend(p.tags.iter().cloned());
    let mut followups = Vec::new();
    for f in &p.followups {
        followups.push(f.text.clone());
        followups.extend(f.contributions.iter().cloned());
    }
    [
        question.join(" "),
        p.instructor_answer.clone().unwrap_or_default(),
        p.student_answer.clone().unwrap_or_default(),
        followups.join(" "),
    ]
}

pub fn tokens(text: &str) -> Vec<String> {
    preprocess(text).into_tokens()
}

/// Weighted four-field cosine of the draft against every post, ranked by
/// score descending then id ascending, zero scores dropped.
pub fn brute_force_ranking(
    corpus: &ClassCorpus,
    weights: [f64; 4],
    draft: &DraftQuestion,
) -> Vec<(String, f64, [f64; 4])> {
    let mut draft_text = vec![draft.title.clone(), draft.body.clone()];
    draft_text.extend(draft.tags.iter().cloned());
    let query = tokens(&draft_text.join(" "));

    let per_field: Vec<(DenseModel, Vec<f64>)> = (0..4)
        .map(|f| {
            let docs: Vec<Vec<String>> = corpus
                .posts()
                .iter()
                .map(|p| tokens(&field_texts(p)[f]))
                .collect();
            let model = DenseModel::fit(&docs);
            let q = model.transform(&query);
            (model, q)
        })
        .collect();

    let mut ranked: Vec<(String, f64, [f64; 4])> = corpus
        .posts()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut scores = [0.0; 4];
            for (f, (model, q)) in per_field.iter().enumerate() {
                scores[f] = dense_dot(&model.vectors[i], q);
            }
            let total = (0..4).fold(0.0, |acc, f| acc + weights[f] * scores[f]);
            (p.id.clone(), total, scores)
        })
        .filter(|r| r.1 > 0.0)
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Random token documents over a small vocabulary of `vocab` terms.
pub fn random_docs(rng: &mut impl Rng, n_docs: usize, vocab: usize) -> Vec<Vec<String>> {
    (0..n_docs)
        .map(|_| {
            let len = rng.gen_range(0..12);
            (0..len)
                .map(|_| format!("t{}", rng.gen_range(0..vocab)))
                .collect()
        })
        .collect()
}

const WORDS: &[&str] = &[
    "search",
    "graph",
    "heuristic",
    "admissible",
    "frontier",
    "queue",
    "priority",
    "cost",
    "uniform",
    "breadth",
    "depth",
    "astar",
    "bidirectional",
    "node",
    "edge",
    "path",
    "optimal",
    "grader",
    "submission",
    "timeout",
    "error",
    "test",
    "tridirectional",
    "landmark",
    "explored",
    "expand",
    "goal",
    "start",
    "ties",
    "distance",
    "euclidean",
    "manhattan",
    "notebook",
    "python",
    "import",
    "deadline",
    "extension",
    "lecture",
    "slides",
    "office",
    "hours",
];

fn sentence(rng: &mut impl Rng, max: usize) -> String {
    let len = rng.gen_range(0..=max);
    (0..len)
        .map(|_| WORDS[rng.gen_range(0..WORDS.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// Random forum corpus of `n` posts over a small course vocabulary, with
/// occasional verbatim duplicates so exact ties occur.
pub fn random_corpus(rng: &mut impl Rng, n: usize) -> ClassCorpus {
    use chrono::{Duration, TimeZone, Utc};
    let start = Utc.with_ymd_and_hms(2019, 1, 7, 0, 0, 0).unwrap();
    let mut posts: Vec<Post> = Vec::with_capacity(n);
    for i in 0..n {
        let mut post = Post {
            id: format!("p{i:04}"),
            class_id: "ai".into(),
            title: sentence(rng, 6),
            body: sentence(rng, 15),
            tags: if rng.gen_bool(0.5) {
                vec![format!("hw{}", rng.gen_range(1..4))]
            } else {
                vec![]
            },
            created_at: start + Duration::minutes(rng.gen_range(0..60 * 24 * 40)),
            views: rng.gen_range(0..400),
            instructor_answer: rng.gen_bool(0.5).then(|| sentence(rng, 12)),
            student_answer: rng.gen_bool(0.4).then(|| sentence(rng, 12)),
            followups: (0..rng.gen_range(0..3))
                .map(|_| dupwatch_core::Followup {
                    text: sentence(rng, 6),
                    resolved: rng.gen_bool(0.5),
                    contributions: (0..rng.gen_range(0..2)).map(|_| sentence(rng, 5)).collect(),
                })
                .collect(),
        };
        if i > 0 && rng.gen_bool(0.1) {
            let src = &posts[rng.gen_range(0..i)];
            post.title = src.title.clone();
            post.body = src.body.clone();
            post.tags = src.tags.clone();
            post.instructor_answer = src.instructor_answer.clone();
            post.student_answer = src.student_answer.clone();
            post.followups = src.followups.clone();
        }
        posts.push(post);
    }
    ClassCorpus::from_posts("ai", posts).unwrap()
}

pub fn random_draft(rng: &mut impl Rng) -> DraftQuestion {
    loop {
        let d = DraftQuestion::new(sentence(rng, 5), sentence(rng, 10), vec![]);
        if !d.is_empty() {
            return d;
        }
    }
}

/// Age in days, from whole microseconds.
pub fn age_in_days(post: &Post, now: chrono::DateTime<chrono::Utc>) -> f64 {
    (now - post.created_at).num_microseconds().unwrap() as f64 / 1e6 / 86_400.0
}

/// Student feed written out longhand: filter, rescale views and follow-up
/// counts over the survivors, score, sort, cut. Returns (id, importance).
pub fn reference_student_feed(
    corpus: &ClassCorpus,
    now: chrono::DateTime<chrono::Utc>,
    size: usize,
    theta: f64,
    cutoff: f64,
) -> Vec<(String, f64)> {
    let kept: Vec<(&Post, f64)> = corpus
        .posts()
        .iter()
        .map(|p| (p, age_in_days(p, now)))
        .filter(|(p, age)| p.instructor_answer.is_some() && *age >= 0.0 && *age <= cutoff)
        .collect();
    let rescale = |raw: Vec<f64>| -> Vec<f64> {
        let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        raw.iter()
            .map(|x| if hi == lo { 1.0 } else { (x - lo) / (hi - lo) })
            .collect()
    };
    let v = rescale(kept.iter().map(|(p, _)| p.views as f64).collect());
    let f = rescale(kept.iter().map(|(p, _)| p.followups.len() as f64).collect());
    let mut scored: Vec<(String, f64)> = kept
        .iter()
        .enumerate()
        .map(|(i, (p, age))| (p.id.clone(), v[i] * f[i] / (1.0 + (age - theta).exp())))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(size);
    scored
}

/// Instructor cascade written out stage by stage.
pub fn reference_instructor_feed(corpus: &ClassCorpus, size: usize) -> Vec<String> {
    let unresolved = |p: &Post| p.followups.iter().filter(|f| !f.resolved).count();
    let stage1: Vec<&Post> = corpus
        .posts()
        .iter()
        .filter(|p| p.instructor_answer.is_none())
        .collect();
    let mut survivors = if stage1.len() <= size {
        stage1
    } else {
        stage1
            .into_iter()
            .filter(|p| p.student_answer.is_none())
            .collect()
    };
    survivors.sort_by(|a, b| {
        unresolved(b)
            .cmp(&unresolved(a))
            .then_with(|| a.id.cmp(&b.id))
    });
    survivors.truncate(size);
    survivors.into_iter().map(|p| p.id.clone()).collect()
}
