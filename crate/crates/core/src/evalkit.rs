//! Offline measurement: walk-forward recall, duplicate rates, rater
//! agreement and the one-sided two-proportion z-test.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::ClassCorpus;
use crate::ensemble::{DraftQuestion, EnsembleModel, Weights};
use crate::{Error, Result};

/// A partition of post ids into duplicate clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GoldRepr", into = "GoldRepr")]
pub struct GoldClustering {
    class_id: String,
    clusters: Vec<Vec<String>>,
    cluster_of: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GoldRepr {
    class_id: String,
    clusters: Vec<Vec<String>>,
}

impl TryFrom<GoldRepr> for GoldClustering {
    type Error = Error;

    fn try_from(repr: GoldRepr) -> Result<Self> {
        GoldClustering::new(repr.class_id, repr.clusters)
    }
}

impl From<GoldClustering> for GoldRepr {
    fn from(g: GoldClustering) -> Self {
        GoldRepr {
            class_id: g.class_id,
            clusters: g.clusters,
        }
    }
}

impl GoldClustering {
    /// Clusters must be non-empty and pairwise disjoint.
    pub fn new(class_id: impl Into<String>, clusters: Vec<Vec<String>>) -> Result<Self> {
        let mut cluster_of = HashMap::new();
        for (c, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Gold(format!("cluster {c} is empty")));
            }
            for id in members {
                if cluster_of.insert(id.clone(), c).is_some() {
                    return Err(Error::Gold(format!("post {id:?} appears in two clusters")));
                }
            }
        }
        Ok(Self {
            class_id: class_id.into(),
            clusters,
            cluster_of,
        })
    }

    /// Every post in its own cluster.
    pub fn singletons(corpus: &ClassCorpus) -> Self {
        let clusters = corpus.posts().iter().map(|p| vec![p.id.clone()]).collect();
        Self::new(corpus.class_id(), clusters).expect("corpus ids are unique")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Gold(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&bytes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("gold clustering serializes")
    }

    pub fn class_id(&self) -> &str {
        &self.class_id
    }

    pub fn clusters(&self) -> &[Vec<String>] {
        &self.clusters
    }

    /// Cluster index of `id`, if the clustering mentions it.
    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.cluster_of.get(id).copied()
    }

    /// Fails if any clustered id is missing from `corpus`.
    pub fn check_against(&self, corpus: &ClassCorpus) -> Result<()> {
        let ids: HashSet<&str> = corpus.posts().iter().map(|p| p.id.as_str()).collect();
        match self.cluster_of.keys().find(|id| !ids.contains(id.as_str())) {
            Some(id) => Err(Error::Gold(format!("post {id:?} is not in the corpus"))),
            None => Ok(()),
        }
    }

    /// For each corpus post (chronological), whether an earlier corpus post
    /// shares its cluster. Ids the clustering does not mention are
    /// singletons.
    fn has_earlier_duplicate(&self, corpus: &ClassCorpus) -> Vec<bool> {
        let mut seen = HashSet::new();
        corpus
            .posts()
            .iter()
            .map(|p| match self.cluster_of(&p.id) {
                Some(c) => !seen.insert(c),
                None => false,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostOutcome {
    pub post_id: String,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkForwardReport {
    pub k: usize,
    pub eligible: usize,
    pub hits: usize,
    /// `None` when no post has an earlier duplicate.
    pub recall_at_k: Option<f64>,
    pub per_post: Vec<PostOutcome>,
}

impl fmt::Display for WalkForwardReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<24} {:>5}", "post", "hit")?;
        for o in &self.per_post {
            writeln!(
                f,
                "{:<24} {:>5}",
                o.post_id,
                if o.hit { "yes" } else { "no" }
            )?;
        }
        writeln!(f, "eligible  {}", self.eligible)?;
        writeln!(f, "hits      {}", self.hits)?;
        match self.recall_at_k {
            Some(r) => write!(f, "recall@{}  {:.4}", self.k, r),
            None => write!(f, "recall@{}  undefined (no eligible posts)", self.k),
        }
    }
}

/// Chronological evaluation: every post with an earlier same-cluster post is
/// used as a draft against an ensemble trained only on the posts before it.
/// A hit is any of the top `k` recommendations sharing its cluster.
pub fn walk_forward(
    corpus: &ClassCorpus,
    gold: &GoldClustering,
    k: usize,
    weights: Weights,
) -> Result<WalkForwardReport> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    // fixed stamp; step models are never persisted
    let stamp = DateTime::<Utc>::UNIX_EPOCH;
    let eligible: Vec<usize> = gold
        .has_earlier_duplicate(corpus)
        .into_iter()
        .enumerate()
        .filter_map(|(i, dup)| dup.then_some(i))
        .collect();

    let per_post: Vec<PostOutcome> = eligible
        .par_iter()
        .map(|&i| {
            let post = &corpus.posts()[i];
            let cluster = gold.cluster_of(&post.id);
            let model = EnsembleModel::fit_at(&corpus.prefix(i), weights, stamp);
            let hit = match model.recommend(&DraftQuestion::from_post(post), k) {
                Ok(recs) => recs.iter().any(|r| gold.cluster_of(&r.post_id) == cluster),
                Err(Error::EmptyDraft) => false,
                Err(e) => return Err(e),
            };
            Ok(PostOutcome {
                post_id: post.id.clone(),
                hit,
            })
        })
        .collect::<Result<_>>()?;

    let hits = per_post.iter().filter(|o| o.hit).count();
    let eligible = per_post.len();
    Ok(WalkForwardReport {
        k,
        eligible,
        hits,
        recall_at_k: (eligible > 0).then(|| hits as f64 / eligible as f64),
        per_post,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuplicateRate {
    pub duplicates: usize,
    pub total: usize,
    pub rate: f64,
}

impl fmt::Display for DuplicateRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} posts are duplicates ({:.1}%)",
            self.duplicates,
            self.total,
            self.rate * 100.0
        )
    }
}

/// Counts posts whose cluster contains a chronologically earlier post of
/// the same corpus; the earliest member of each cluster is the original.
pub fn duplicate_rate(corpus: &ClassCorpus, gold: &GoldClustering) -> DuplicateRate {
    let duplicates = gold
        .has_earlier_duplicate(corpus)
        .into_iter()
        .filter(|&d| d)
        .count();
    let total = corpus.len();
    DuplicateRate {
        duplicates,
        total,
        rate: if total == 0 {
            0.0
        } else {
            duplicates as f64 / total as f64
        },
    }
}

/// Fraction of positions where two raters gave the same label.
pub fn percent_agreement(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "label lists differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("label lists are empty".into()));
    }
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(agree as f64 / a.len() as f64)
}

/// Mean pairwise agreement over every pair of raters.
pub fn mean_pairwise_agreement(raters: &[Vec<bool>]) -> Result<f64> {
    if raters.len() < 2 {
        return Err(Error::InvalidInput("need at least two raters".into()));
    }
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 0..raters.len() {
        for j in i + 1..raters.len() {
            total += percent_agreement(&raters[i], &raters[j])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Fraction of items on which every rater gave the same label.
pub fn unanimous_agreement(raters: &[Vec<bool>]) -> Result<f64> {
    let Some(first) = raters.first() else {
        return Err(Error::InvalidInput("no raters".into()));
    };
    if first.is_empty() {
        return Err(Error::InvalidInput("label lists are empty".into()));
    }
    if raters.iter().any(|r| r.len() != first.len()) {
        return Err(Error::InvalidInput("label lists differ in length".into()));
    }
    let unanimous = (0..first.len())
        .filter(|&i| raters.iter().all(|r| r[i] == first[i]))
        .count();
    Ok(unanimous as f64 / first.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTestResult {
    pub z: f64,
    /// `P(Z >= z)` under the null, for the alternative `p1 > p2`.
    pub p_one_sided: f64,
    pub pooled_proportion: f64,
}

impl fmt::Display for ZTestResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "z = {:.4}, one-sided p = {:.4}, pooled proportion = {:.4}",
            self.z, self.p_one_sided, self.pooled_proportion
        )
    }
}

/// Standard normal cumulative distribution function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// One-sided pooled-variance z-test of `x1/n1 > x2/n2`.
pub fn two_proportion_ztest(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<ZTestResult> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidInput("sample sizes must be positive".into()));
    }
    if x1 > n1 || x2 > n2 {
        return Err(Error::InvalidInput("successes cannot exceed trials".into()));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    if pooled == 0.0 || pooled == 1.0 {
        return Err(Error::Degenerate(format!(
            "pooled proportion {pooled} has zero variance"
        )));
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    let z = (x1 as f64 / n1f - x2 as f64 / n2f) / se;
    Ok(ZTestResult {
        z,
        p_one_sided: Normal::standard().sf(z),
        pooled_proportion: pooled,
    })
}
