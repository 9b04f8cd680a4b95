//! Seeded synthetic forum corpora with planted near-duplicates.
//!
//! Words are pronounceable consonant-vowel strings so every generated token
//! survives tokenization. Each original post mixes a handful of distinctive
//! topic words with Zipf-distributed background words. A planted duplicate
//! copies its original's question text, deletes a fraction of the tokens
//! and replaces another fraction with background words.

use chrono::{DateTime, Duration, Utc};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ClassCorpus, Followup, Post};
use crate::evalkit::GoldClustering;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub class_id: String,
    pub originals: usize,
    pub duplicates: usize,
    /// Fraction of a duplicate's tokens dropped from the original.
    pub deletion_rate: f64,
    /// Fraction of the surviving tokens swapped for background words.
    pub paraphrase_rate: f64,
    pub vocabulary_size: usize,
    pub topic_words: std::ops::RangeInclusive<usize>,
    pub background_words: std::ops::RangeInclusive<usize>,
    pub start: DateTime<Utc>,
    /// Span over which originals are spread.
    pub span_days: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            class_id: "synthetic".into(),
            originals: 160,
            duplicates: 40,
            deletion_rate: 0.2,
            paraphrase_rate: 0.1,
            vocabulary_size: 3000,
            topic_words: 8..=14,
            background_words: 6..=12,
            start: DateTime::parse_from_rfc3339("2019-01-07T00:00:00Z")
                .expect("valid literal")
                .with_timezone(&Utc),
            span_days: 60,
            seed: 7,
        }
    }
}

pub struct SynthCorpus {
    pub corpus: ClassCorpus,
    pub gold: GoldClustering,
}

/// The `i`-th synthetic word: three consonant-vowel syllables.
pub fn synthetic_word(i: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut out = String::with_capacity(6);
    let mut n = i;
    for _ in 0..3 {
        let syl = n % base;
        n /= base;
        out.push(CONSONANTS[syl / VOWELS.len()] as char);
        out.push(VOWELS[syl % VOWELS.len()] as char);
    }
    out
}

struct Vocab {
    words: Vec<String>,
    zipf: WeightedIndex<f64>,
}

impl Vocab {
    fn new(size: usize) -> Self {
        let words = (0..)
            .map(synthetic_word)
            .filter(|w| !crate::textpipe::is_stopword(w))
            .take(size)
            .collect();
        let zipf = WeightedIndex::new((1..=size).map(|r| 1.0 / r as f64)).expect("non-empty");
        Self { words, zipf }
    }

    fn background(&self, rng: &mut impl Rng) -> &str {
        &self.words[self.zipf.sample(rng)]
    }

    fn uniform(&self, rng: &mut impl Rng) -> &str {
        &self.words[rng.gen_range(0..self.words.len())]
    }

    fn sentence(&self, rng: &mut impl Rng, n: usize) -> String {
        (0..n)
            .map(|_| self.background(rng))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Generates a corpus and its gold clustering. Duplicate `j` copies a
/// distinct original and is always dated after it.
pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    assert!(
        cfg.duplicates <= cfg.originals,
        "each duplicate needs its own original"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Vocab::new(cfg.vocabulary_size.max(1));
    let span_secs = cfg.span_days.max(1) * 86_400;

    let mut posts = Vec::with_capacity(cfg.originals + cfg.duplicates);
    let mut question_tokens = Vec::with_capacity(cfg.originals);
    for i in 0..cfg.originals {
        let mut tokens: Vec<String> = (0..rng.gen_range(cfg.topic_words.clone()))
            .map(|_| vocab.uniform(&mut rng).to_owned())
            .collect();
        tokens.extend(
            (0..rng.gen_range(cfg.background_words.clone()))
                .map(|_| vocab.background(&mut rng).to_owned()),
        );
        tokens.shuffle(&mut rng);
        let created_at = cfg.start + Duration::seconds(rng.gen_range(0..span_secs));
        let post = decorate(
            &mut rng,
            &vocab,
            &cfg.class_id,
            format!("o{i:05}"),
            &tokens,
            created_at,
        );
        question_tokens.push(tokens);
        posts.push(post);
    }

    let mut sources: Vec<usize> = (0..cfg.originals).collect();
    sources.shuffle(&mut rng);
    sources.truncate(cfg.duplicates);
    let mut clusters: Vec<Vec<String>> = Vec::new();
    let mut paired = vec![false; cfg.originals];
    for (j, &src) in sources.iter().enumerate() {
        let tokens = perturb(&mut rng, &vocab, &question_tokens[src], cfg);
        let delay = Duration::seconds(rng.gen_range(3_600..10 * 86_400));
        let id = format!("d{j:05}");
        let post = decorate(
            &mut rng,
            &vocab,
            &cfg.class_id,
            id.clone(),
            &tokens,
            posts[src].created_at + delay,
        );
        posts.push(post);
        clusters.push(vec![posts[src].id.clone(), id]);
        paired[src] = true;
    }
    clusters.extend(
        (0..cfg.originals)
            .filter(|&i| !paired[i])
            .map(|i| vec![posts[i].id.clone()]),
    );

    let corpus =
        ClassCorpus::from_posts(cfg.class_id.clone(), posts).expect("generated ids are unique");
    let gold = GoldClustering::new(cfg.class_id.clone(), clusters).expect("disjoint clusters");
    SynthCorpus { corpus, gold }
}

fn perturb(rng: &mut impl Rng, vocab: &Vocab, tokens: &[String], cfg: &SynthConfig) -> Vec<String> {
    let n = tokens.len();
    let drop = ((n as f64) * cfg.deletion_rate).round() as usize;
    let mut keep: Vec<usize> = (0..n).collect();
    keep.shuffle(rng);
    keep.truncate(n - drop.min(n.saturating_sub(1)));
    keep.sort_unstable();
    keep.into_iter()
        .map(|i| {
            if rng.gen_bool(cfg.paraphrase_rate.clamp(0.0, 1.0)) {
                vocab.background(rng).to_owned()
            } else {
                tokens[i].clone()
            }
        })
        .collect()
}

fn decorate(
    rng: &mut impl Rng,
    vocab: &Vocab,
    class_id: &str,
    id: String,
    question: &[String],
    created_at: DateTime<Utc>,
) -> Post {
    let split = question.len().min(rng.gen_range(3..=6));
    let title = question[..split].join(" ");
    let body = question[split..].join(" ");
    // answers reuse a few question words, as real answers do
    let answer = |rng: &mut ChaCha8Rng| {
        let mut words: Vec<String> = question
            .choose_multiple(rng, 3.min(question.len()))
            .cloned()
            .collect();
        words.push(vocab.sentence(rng, 8));
        words.join(" ")
    };
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    let instructor_answer = local.gen_bool(0.6).then(|| answer(&mut local));
    let student_answer = local.gen_bool(0.4).then(|| answer(&mut local));
    let followups = (0..local.gen_range(0..=3))
        .map(|_| Followup {
            text: vocab.sentence(&mut local, 6),
            resolved: local.gen_bool(0.5),
            contributions: (0..local.gen_range(0..=2))
                .map(|_| vocab.sentence(&mut local, 5))
                .collect(),
        })
        .collect();
    Post {
        id,
        class_id: class_id.to_owned(),
        title,
        body,
        tags: vec![format!("hw{}", local.gen_range(1..=4))],
        created_at,
        views: local.gen_range(0..500),
        instructor_answer,
        student_answer,
        followups,
    }
}
