//! Home-page feeds: importance-ranked posts for students and an unanswered
//! triage list for instructors.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassCorpus, Post};
use crate::vectorspace::rank_order;
use crate::{Error, Result};

pub const DEFAULT_FEED_SIZE: usize = 6;
pub const DEFAULT_THETA_DAYS: f64 = 7.0;
pub const DEFAULT_AGE_CUTOFF_DAYS: f64 = 21.0;

const SECONDS_PER_DAY: f64 = 86_400.0;

/// Maps each value to `(x - min) / (max - min)`. When every value is equal
/// the result is all ones, so a constant factor never zeroes the product.
pub fn min_max_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("cannot normalize an empty list".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    Ok(values
        .iter()
        .map(|&x| if range > 0.0 { (x - min) / range } else { 1.0 })
        .collect())
}

/// Inputs to the importance score of one post.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImportanceInputs {
    /// Normalized views.
    pub views: f64,
    /// Normalized follow-up count.
    pub followups: f64,
    pub age_days: f64,
    /// Sigmoid offset in days.
    pub theta: f64,
}

/// Normalized views times normalized follow-ups, damped by a logistic
/// function of age centred at `theta` days.
pub fn importance(inputs: ImportanceInputs) -> f64 {
    inputs.views * inputs.followups / (1.0 + (inputs.age_days - inputs.theta).exp())
}

/// Age of `post` at `now`, in fractional days.
pub fn age_days(post: &Post, now: DateTime<Utc>) -> f64 {
    let delta = now - post.created_at;
    match delta.num_microseconds() {
        Some(us) => us as f64 / 1e6 / SECONDS_PER_DAY,
        None => delta.num_seconds() as f64 / SECONDS_PER_DAY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentFeedParams {
    pub size: usize,
    pub theta_days: f64,
    pub age_cutoff_days: f64,
}

impl Default for StudentFeedParams {
    fn default() -> Self {
        Self {
            size: DEFAULT_FEED_SIZE,
            theta_days: DEFAULT_THETA_DAYS,
            age_cutoff_days: DEFAULT_AGE_CUTOFF_DAYS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedItem {
    pub post_id: String,
    pub importance: f64,
    pub views: u64,
    pub followups: usize,
    pub age_days: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageItem {
    pub post_id: String,
    pub unresolved_followups: usize,
    pub views: u64,
    pub followups: usize,
    pub age_days: f64,
}

/// The student home feed at time `now`.
///
/// Candidates are answered by an instructor and no older than the cutoff;
/// posts dated after `now` are not candidates. Views and follow-up counts
/// are normalized over the candidate set.
pub fn student_feed(
    corpus: &ClassCorpus,
    now: DateTime<Utc>,
    params: StudentFeedParams,
) -> Vec<FeedItem> {
    let candidates: Vec<(&Post, f64)> = corpus
        .posts()
        .iter()
        .map(|p| (p, age_days(p, now)))
        .filter(|&(p, age)| {
            p.has_instructor_answer() && (0.0..=params.age_cutoff_days).contains(&age)
        })
        .collect();
    if candidates.is_empty() {
        return Vec::new();
    }
    let views: Vec<f64> = candidates.iter().map(|(p, _)| p.views as f64).collect();
    let followups: Vec<f64> = candidates
        .iter()
        .map(|(p, _)| p.followups.len() as f64)
        .collect();
    let views = min_max_normalize(&views).expect("non-empty");
    let followups = min_max_normalize(&followups).expect("non-empty");

    let mut items: Vec<FeedItem> = candidates
        .iter()
        .enumerate()
        .map(|(i, &(p, age))| FeedItem {
            post_id: p.id.clone(),
            importance: importance(ImportanceInputs {
                views: views[i],
                followups: followups[i],
                age_days: age,
                theta: params.theta_days,
            }),
            views: p.views,
            followups: p.followups.len(),
            age_days: age,
        })
        .collect();
    items.sort_by(|a, b| rank_order((&a.post_id, a.importance), (&b.post_id, b.importance)));
    items.truncate(params.size);
    items
}

/// The instructor triage feed.
///
/// Unanswered-by-instructor posts are taken first. If more than `size`
/// remain, only those also lacking a student answer are kept. Whatever
/// survives is ordered by unresolved follow-ups (descending, ties by id)
/// and cut to `size`.
pub fn instructor_feed(corpus: &ClassCorpus, now: DateTime<Utc>, size: usize) -> Vec<TriageItem> {
    let mut selected: Vec<&Post> = corpus
        .posts()
        .iter()
        .filter(|p| !p.has_instructor_answer())
        .collect();
    if selected.len() > size {
        selected.retain(|p| !p.has_student_answer());
    }
    selected.sort_by(|a, b| {
        b.unresolved_followup_count()
            .cmp(&a.unresolved_followup_count())
            .then_with(|| a.id.cmp(&b.id))
    });
    selected.truncate(size);
    selected
        .into_iter()
        .map(|p| TriageItem {
            post_id: p.id.clone(),
            unresolved_followups: p.unresolved_followup_count(),
            views: p.views,
            followups: p.followups.len(),
            age_days: age_days(p, now),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Followup;
    use chrono::Duration;

    fn now() -> DateTime<Utc> {
        "2019-03-01T12:00:00Z".parse().unwrap()
    }

    fn post(id: &str, age_days: f64) -> Post {
        Post {
            id: id.into(),
            class_id: "ai".into(),
            title: String::new(),
            body: String::new(),
            tags: vec![],
            created_at: now() - Duration::milliseconds((age_days * 86_400_000.0) as i64),
            views: 10,
            instructor_answer: Some("answer".into()),
            student_answer: None,
            followups: vec![],
        }
    }

    fn corpus(posts: Vec<Post>) -> ClassCorpus {
        ClassCorpus::from_posts("ai", posts).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            min_max_normalize(&[3.0, 7.0, 11.0]).unwrap(),
            [0.0, 0.5, 1.0]
        );
        assert_eq!(
            min_max_normalize(&[5.0, 5.0, 5.0]).unwrap(),
            [1.0, 1.0, 1.0]
        );
        assert_eq!(min_max_normalize(&[0.0, 10.0]).unwrap(), [0.0, 1.0]);
        assert!(min_max_normalize(&[]).is_err());
    }

    #[test]
    fn importance_examples() {
        let at = |views, followups, age_days| {
            importance(ImportanceInputs {
                views,
                followups,
                age_days,
                theta: 7.0,
            })
        };
        assert!((at(1.0, 1.0, 7.0) - 0.5).abs() < 1e-12);
        assert_eq!(at(0.0, 0.9, 1.0), 0.0);
        assert!((at(0.8, 0.5, 3.0) - 0.392805).abs() < 1e-6);
        // far past the offset the logistic underflows to zero without NaN
        assert_eq!(at(1.0, 1.0, 10_000.0), 0.0);
    }

    #[test]
    fn student_filters() {
        let mut unanswered = post("fresh", 1.0);
        unanswered.instructor_answer = None;
        let c = corpus(vec![
            post("old", 22.0),
            unanswered,
            post("edge", 21.0),
            post("ok", 2.0),
        ]);
        let ids: Vec<_> = student_feed(&c, now(), StudentFeedParams::default())
            .into_iter()
            .map(|i| i.post_id)
            .collect();
        assert!(!ids.contains(&"old".to_string()));
        assert!(!ids.contains(&"fresh".to_string()));
        assert!(ids.contains(&"edge".to_string()));
        assert!(ids.contains(&"ok".to_string()));
    }

    #[test]
    fn student_feed_truncates_to_six() {
        let posts = (0..10).map(|i| post(&format!("p{i}"), i as f64)).collect();
        assert_eq!(
            student_feed(&corpus(posts), now(), StudentFeedParams::default()).len(),
            6
        );
    }

    #[test]
    fn student_feed_prefers_newer_at_equal_attention() {
        let posts = vec![post("new", 1.0), post("mid", 8.0), post("late", 15.0)];
        let ids: Vec<_> = student_feed(&corpus(posts), now(), StudentFeedParams::default())
            .into_iter()
            .map(|i| i.post_id)
            .collect();
        assert_eq!(ids, ["new", "mid", "late"]);
    }

    fn unanswered(id: &str, student: bool, unresolved: usize) -> Post {
        let mut p = post(id, 1.0);
        p.instructor_answer = None;
        p.student_answer = student.then(|| "maybe".to_string());
        p.followups = (0..unresolved)
            .map(|_| Followup {
                text: "?".into(),
                resolved: false,
                contributions: vec![],
            })
            .collect();
        p
    }

    #[test]
    fn cascade_short_circuits() {
        let mut posts: Vec<Post> = (0..4)
            .map(|i| unanswered(&format!("u{i}"), true, 0))
            .collect();
        posts.extend((0..5).map(|i| post(&format!("a{i}"), 1.0)));
        assert_eq!(instructor_feed(&corpus(posts), now(), 6).len(), 4);
    }

    #[test]
    fn cascade_second_filter() {
        let posts: Vec<Post> = (0..10)
            .map(|i| unanswered(&format!("u{i}"), i >= 5, 0))
            .collect();
        let ids: Vec<_> = instructor_feed(&corpus(posts), now(), 6)
            .into_iter()
            .map(|i| i.post_id)
            .collect();
        assert_eq!(ids, ["u0", "u1", "u2", "u3", "u4"]);
    }

    #[test]
    fn cascade_sorts_by_unresolved() {
        let posts: Vec<Post> = (0..10)
            .map(|i| unanswered(&format!("u{i}"), false, i))
            .collect();
        let counts: Vec<_> = instructor_feed(&corpus(posts), now(), 6)
            .into_iter()
            .map(|i| i.unresolved_followups)
            .collect();
        assert_eq!(counts, [9, 8, 7, 6, 5, 4]);
    }
}
