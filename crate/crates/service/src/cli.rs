//! `dupwatch` subcommands. Each is a thin wrapper over a library operation
//! and prints its result as one line of JSON followed by a plain table.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dupwatch_core::corpus::parse_timestamp;
use dupwatch_core::ensemble::DEFAULT_K;
use dupwatch_core::evalkit::{duplicate_rate, two_proportion_ztest, walk_forward, GoldClustering};
use dupwatch_core::feeds::{
    instructor_feed, student_feed, StudentFeedParams, DEFAULT_AGE_CUTOFF_DAYS, DEFAULT_FEED_SIZE,
    DEFAULT_THETA_DAYS,
};
use dupwatch_core::synth::{generate, SynthConfig};
use dupwatch_core::{load_corpus, DraftQuestion, EnsembleModel, FieldKind, Weights};
use serde::Serialize;

use crate::config::ServiceConfig;

#[derive(Debug, Parser)]
#[command(
    name = "dupwatch",
    version,
    about = "Duplicate-question recommender for course forums"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Both)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    /// JSON on the first line, then the table.
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the four field models of a class and save them to a directory.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank a saved model's posts against a draft question.
    Recommend {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "")]
        title: String,
        #[arg(long, default_value = "")]
        body: String,
        #[arg(long, num_args = 1..)]
        tags: Vec<String>,
        #[arg(short, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Compute the student or instructor feed of a corpus.
    Feed {
        #[arg(value_enum)]
        role: Role,
        #[arg(long)]
        corpus: PathBuf,
        /// Evaluation instant (ISO-8601); defaults to the current time.
        #[arg(long, value_parser = parse_now)]
        now: Option<DateTime<Utc>>,
        #[arg(short, default_value_t = DEFAULT_FEED_SIZE)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_THETA_DAYS)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_AGE_CUTOFF_DAYS)]
        age_cutoff: f64,
    },
    /// Offline measurements.
    #[command(subcommand)]
    Eval(Eval),
    /// Generate a seeded synthetic corpus and its gold clustering.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value = "synthetic")]
        class_id: String,
        #[arg(long, default_value_t = 160)]
        originals: usize,
        #[arg(long, default_value_t = 40)]
        duplicates: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Role {
    Student,
    Instructor,
}

#[derive(Debug, Subcommand)]
pub enum Eval {
    /// Chronological recall@k against a gold clustering.
    WalkForward {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(short, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Fraction of posts that duplicate an earlier post.
    DupRate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// One-sided pooled two-proportion z-test of p1 > p2.
    Ztest {
        #[arg(long)]
        x1: u64,
        #[arg(long)]
        n1: u64,
        #[arg(long)]
        x2: u64,
        #[arg(long)]
        n2: u64,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub listen: Option<String>,
    #[arg(long)]
    pub retrain_interval_seconds: Option<u64>,
    #[arg(long)]
    pub event_log: Option<PathBuf>,
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

impl ServeArgs {
    /// File, then `DW_*` variables from `env`, then flags.
    pub fn resolve<I, K, V>(&self, env: I) -> anyhow::Result<ServiceConfig>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut config = match &self.config {
            Some(path) => ServiceConfig::from_file(path)?,
            None => ServiceConfig::default(),
        };
        config.apply_env(env)?;
        if let Some(v) = &self.listen {
            config.listen_address = v.clone();
        }
        if let Some(v) = self.retrain_interval_seconds {
            config.retrain_interval_seconds = v;
        }
        if let Some(v) = &self.event_log {
            config.event_log_path = v.clone();
        }
        if let Some(v) = &self.ui_dir {
            config.ui_dir = Some(v.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn parse_now(raw: &str) -> Result<DateTime<Utc>, String> {
    parse_timestamp(raw).ok_or_else(|| format!("not an ISO-8601 timestamp: {raw:?}"))
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: Format,
    value: &T,
    table: &str,
) -> anyhow::Result<()> {
    if format != Format::Table {
        serde_json::to_writer(&mut *out, value)?;
        writeln!(out)?;
    }
    if format != Format::Json {
        writeln!(out, "{}", table.trim_end())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainReport {
    class_id: String,
    n_posts: usize,
    trained_at: DateTime<Utc>,
    vocabulary: dupwatch_core::PerField<usize>,
    out: PathBuf,
}

/// Runs every subcommand except `serve`, writing to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    let format = cli.format;
    match &cli.command {
        Command::Train { corpus, out: dir } => {
            let corpus = load_corpus(corpus)?;
            let model = EnsembleModel::fit(&corpus, Weights::default());
            model
                .save(dir)
                .with_context(|| format!("writing {}", dir.display()))?;
            let report = TrainReport {
                class_id: model.class_id().to_owned(),
                n_posts: model.n_posts(),
                trained_at: model.trained_at(),
                vocabulary: dupwatch_core::PerField::from_fn(|k| model.model(k).vocabulary_size()),
                out: dir.clone(),
            };
            let mut table = format!(
                "class {}  posts {}  trained {}\n",
                report.class_id, report.n_posts, report.trained_at
            );
            for kind in FieldKind::ALL {
                writeln!(
                    table,
                    "{:<18} {:>7} terms",
                    kind.as_str(),
                    report.vocabulary[kind]
                )?;
            }
            emit(out, format, &report, &table)
        }
        Command::Recommend {
            model,
            title,
            body,
            tags,
            k,
        } => {
            if *k == 0 {
                bail!("-k must be positive");
            }
            let model = EnsembleModel::load(model)?;
            let recs = model.recommend(&DraftQuestion::new(title, body, tags.clone()), *k)?;
            let mut table = format!(
                "{:>4} {:<20} {:>7} {:>7} {:>7} {:>7} {:>7}\n",
                "rank", "post", "score", "quest", "instr", "stud", "follow"
            );
            for (i, r) in recs.iter().enumerate() {
                let s = &r.per_field_scores;
                writeln!(
                    table,
                    "{:>4} {:<20} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
                    i + 1,
                    r.post_id,
                    r.score,
                    s.question_content,
                    s.instructor_answer,
                    s.student_answer,
                    s.followups
                )?;
            }
            emit(
                out,
                format,
                &serde_json::json!({ "recommendations": recs }),
                &table,
            )
        }
        Command::Feed {
            role,
            corpus,
            now,
            n,
            theta,
            age_cutoff,
        } => {
            if *n == 0 {
                bail!("-n must be positive");
            }
            let corpus = load_corpus(corpus)?;
            let now = now.unwrap_or_else(Utc::now);
            match role {
                Role::Student => {
                    let params = StudentFeedParams {
                        size: *n,
                        theta_days: *theta,
                        age_cutoff_days: *age_cutoff,
                    };
                    let items = student_feed(&corpus, now, params);
                    let mut table = format!(
                        "{:<20} {:>10} {:>7} {:>9} {:>8}\n",
                        "post", "importance", "views", "followups", "age"
                    );
                    for it in &items {
                        writeln!(
                            table,
                            "{:<20} {:>10.4} {:>7} {:>9} {:>8.2}",
                            it.post_id, it.importance, it.views, it.followups, it.age_days
                        )?;
                    }
                    emit(out, format, &serde_json::json!({ "items": items }), &table)
                }
                Role::Instructor => {
                    let items = instructor_feed(&corpus, now, *n);
                    let mut table = format!(
                        "{:<20} {:>10} {:>7} {:>9} {:>8}\n",
                        "post", "unresolved", "views", "followups", "age"
                    );
                    for it in &items {
                        writeln!(
                            table,
                            "{:<20} {:>10} {:>7} {:>9} {:>8.2}",
                            it.post_id,
                            it.unresolved_followups,
                            it.views,
                            it.followups,
                            it.age_days
                        )?;
                    }
                    emit(out, format, &serde_json::json!({ "items": items }), &table)
                }
            }
        }
        Command::Eval(Eval::WalkForward { corpus, gold, k }) => {
            let corpus = load_corpus(corpus)?;
            let gold = GoldClustering::load(gold)?;
            let report = walk_forward(&corpus, &gold, *k, Weights::default())?;
            emit(out, format, &report, &report.to_string())
        }
        Command::Eval(Eval::DupRate { corpus, gold }) => {
            let corpus = load_corpus(corpus)?;
            let gold = GoldClustering::load(gold)?;
            let rate = duplicate_rate(&corpus, &gold);
            emit(out, format, &rate, &rate.to_string())
        }
        Command::Eval(Eval::Ztest { x1, n1, x2, n2 }) => {
            let result = two_proportion_ztest(*x1, *n1, *x2, *n2)?;
            emit(out, format, &result, &result.to_string())
        }
        Command::Synth {
            out: path,
            gold,
            class_id,
            originals,
            duplicates,
            seed,
        } => {
            let synth = generate(&SynthConfig {
                class_id: class_id.clone(),
                originals: *originals,
                duplicates: *duplicates,
                seed: *seed,
                ..SynthConfig::default()
            });
            synth.corpus.save(path)?;
            std::fs::write(gold, synth.gold.to_json())
                .with_context(|| format!("writing {}", gold.display()))?;
            let summary = serde_json::json!({
                "class_id": class_id,
                "n_posts": synth.corpus.len(),
                "clusters": synth.gold.clusters().len(),
                "corpus": path,
                "gold": gold,
            });
            let table = format!(
                "wrote {} posts to {} and {} clusters to {}",
                synth.corpus.len(),
                path.display(),
                synth.gold.clusters().len(),
                gold.display()
            );
            emit(out, format, &summary, &table)
        }
        Command::Serve(_) => bail!("serve runs through the async entry point"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_command_lines() {
        for line in [
            "dupwatch train --corpus c.jsonl --out m",
            "dupwatch recommend --model m --title t --body b --tags hw1 hw2 -k 3",
            "dupwatch feed student --corpus c.jsonl --now 2019-02-01T00:00:00Z",
            "dupwatch feed instructor --corpus c.jsonl",
            "dupwatch eval walk-forward --corpus c.jsonl --gold g.json -k 5",
            "dupwatch eval ztest --x1 50 --n1 195 --x2 30 --n2 168",
            "dupwatch serve --config dw.toml",
        ] {
            Cli::try_parse_from(line.split(' ')).unwrap_or_else(|e| panic!("{line}: {e}"));
        }
        assert!(Cli::try_parse_from(["dupwatch", "feed", "ta", "--corpus", "c"]).is_err());
    }

    #[test]
    fn flags_override_env_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("dw.toml");
        std::fs::write(
            &file,
            "feed_size = 3\nrecommendation_k = 4\n[corpus_paths]\nai = \"ai.jsonl\"\n",
        )
        .unwrap();
        let args = ServeArgs {
            config: Some(file),
            listen: Some("0.0.0.0:9000".into()),
            retrain_interval_seconds: None,
            event_log: None,
            ui_dir: None,
        };
        let c = args
            .resolve([
                ("DW_RECOMMENDATION_K", "2"),
                ("DW_LISTEN_ADDRESS", "127.0.0.1:1"),
            ])
            .unwrap();
        assert_eq!((c.feed_size, c.recommendation_k), (3, 2));
        assert_eq!(c.listen_address, "0.0.0.0:9000");
        assert_eq!(c.corpus_paths["ai"], dir.path().join("ai.jsonl"));
    }
}
