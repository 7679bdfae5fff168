//! Deterministic three-community comment corpus with planted sentiment.
//!
//! Every comment takes one of three tones. Positive comments draw from the
//! positive seeds plus a small set of positive filler words and the planted
//! token [`PLANTED_POSITIVE`]; negative comments mirror this with
//! [`PLANTED_NEGATIVE`]. [`OPPOSITE_USAGE`] is positive in the first
//! community, negative in the second and absent from the third. The rest of
//! each comment is function words, shared content words and
//! community-specific topic words. Shared words carry a small fixed lean
//! toward one polarity.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::ingest::{CommentRecord, DELETED_AUTHOR};
use crate::sentprop::{DEFAULT_NEGATIVE, DEFAULT_POSITIVE};

pub const COMMUNITIES: [&str; 3] = ["crafts", "fitness", "gaming"];
pub const PLANTED_POSITIVE: &str = "glee";
pub const PLANTED_NEGATIVE: &str = "gloom";
pub const OPPOSITE_USAGE: &str = "wicked";

const POSITIVE_FILLERS: [&str; 7] = ["sunny", "cheerful", "delight", "bliss", "joyful", "grateful", "smile"];
const NEGATIVE_FILLERS: [&str; 7] = ["misery", "dread", "grim", "bleak", "sorrow", "painful", "ugly"];
/// Largest relative shift of a shared word's frequency between positive and
/// negative comments.
const LEAN: f64 = 0.6;
const FUNCTION_WORDS: [&str; 24] = [
    "the", "a", "and", "to", "of", "it", "is", "i", "you", "that", "this", "was", "for", "on", "with", "my",
    "so", "but", "just", "have", "be", "in", "at", "we",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Approximate corpus size in tokens, split evenly across communities.
    pub target_tokens: usize,
    pub shared_words: usize,
    pub topic_words: usize,
    pub users_per_community: usize,
    /// Authors active in two of the three communities.
    pub shared_users: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 2017,
            target_tokens: 1_000_000,
            shared_words: 600,
            topic_words: 150,
            users_per_community: 800,
            shared_users: 400,
        }
    }
}

#[derive(Clone, Copy)]
enum Tone {
    Positive,
    Negative,
    Neutral,
}

struct Pools {
    shared: Vec<String>,
    shared_weights: WeightedIndex<f64>,
    shared_positive: WeightedIndex<f64>,
    shared_negative: WeightedIndex<f64>,
    topics: Vec<Vec<String>>,
    positive: Vec<Vec<String>>,
    negative: Vec<Vec<String>>,
}

fn pools(cfg: &SyntheticConfig) -> Pools {
    let shared: Vec<String> = (0..cfg.shared_words).map(|i| format!("common{i}")).collect();
    // Zipf-like weights give a realistic frequency ordering
    let zipf: Vec<f64> = (0..cfg.shared_words).map(|r| 1.0 / (r as f64 + 2.0)).collect();
    // every shared word leans slightly positive or negative, as real words carry connotations
    let mut lean_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let lean: Vec<f64> = (0..cfg.shared_words).map(|_| lean_rng.random_range(-LEAN..LEAN)).collect();
    let leaning = |sign: f64| WeightedIndex::new(zipf.iter().zip(&lean).map(|(w, l)| w * (1.0 + sign * l))).expect("positive weights");
    let shared_weights = WeightedIndex::new(&zipf).expect("non-empty");
    let shared_positive = leaning(1.0);
    let shared_negative = leaning(-1.0);
    let topics = COMMUNITIES
        .iter()
        .map(|c| (0..cfg.topic_words).map(|i| format!("{c}{i}")).collect())
        .collect();
    let theme = |seeds: &[&str], fillers: &[&str], planted: &str, opposite: bool| {
        let mut words: Vec<String> = seeds.iter().chain(fillers).map(|s| s.to_string()).collect();
        words.push(planted.to_string());
        if opposite {
            words.push(OPPOSITE_USAGE.to_string());
        }
        words
    };
    let positive = (0..COMMUNITIES.len())
        .map(|c| theme(&DEFAULT_POSITIVE, &POSITIVE_FILLERS, PLANTED_POSITIVE, c == 0))
        .collect();
    let negative = (0..COMMUNITIES.len())
        .map(|c| theme(&DEFAULT_NEGATIVE, &NEGATIVE_FILLERS, PLANTED_NEGATIVE, c == 1))
        .collect();
    Pools {
        shared,
        shared_weights,
        shared_positive,
        shared_negative,
        topics,
        positive,
        negative,
    }
}

fn comment_tokens(rng: &mut ChaCha8Rng, pools: &Pools, community: usize, tone: Tone) -> Vec<String> {
    let len = rng.random_range(8..=30);
    let theme = match tone {
        Tone::Positive => Some(&pools.positive[community]),
        Tone::Negative => Some(&pools.negative[community]),
        Tone::Neutral => None,
    };
    (0..len)
        .map(|_| {
            let roll: f64 = rng.random();
            match theme {
                Some(words) if roll < 0.35 => words[rng.random_range(0..words.len())].clone(),
                _ if roll < 0.60 => FUNCTION_WORDS[rng.random_range(0..FUNCTION_WORDS.len())].to_string(),
                _ if roll < 0.82 => {
                    let topic = &pools.topics[community];
                    topic[rng.random_range(0..topic.len())].clone()
                }
                _ => {
                    let dist = match tone {
                        Tone::Positive => &pools.shared_positive,
                        Tone::Negative => &pools.shared_negative,
                        Tone::Neutral => &pools.shared_weights,
                    };
                    pools.shared[dist.sample(rng)].clone()
                }
            }
        })
        .collect()
}

fn decorate(rng: &mut ChaCha8Rng, tokens: &[String]) -> String {
    // punctuation and casing exercise the tokenizer
    let mut body = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            body.push(' ');
        }
        if i == 0 {
            let mut cs = t.chars();
            if let Some(f) = cs.next() {
                body.extend(f.to_uppercase());
                body.push_str(cs.as_str());
            }
        } else {
            body.push_str(t);
        }
        if rng.random_bool(0.05) {
            body.push(',');
        }
    }
    body.push(if rng.random_bool(0.3) { '!' } else { '.' });
    body
}

// Shared author `i` never posts in community `i % 3`, so each one spans
// exactly two communities and carries nonzero user idf.
fn shared_author(rng: &mut ChaCha8Rng, shared_users: usize, community: usize) -> usize {
    loop {
        let i = rng.random_range(0..shared_users);
        if i % COMMUNITIES.len() != community {
            return i;
        }
    }
}

/// Generates the corpus in a fixed interleaved order.
pub fn generate(cfg: &SyntheticConfig) -> Vec<CommentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pools = pools(cfg);
    let per_community = cfg.target_tokens / COMMUNITIES.len();
    let mut produced = vec![0usize; COMMUNITIES.len()];
    let mut records = Vec::new();
    // 2016-05-01 .. 2017-04-30
    let (start, end) = (1_462_060_800i64, 1_493_596_799i64);
    while produced.iter().any(|&p| p < per_community) {
        for (c, name) in COMMUNITIES.iter().enumerate() {
            if produced[c] >= per_community {
                continue;
            }
            let tone = match rng.random_range(0..10) {
                0 | 1 => Tone::Positive,
                2 | 3 => Tone::Negative,
                _ => Tone::Neutral,
            };
            let tokens = comment_tokens(&mut rng, &pools, c, tone);
            produced[c] += tokens.len();
            let author = match rng.random_range(0..100) {
                0..3 => DELETED_AUTHOR.to_string(),
                3..5 => "AutoModerator".to_string(),
                5..35 => format!("shared{}", shared_author(&mut rng, cfg.shared_users, c)),
                _ => format!("{name}fan{}", rng.random_range(0..cfg.users_per_community)),
            };
            records.push(CommentRecord {
                community: name.to_string(),
                author,
                body: decorate(&mut rng, &tokens),
                created_at: Some(rng.random_range(start..=end)),
            });
        }
    }
    records
}

/// Writes records as one JSON object per line using the default dump keys.
pub fn write_jsonl(records: &[CommentRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for r in records {
        let line = json!({
            "subreddit": r.community,
            "author": r.author,
            "body": r.body,
            "created_utc": r.created_at,
        });
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::tokenize;

    #[test]
    fn deterministic_and_sized() {
        let cfg = SyntheticConfig {
            target_tokens: 30_000,
            ..Default::default()
        };
        let a = generate(&cfg);
        assert_eq!(a, generate(&cfg));
        let tokens: usize = a.iter().map(|r| tokenize(&r.body).len()).sum();
        assert!((30_000..31_000).contains(&tokens), "{tokens}");
        assert!(a.iter().any(|r| r.is_deleted_author()));
    }

    #[test]
    fn opposite_token_placement() {
        let recs = generate(&SyntheticConfig {
            target_tokens: 60_000,
            ..Default::default()
        });
        let used_in = |c: &str| recs.iter().any(|r| r.community == c && tokenize(&r.body).iter().any(|t| t == OPPOSITE_USAGE));
        assert!(used_in("crafts"));
        assert!(used_in("fitness"));
        assert!(!used_in("gaming"));
    }
}
