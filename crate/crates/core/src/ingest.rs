//! Comment-dump ingestion: parsing, community selection, tokenization and
//! per-community token streams with comment boundaries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Author name used by the dump for removed accounts.
pub const DELETED_AUTHOR: &str = "[deleted]";

/// Reserved separator placed between comments. The tokenizer only emits
/// alphanumeric tokens, so this can never collide with a real word.
pub const DUMMY_TOKEN: &str = "<dummy>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub community: String,
    pub author: String,
    pub body: String,
    pub created_at: Option<i64>,
}

impl CommentRecord {
    /// Deleted authors still contribute text but never user counts.
    pub fn is_deleted_author(&self) -> bool {
        self.author == DELETED_AUTHOR
    }
}

/// JSON keys of the input records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldNames {
    pub community: String,
    pub author: String,
    pub body: String,
    pub created_at: String,
}

impl Default for FieldNames {
    fn default() -> Self {
        Self {
            community: "subreddit".into(),
            author: "author".into(),
            body: "body".into(),
            created_at: "created_utc".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutcome {
    pub records: Vec<CommentRecord>,
    pub malformed: usize,
}

/// Parses one JSON record per line. Blank lines are ignored; lines that are
/// not valid JSON objects or lack a non-empty community/body are tallied in
/// `malformed` and skipped.
pub fn parse_comment_stream<R: BufRead>(reader: R, fields: &FieldNames) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line, fields) {
            Some(rec) => out.records.push(rec),
            None => out.malformed += 1,
        }
    }
    if out.malformed > 0 {
        log::warn!("skipped {} malformed input lines", out.malformed);
    }
    Ok(out)
}

fn parse_line(line: &str, fields: &FieldNames) -> Option<CommentRecord> {
    let value: Value = serde_json::from_str(line).ok()?;
    let obj = value.as_object()?;
    let community = obj.get(&fields.community)?.as_str()?.to_string();
    let body = obj.get(&fields.body)?.as_str()?.to_string();
    if community.is_empty() || body.is_empty() {
        return None;
    }
    let author = match obj.get(&fields.author) {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Null) | None => DELETED_AUTHOR.to_string(),
        Some(_) => return None,
    };
    // dumps store created_utc as either an integer or a numeric string
    let created_at = match obj.get(&fields.created_at) {
        None | Some(Value::Null) => None,
        Some(Value::Number(n)) => Some(n.as_i64().or_else(|| n.as_f64().map(|f| f as i64))?),
        Some(Value::String(s)) => Some(s.parse::<i64>().ok()?),
        Some(_) => return None,
    };
    Some(CommentRecord {
        community,
        author,
        body,
        created_at,
    })
}

/// Reads and parses every input file in order.
pub fn parse_files<P: AsRef<Path>>(paths: &[P], fields: &FieldNames) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    for path in paths {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let part = parse_comment_stream(BufReader::new(file), fields)?;
        out.records.extend(part.records);
        out.malformed += part.malformed;
    }
    Ok(out)
}

/// Which communities make it into the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommunitySelection {
    /// `None` admits every community seen in the input.
    pub include: Option<BTreeSet<String>>,
    /// Default communities to drop.
    pub exclude: BTreeSet<String>,
    pub min_subscribers: Option<u64>,
    /// Subscriber counts per community, required when `min_subscribers` is set.
    pub subscribers: BTreeMap<String, u64>,
    pub top_n: usize,
    /// Inclusive unix-seconds range; records without a timestamp pass.
    pub date_range: Option<(i64, i64)>,
}

impl Default for CommunitySelection {
    fn default() -> Self {
        Self {
            include: None,
            exclude: BTreeSet::new(),
            min_subscribers: None,
            subscribers: BTreeMap::new(),
            top_n: 400,
            date_range: None,
        }
    }
}

impl CommunitySelection {
    /// Removes excluded names from the include list so the two are disjoint.
    pub fn resolve(mut self) -> Result<Self> {
        if self.top_n == 0 {
            return Err(Error::InvalidArgument("top_n must be at least 1".into()));
        }
        if let Some(include) = self.include.as_mut() {
            include.retain(|c| !self.exclude.contains(c));
        }
        Ok(self)
    }

    fn admits(&self, community: &str) -> bool {
        if self.exclude.contains(community) {
            return false;
        }
        if let Some(include) = &self.include {
            if !include.contains(community) {
                return false;
            }
        }
        if let Some(min) = self.min_subscribers {
            match self.subscribers.get(community) {
                Some(&n) if n >= min => {}
                _ => return false,
            }
        }
        true
    }

    fn in_window(&self, rec: &CommentRecord) -> bool {
        match (self.date_range, rec.created_at) {
            (Some((lo, hi)), Some(t)) => t >= lo && t <= hi,
            _ => true,
        }
    }
}

/// Groups records by community, keeping input order within each community,
/// and retains the `top_n` largest communities by comment count.
pub fn filter_communities(
    records: Vec<CommentRecord>,
    sel: &CommunitySelection,
) -> BTreeMap<String, Vec<CommentRecord>> {
    let mut groups: BTreeMap<String, Vec<CommentRecord>> = BTreeMap::new();
    for rec in records {
        if sel.admits(&rec.community) && sel.in_window(&rec) {
            groups.entry(rec.community.clone()).or_default().push(rec);
        }
    }
    if groups.len() > sel.top_n {
        let mut sizes: Vec<(usize, String)> =
            groups.iter().map(|(c, recs)| (recs.len(), c.clone())).collect();
        // larger first, then by name
        sizes.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let keep: BTreeSet<String> = sizes.into_iter().take(sel.top_n).map(|(_, c)| c).collect();
        groups.retain(|c, _| keep.contains(c));
    }
    if groups.is_empty() {
        log::warn!("community selection produced an empty corpus");
    }
    groups
}

/// Lowercases, removes every character that is neither alphanumeric nor
/// whitespace, and splits on whitespace. HTML entities are not decoded, so
/// `&lt;3` becomes `lt3`.
pub fn tokenize(body: &str) -> Vec<String> {
    let cleaned: String = body
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

/// All comments of one community joined into a single document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    pub community: String,
    pub tokens: Vec<String>,
    /// Index of the first token of each comment.
    pub comment_boundaries: Vec<usize>,
}

impl TokenStream {
    pub fn is_dummy(&self, i: usize) -> bool {
        self.tokens[i] == DUMMY_TOKEN
    }

    /// Tokens that are not separators.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str).filter(|t| *t != DUMMY_TOKEN)
    }

    pub fn comment_count(&self) -> usize {
        self.comment_boundaries.len()
    }
}

/// Joins comments with `n_dummy` separator tokens so that no co-occurrence
/// window of width `window` can reach across a comment boundary. Empty
/// comments are dropped first.
pub fn concat_with_dummies(
    community: &str,
    comments: &[Vec<String>],
    n_dummy: usize,
    window: usize,
) -> Result<TokenStream> {
    if n_dummy < window {
        return Err(Error::Config(format!(
            "n_dummy ({n_dummy}) must be at least the context window ({window})"
        )));
    }
    let mut stream = TokenStream {
        community: community.to_string(),
        ..Default::default()
    };
    for comment in comments.iter().filter(|c| !c.is_empty()) {
        if !stream.tokens.is_empty() {
            stream
                .tokens
                .extend(std::iter::repeat_n(DUMMY_TOKEN.to_string(), n_dummy));
        }
        stream.comment_boundaries.push(stream.tokens.len());
        stream.tokens.extend(comment.iter().cloned());
    }
    Ok(stream)
}

/// Per-community author comment counts. Deleted authors are skipped.
pub fn user_counts(
    corpora: &BTreeMap<String, Vec<CommentRecord>>,
) -> BTreeMap<String, BTreeMap<String, u64>> {
    corpora
        .iter()
        .map(|(community, recs)| {
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            for rec in recs.iter().filter(|r| !r.is_deleted_author()) {
                *counts.entry(rec.author.clone()).or_default() += 1;
            }
            (community.clone(), counts)
        })
        .collect()
}

/// Writes the stream as one token per line plus a sidecar with one boundary
/// index per line.
pub fn write_token_stream(stream: &TokenStream, tokens_path: &Path, bounds_path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(tokens_path).map_err(|e| Error::io(tokens_path, e))?);
    for t in &stream.tokens {
        writeln!(w, "{t}").map_err(|e| Error::io(tokens_path, e))?;
    }
    w.flush().map_err(|e| Error::io(tokens_path, e))?;
    let mut w = BufWriter::new(File::create(bounds_path).map_err(|e| Error::io(bounds_path, e))?);
    for b in &stream.comment_boundaries {
        writeln!(w, "{b}").map_err(|e| Error::io(bounds_path, e))?;
    }
    w.flush().map_err(|e| Error::io(bounds_path, e))?;
    Ok(())
}

pub fn read_token_stream(community: &str, tokens_path: &Path, bounds_path: &Path) -> Result<TokenStream> {
    let tokens = BufReader::new(File::open(tokens_path).map_err(|e| Error::io(tokens_path, e))?)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(tokens_path, e))?;
    let mut comment_boundaries = Vec::new();
    let reader = BufReader::new(File::open(bounds_path).map_err(|e| Error::io(bounds_path, e))?);
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(bounds_path, e))?;
        let idx = line.trim().parse::<usize>().map_err(|_| Error::Cache {
            path: bounds_path.to_path_buf(),
            reason: format!("bad boundary index `{line}`"),
        })?;
        if idx >= tokens.len() || comment_boundaries.last().is_some_and(|&p| idx <= p) {
            return Err(Error::Cache {
                path: bounds_path.to_path_buf(),
                reason: format!("boundary {idx} out of order or range"),
            });
        }
        comment_boundaries.push(idx);
    }
    Ok(TokenStream {
        community: community.to_string(),
        tokens,
        comment_boundaries,
    })
}

/// Counts of each non-dummy token.
pub fn term_frequencies(stream: &TokenStream) -> HashMap<String, u64> {
    let mut freq: HashMap<String, u64> = HashMap::new();
    for w in stream.words() {
        *freq.entry(w.to_string()).or_default() += 1;
    }
    freq
}

/// English stop words removed before the unigram df filter. Replaceable via
/// the pipeline config.
pub const DEFAULT_STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];
