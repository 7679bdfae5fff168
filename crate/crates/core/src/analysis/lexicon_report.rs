use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sentprop::{SeedSet, SentimentLexicon};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordVariance {
    pub word: String,
    pub variance: f64,
    pub most_positive: String,
    pub most_negative: String,
}

/// Population variance of a word's bootstrap-mean score across the
/// communities that induced it, highest first. Words induced by only one
/// community are not ranked.
pub fn word_variance_ranking(lexicons: &BTreeMap<String, SentimentLexicon>) -> Result<Vec<WordVariance>> {
    if lexicons.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 lexicons, got {}",
            lexicons.len()
        )));
    }
    let words: BTreeSet<&String> = lexicons.values().flat_map(|l| l.entries.keys()).collect();
    let mut out: Vec<WordVariance> = words
        .into_iter()
        .filter_map(|w| {
            // lexicons iterate in community order, so ties resolve to the first name
            let scores: Vec<(&String, f64)> = lexicons
                .iter()
                .filter_map(|(c, l)| l.get(w).map(|e| (c, e.mean)))
                .collect();
            if scores.len() < 2 {
                return None;
            }
            let n = scores.len() as f64;
            let mean = scores.iter().map(|s| s.1).sum::<f64>() / n;
            let variance = scores.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / n;
            let mut most_positive = scores[0];
            let mut most_negative = scores[0];
            for &s in &scores[1..] {
                if s.1 > most_positive.1 {
                    most_positive = s;
                }
                if s.1 < most_negative.1 {
                    most_negative = s;
                }
            }
            Some(WordVariance {
                word: w.clone(),
                variance,
                most_positive: most_positive.0.clone(),
                most_negative: most_negative.0.clone(),
            })
        })
        .collect();
    out.sort_by(|a, b| b.variance.total_cmp(&a.variance).then_with(|| a.word.cmp(&b.word)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub community: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordProfile {
    pub word: String,
    /// Sorted by descending mean.
    pub entries: Vec<ProfileEntry>,
    /// Communities that did not induce the word.
    pub missing: Vec<String>,
}

pub fn word_profile(word: &str, lexicons: &BTreeMap<String, SentimentLexicon>) -> Result<WordProfile> {
    let mut entries = Vec::new();
    let mut missing = Vec::new();
    for (c, lex) in lexicons {
        match lex.get(word) {
            Some(e) => entries.push(ProfileEntry {
                community: c.clone(),
                mean: e.mean,
                std: e.std,
            }),
            None => missing.push(c.clone()),
        }
    }
    if entries.is_empty() {
        return Err(Error::WordNotFound(word.to_string()));
    }
    entries.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.community.cmp(&b.community)));
    Ok(WordProfile {
        word: word.to_string(),
        entries,
        missing,
    })
}

/// The `n` highest- and `n` lowest-scoring words that are not seeds.
pub fn top_polar_words(
    lexicon: &SentimentLexicon,
    seeds: &SeedSet,
    n: usize,
) -> (Vec<(String, f64)>, Vec<(String, f64)>) {
    let mut words: Vec<(String, f64)> = lexicon
        .entries
        .iter()
        .filter(|(w, _)| !seeds.contains(w))
        .map(|(w, e)| (w.clone(), e.mean))
        .collect();
    words.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let positive: Vec<_> = words.iter().take(n).cloned().collect();
    words.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let negative: Vec<_> = words.into_iter().take(n).collect();
    (positive, negative)
}
