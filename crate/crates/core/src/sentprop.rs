//! Seed-based sentiment lexicon induction: K-nearest-neighbor graphs over
//! word embeddings, personalized random walks from positive and negative
//! seeds, and bootstrap aggregation over seed subsamples.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::stats::pearson;
use crate::community_vectors::{CommunityVector, RepresentationKind};
use crate::embeddings::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

pub const DEFAULT_POSITIVE: [&str; 10] = [
    "love", "loved", "loves", "awesome", "nice", "amazing", "best", "fantastic", "correct", "happy",
];
pub const DEFAULT_NEGATIVE: [&str; 10] = [
    "hate", "hated", "hates", "terrible", "nasty", "awful", "worst", "horrible", "wrong", "sad",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl Default for SeedSet {
    fn default() -> Self {
        Self {
            positive: DEFAULT_POSITIVE.iter().map(|s| s.to_string()).collect(),
            negative: DEFAULT_NEGATIVE.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SeedSet {
    pub fn new(positive: Vec<String>, negative: Vec<String>) -> Result<Self> {
        let s = Self { positive, negative };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positive.is_empty() || self.negative.is_empty() {
            return Err(Error::InvalidArgument("seed lists must be non-empty".into()));
        }
        let pos: BTreeSet<&String> = self.positive.iter().collect();
        if let Some(w) = self.negative.iter().find(|w| pos.contains(w)) {
            return Err(Error::InvalidArgument(format!("seed `{w}` is both positive and negative")));
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        Self {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.positive.iter().chain(&self.negative).any(|w| w == word)
    }

    pub fn all(&self) -> Vec<String> {
        self.positive.iter().chain(&self.negative).cloned().collect()
    }

    /// Reads a plain-text seed file: `[positive]` and `[negative]` section
    /// headers followed by one word per line. `#` starts a comment.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        let mut section: Option<bool> = None;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.to_lowercase().as_str() {
                "[positive]" => section = Some(true),
                "[negative]" => section = Some(false),
                word => match section {
                    Some(true) => positive.push(word.to_string()),
                    Some(false) => negative.push(word.to_string()),
                    None => {
                        return Err(Error::Config(format!(
                            "{}: word `{word}` before any [positive]/[negative] header",
                            path.display()
                        )))
                    }
                },
            }
        }
        Self::new(positive, negative)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropParams {
    pub beta: f64,
    pub k: usize,
    pub runs: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Set from the pipeline-wide seed.
    #[serde(skip)]
    pub rng_seed: u64,
    /// Fraction of each polarity's seeds drawn per bootstrap run (7 of 10).
    pub seed_fraction: f64,
}

impl Default for PropParams {
    fn default() -> Self {
        Self {
            beta: 0.9,
            k: 25,
            runs: 50,
            tol: 1e-6,
            max_iter: 5000,
            rng_seed: 0,
            seed_fraction: 0.7,
        }
    }
}

impl PropParams {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(0.0..1.0).contains(&self.beta) {
            errs.push(format!("beta: {} not in [0, 1)", self.beta));
        }
        if self.k == 0 {
            errs.push("k: must be at least 1".to_string());
        }
        if self.runs == 0 {
            errs.push("runs: must be at least 1".to_string());
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            errs.push(format!("tol: {} must be positive", self.tol));
        }
        if self.max_iter == 0 {
            errs.push("max_iter: must be at least 1".to_string());
        }
        if !(self.seed_fraction > 0.0 && self.seed_fraction <= 1.0) {
            errs.push(format!("seed_fraction: {} not in (0, 1]", self.seed_fraction));
        }
        errs
    }
}

/// Cosine K-NN lists for every node, best first, computed once and cut to
/// any smaller K.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    pub nodes: Vec<String>,
    /// (neighbor, cosine) pairs sorted by descending cosine, then index.
    pub lists: Vec<Vec<(usize, f64)>>,
}

impl NeighborTable {
    /// Zero vectors are dropped with a warning before neighbors are found.
    pub fn build(emb: &EmbeddingMatrix, k: usize) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut unit: Vec<Vec<f64>> = Vec::new();
        for (i, w) in emb.vocab.iter().enumerate() {
            let v = emb.row(i);
            let n = norm(v);
            if n == 0.0 {
                log::warn!("word `{w}` has a zero embedding; excluded from the graph");
                continue;
            }
            nodes.push(w.clone());
            unit.push(v.iter().map(|x| x / n).collect());
        }
        if k == 0 || k >= nodes.len() {
            return Err(Error::InvalidArgument(format!(
                "K = {k} must be in 1..{} (graph size)",
                nodes.len()
            )));
        }
        let lists = (0..unit.len())
            .into_par_iter()
            .map(|i| {
                let mut sims: Vec<(usize, f64)> = (0..unit.len())
                    .filter(|&j| j != i)
                    .map(|j| (j, dot(&unit[i], &unit[j]).clamp(-1.0, 1.0)))
                    .collect();
                let order = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
                sims.select_nth_unstable_by(k - 1, order);
                sims.truncate(k);
                sims.sort_by(order);
                sims
            })
            .collect();
        Ok(Self { nodes, lists })
    }

    /// Union-symmetrized graph over each node's first `k` neighbors.
    pub fn graph(&self, k: usize) -> Result<PropagationGraph> {
        let max_k = self.lists.first().map_or(0, Vec::len);
        if k == 0 || k > max_k {
            return Err(Error::InvalidArgument(format!("K = {k} exceeds table width {max_k}")));
        }
        let mut edges: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); self.nodes.len()];
        for (i, list) in self.lists.iter().enumerate() {
            for &(j, cos) in &list[..k] {
                let w = (-cos).acos();
                edges[i].insert(j, w);
                edges[j].insert(i, w);
            }
        }
        Ok(PropagationGraph {
            index: self.nodes.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect(),
            nodes: self.nodes.clone(),
            adj: edges.into_iter().map(|m| m.into_iter().collect()).collect(),
            k,
        })
    }
}

/// Weighted undirected word graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationGraph {
    pub nodes: Vec<String>,
    pub index: HashMap<String, usize>,
    /// Sorted neighbor lists; `adj[i]` contains `(j, w)` iff `adj[j]` contains `(i, w)`.
    pub adj: Vec<Vec<(usize, f64)>>,
    pub k: usize,
}

impl PropagationGraph {
    /// Builds a graph from explicit undirected edges.
    pub fn from_edges(nodes: Vec<String>, edges: &[(usize, usize, f64)]) -> Self {
        let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nodes.len()];
        for &(a, b, w) in edges {
            adj[a].insert(b, w);
            adj[b].insert(a, w);
        }
        Self {
            index: nodes.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect(),
            nodes,
            adj: adj.into_iter().map(|m| m.into_iter().collect()).collect(),
            k: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.adj[i].binary_search_by_key(&j, |e| e.0).is_ok(),
            _ => false,
        }
    }
}

/// Edge weight `arccos(-cos)`; grows with similarity and stays in `[0, π]`.
pub fn edge_weight(cos_sim: f64) -> f64 {
    (-cos_sim.clamp(-1.0, 1.0)).acos()
}

/// Cosine K-NN graph with `arccos(-cos)` weights, union-symmetrized.
pub fn build_knn_graph(emb: &EmbeddingMatrix, k: usize) -> Result<PropagationGraph> {
    NeighborTable::build(emb, k)?.graph(k)
}

// D^{-1/2} E D^{-1/2}; an isolated node gets a self-loop of weight 1 so it
// keeps its own teleport mass.
fn normalized_adjacency(graph: &PropagationGraph) -> Vec<Vec<(usize, f64)>> {
    let degree: Vec<f64> = graph.adj.iter().map(|row| row.iter().map(|e| e.1).sum()).collect();
    graph
        .adj
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if degree[i] == 0.0 {
                return vec![(i, 1.0)];
            }
            row.iter()
                .map(|&(j, w)| (j, w / (degree[i] * degree[j]).sqrt()))
                .collect()
        })
        .collect()
}

/// Fixed point of `p = β·T·p + (1-β)·s` with `s` uniform over `seeds`.
/// Iterates from `p = s` and returns the first iterate whose fixed-point
/// residual (L1) is below `tol`.
pub fn random_walk(
    graph: &PropagationGraph,
    seeds: &[usize],
    beta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let transition = normalized_adjacency(graph);
    walk_with(&transition, graph.len(), seeds, beta, tol, max_iter)
}

fn walk_with(
    transition: &[Vec<(usize, f64)>],
    n: usize,
    seeds: &[usize],
    beta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let unique: BTreeSet<usize> = seeds.iter().copied().collect();
    if unique.is_empty() || unique.iter().any(|&s| s >= n) {
        return Err(Error::InvalidArgument("seeds must be non-empty graph nodes".into()));
    }
    let mut teleport = vec![0f64; n];
    for &s in &unique {
        teleport[s] = 1.0 / unique.len() as f64;
    }
    let mut p = teleport.clone();
    let mut next = vec![0f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        for (i, row) in transition.iter().enumerate() {
            let spread: f64 = row.iter().map(|&(j, t)| t * p[j]).sum();
            next[i] = beta * spread + (1.0 - beta) * teleport[i];
        }
        residual = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        if residual < tol {
            return Ok(p);
        }
        std::mem::swap(&mut p, &mut next);
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual,
    })
}

/// `p_pos / (p_pos + p_neg)`, or 0.5 where both are zero. Returns the
/// scores and the number of such degenerate words.
pub fn polarity_scores(p_pos: &[f64], p_neg: &[f64]) -> (Vec<f64>, usize) {
    assert_eq!(p_pos.len(), p_neg.len());
    let mut degenerate = 0;
    let scores = p_pos
        .iter()
        .zip(p_neg)
        .map(|(&a, &b)| {
            if a + b == 0.0 {
                degenerate += 1;
                0.5
            } else {
                a / (a + b)
            }
        })
        .collect();
    if degenerate > 0 {
        log::warn!("{degenerate} words unreachable from any seed; scored neutral");
    }
    (scores, degenerate)
}

// (p_pos - p_neg) / (p_pos + p_neg) = 2·score - 1. Exactly negated when the
// walks are swapped, which keeps standardized lexicons antisymmetric under a
// polarity swap.
fn centered_scores(p_pos: &[f64], p_neg: &[f64]) -> Vec<f64> {
    p_pos
        .iter()
        .zip(p_neg)
        .map(|(&a, &b)| if a + b == 0.0 { 0.0 } else { (a - b) / (a + b) })
        .collect()
}

/// Zero mean, unit population variance.
pub fn standardize(scores: &[f64]) -> Result<Vec<f64>> {
    let n = scores.len() as f64;
    if scores.len() < 2 {
        return Err(Error::DegenerateLexicon("fewer than two scores".into()));
    }
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if var == 0.0 {
        return Err(Error::DegenerateLexicon("all scores are identical".into()));
    }
    let sd = var.sqrt();
    Ok(scores.iter().map(|x| (x - mean) / sd).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentLexicon {
    pub community: String,
    pub entries: BTreeMap<String, LexiconEntry>,
}

impl SentimentLexicon {
    pub fn get(&self, word: &str) -> Option<LexiconEntry> {
        self.entries.get(word).copied()
    }

    /// `word\tmean\tstd`, words in lexicographic order, full precision.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        let io = |e| Error::io(path, e);
        writeln!(w, "word\tmean\tstd").map_err(io)?;
        for (word, e) in &self.entries {
            writeln!(w, "{word}\t{}\t{}", e.mean, e.std).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_tsv(community: &str, path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let bad = |reason: String| Error::Cache {
            path: path.to_path_buf(),
            reason,
        };
        let mut entries = BTreeMap::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if n == 0 {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(format!("line {}: expected 3 columns", n + 1)));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("line {}: bad number `{s}`", n + 1)));
            entries.insert(
                cols[0].to_string(),
                LexiconEntry {
                    mean: parse(cols[1])?,
                    std: parse(cols[2])?,
                },
            );
        }
        Ok(Self {
            community: community.to_string(),
            entries,
        })
    }
}

/// One bootstrap draw: the sampled seeds and the resulting scores, indexed
/// like the graph nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRun {
    pub positive_seeds: Vec<usize>,
    pub negative_seeds: Vec<usize>,
    pub raw: Vec<f64>,
    pub standardized: Vec<f64>,
}

// Each polarity's RNG depends on the run and on the seed words themselves, so
// swapping polarities swaps the draws and runs are reproducible in any order.
fn run_rng(rng_seed: u64, run: usize, words: &[String]) -> ChaCha8Rng {
    let mut sorted: Vec<&str> = words.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    let mut h = Sha256::new();
    h.update(rng_seed.to_le_bytes());
    h.update((run as u64).to_le_bytes());
    for w in sorted {
        h.update(w.as_bytes());
        h.update([0u8]);
    }
    let digest = h.finalize();
    ChaCha8Rng::from_seed(digest[..32].try_into().expect("sha256 is 32 bytes"))
}

fn draw(pool: &[usize], words: &[String], fraction: f64, rng_seed: u64, run: usize) -> Vec<usize> {
    let size = ((pool.len() as f64 * fraction).round() as usize).clamp(1, pool.len());
    let mut rng = run_rng(rng_seed, run, words);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), size).into_iter().map(|i| pool[i]).collect();
    picked.sort_unstable();
    picked
}

/// Seeds present in the graph; errors if fewer than three remain for either
/// polarity.
pub fn resolve_seeds(graph: &PropagationGraph, seeds: &SeedSet, community: &str) -> Result<(Vec<usize>, Vec<usize>)> {
    let split = |words: &[String]| {
        let mut found = Vec::new();
        let mut missing = Vec::new();
        for w in words {
            match graph.index.get(w) {
                Some(&i) => found.push(i),
                None => missing.push(w.clone()),
            }
        }
        (found, missing)
    };
    let (pos, missing_positive) = split(&seeds.positive);
    let (neg, missing_negative) = split(&seeds.negative);
    if pos.len() < 3 || neg.len() < 3 {
        return Err(Error::SeedStarvation {
            community: community.to_string(),
            missing_positive,
            missing_negative,
        });
    }
    if !missing_positive.is_empty() || !missing_negative.is_empty() {
        log::warn!(
            "{community}: seeds missing from vocabulary: {:?}",
            missing_positive.iter().chain(&missing_negative).collect::<Vec<_>>()
        );
    }
    Ok((pos, neg))
}

/// All bootstrap runs over a prebuilt graph, in run order.
pub fn bootstrap_runs(
    graph: &PropagationGraph,
    seeds: &SeedSet,
    params: &PropParams,
    community: &str,
) -> Result<Vec<BootstrapRun>> {
    let (pos, neg) = resolve_seeds(graph, seeds, community)?;
    let transition = normalized_adjacency(graph);
    (0..params.runs)
        .into_par_iter()
        .map(|run| {
            let ps = draw(&pos, &seeds.positive, params.seed_fraction, params.rng_seed, run);
            let ns = draw(&neg, &seeds.negative, params.seed_fraction, params.rng_seed, run);
            let walk = |s: &[usize]| walk_with(&transition, graph.len(), s, params.beta, params.tol, params.max_iter);
            let p_pos = walk(&ps)?;
            let p_neg = walk(&ns)?;
            let (raw, _) = polarity_scores(&p_pos, &p_neg);
            let standardized = standardize(&centered_scores(&p_pos, &p_neg))?;
            Ok(BootstrapRun {
                positive_seeds: ps,
                negative_seeds: ns,
                raw,
                standardized,
            })
        })
        .collect()
}

/// Per-word mean and population standard deviation of the standardized
/// scores across runs.
pub fn aggregate_runs(graph: &PropagationGraph, runs: &[BootstrapRun], community: &str) -> SentimentLexicon {
    let r = runs.len() as f64;
    let entries = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mean = runs.iter().map(|run| run.standardized[i]).sum::<f64>() / r;
            let var = runs.iter().map(|run| (run.standardized[i] - mean).powi(2)).sum::<f64>() / r;
            (w.clone(), LexiconEntry { mean, std: var.sqrt() })
        })
        .collect();
    SentimentLexicon {
        community: community.to_string(),
        entries,
    }
}

pub fn bootstrap_lexicon(
    emb: &EmbeddingMatrix,
    seeds: &SeedSet,
    params: &PropParams,
    community: &str,
) -> Result<SentimentLexicon> {
    let graph = build_knn_graph(emb, params.k)?;
    let runs = bootstrap_runs(&graph, seeds, params, community)?;
    Ok(aggregate_runs(&graph, &runs, community))
}

/// Union-vocabulary sentiment vectors. Words a community never induced are
/// set to zero. Returns the shared vocabulary and one vector per community.
pub fn assemble_sentiment_vectors(
    lexicons: &BTreeMap<String, SentimentLexicon>,
) -> Result<(Vec<String>, Vec<CommunityVector>)> {
    if lexicons.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 lexicons, got {}",
            lexicons.len()
        )));
    }
    let vocab: Vec<String> = lexicons
        .values()
        .flat_map(|l| l.entries.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let vectors = lexicons
        .iter()
        .map(|(c, lex)| CommunityVector {
            community: c.clone(),
            kind: RepresentationKind::Sentiment,
            values: vocab.iter().map(|w| lex.get(w).map_or(0.0, |e| e.mean)).collect(),
        })
        .collect();
    Ok((vocab, vectors))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub k: usize,
    pub pearson: f64,
}

/// Pearson correlation of bootstrap-mean scores between each `(beta, K)`
/// setting and the reference setting in `base`.
pub fn sensitivity_sweep(
    emb: &EmbeddingMatrix,
    seeds: &SeedSet,
    base: &PropParams,
    grid: &[(f64, usize)],
    community: &str,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty sensitivity grid".into()));
    }
    let max_k = grid.iter().map(|g| g.1).chain([base.k]).max().unwrap();
    let table = NeighborTable::build(emb, max_k)?;
    let lexicon = |beta: f64, k: usize| -> Result<SentimentLexicon> {
        let graph = table.graph(k)?;
        let params = PropParams { beta, k, ..base.clone() };
        let runs = bootstrap_runs(&graph, seeds, &params, community)?;
        Ok(aggregate_runs(&graph, &runs, community))
    };
    let reference = lexicon(base.beta, base.k)?;
    grid.iter()
        .map(|&(beta, k)| {
            let other = lexicon(beta, k)?;
            let (a, b): (Vec<f64>, Vec<f64>) = reference
                .entries
                .iter()
                .filter_map(|(w, e)| other.get(w).map(|o| (e.mean, o.mean)))
                .unzip();
            Ok(SweepRow {
                beta,
                k,
                pearson: pearson(&a, &b)?,
            })
        })
        .collect()
}
