//! Community-specific word embeddings from windowed co-occurrence counts,
//! smoothed PPMI and truncated SVD.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{TokenStream, DUMMY_TOKEN};
use crate::linalg::{cosine, truncated_svd, CsrMatrix, SvdOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedParams {
    pub window: usize,
    pub smoothing_c: f64,
    pub dims: usize,
    pub min_count: u64,
    pub top_words: usize,
    /// Exponent applied to singular values when forming word vectors.
    pub eig_exponent: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        Self {
            window: 4,
            smoothing_c: 0.75,
            dims: 100,
            min_count: 1,
            top_words: 5000,
            eig_exponent: 1.0,
        }
    }
}

impl EmbedParams {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.window == 0 {
            errs.push("window: must be at least 1".to_string());
        }
        if !(self.smoothing_c > 0.0 && self.smoothing_c <= 1.0) {
            errs.push(format!("smoothing_c: {} not in (0, 1]", self.smoothing_c));
        }
        if self.dims == 0 {
            errs.push("dims: must be at least 1".to_string());
        }
        if self.min_count == 0 {
            errs.push("min_count: must be at least 1".to_string());
        }
        if ![0.0, 0.5, 1.0].contains(&self.eig_exponent) {
            errs.push(format!("eig_exponent: {} not one of 0, 0.5, 1", self.eig_exponent));
        }
        errs
    }
}

/// Symmetric word–context counts. Rows and columns share `vocab`, which is
/// ordered by descending frequency (ties lexicographic).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCountMatrix {
    pub vocab: Vec<String>,
    pub index: HashMap<String, usize>,
    /// Unigram frequency of each vocabulary word.
    pub freq: Vec<u64>,
    pub counts: CsrMatrix,
    pub total: f64,
}

impl SparseCountMatrix {
    pub fn get(&self, w: &str, c: &str) -> f64 {
        match (self.index.get(w), self.index.get(c)) {
            (Some(&i), Some(&j)) => self.counts.get(i, j),
            _ => 0.0,
        }
    }
}

/// For every ordered position pair with `1 <= |i - j| <= window` where neither
/// token is a separator and both words occur at least `min_count` times,
/// adds one to `counts[w_i][w_j]`.
pub fn count_cooccurrences(stream: &TokenStream, window: usize, min_count: u64) -> SparseCountMatrix {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for w in stream.words() {
        *freq.entry(w).or_default() += 1;
    }
    let mut vocab: Vec<(&str, u64)> = freq.into_iter().filter(|(_, n)| *n >= min_count).collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, (w, _))| (*w, i as u32)).collect();
    let ids: Vec<Option<u32>> = stream
        .tokens
        .iter()
        .map(|t| if t == DUMMY_TOKEN { None } else { index.get(t.as_str()).copied() })
        .collect();

    let mut pairs: HashMap<(u32, u32), u64> = HashMap::new();
    for i in 0..ids.len() {
        let Some(a) = ids[i] else { continue };
        for &b in ids[i + 1..(i + window + 1).min(ids.len())].iter().flatten() {
            *pairs.entry((a, b)).or_default() += 1;
            *pairs.entry((b, a)).or_default() += 1;
        }
    }
    let total = pairs.values().sum::<u64>() as f64;
    let trip = pairs
        .into_iter()
        .map(|((a, b), n)| (a as usize, b as usize, n as f64))
        .collect();
    let n = vocab.len();
    SparseCountMatrix {
        index: vocab.iter().enumerate().map(|(i, (w, _))| (w.to_string(), i)).collect(),
        freq: vocab.iter().map(|(_, f)| *f).collect(),
        vocab: vocab.into_iter().map(|(w, _)| w.to_string()).collect(),
        counts: CsrMatrix::from_triplets(n, n, trip),
        total,
    }
}

/// `max(0, ln[p(w,c) / (p(w) · p_α(c))])` on every stored cell, where the
/// context marginal is raised to `smoothing_c` and renormalized.
pub fn ppmi(counts: &SparseCountMatrix, smoothing_c: f64) -> Result<CsrMatrix> {
    if counts.total <= 0.0 {
        return Err(Error::EmptyCorpus("co-occurrence total is zero".into()));
    }
    let total = counts.total;
    let row_sums = counts.counts.row_sums();
    let col_sums = counts.counts.transpose().row_sums();
    let smoothed: Vec<f64> = col_sums.iter().map(|c| c.powf(smoothing_c)).collect();
    let smoothed_total: f64 = smoothed.iter().sum();
    let rows: Vec<Vec<(usize, f64)>> = (0..counts.counts.rows())
        .map(|w| {
            let p_w = row_sums[w] / total;
            counts
                .counts
                .row(w)
                .map(|(c, n)| {
                    let p_wc = n / total;
                    let p_c = smoothed[c] / smoothed_total;
                    (c, (p_wc / (p_w * p_c)).ln().max(0.0))
                })
                .collect()
        })
        .collect();
    Ok(CsrMatrix::from_sorted_rows(counts.counts.cols(), rows))
}

/// Dense word vectors, one row per vocabulary word.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub vocab: Vec<String>,
    pub index: HashMap<String, usize>,
    pub dims: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(vocab: Vec<String>, dims: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != vocab.len() * dims {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} words of {dims} dims",
                data.len(),
                vocab.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite embedding entry".into()));
        }
        let index = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(Self {
            vocab,
            index,
            dims,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    /// Keeps only the rows for which `keep` is true, in order.
    pub fn select(&self, keep: impl Fn(usize, &str) -> bool) -> Self {
        let mut vocab = Vec::new();
        let mut data = Vec::new();
        for (i, w) in self.vocab.iter().enumerate() {
            if keep(i, w) {
                vocab.push(w.clone());
                data.extend_from_slice(self.row(i));
            }
        }
        Self::new(vocab, self.dims, data).expect("subset of a valid matrix")
    }

    /// The `n` nearest words to `word` by cosine similarity.
    pub fn nearest_neighbors(&self, word: &str, n: usize) -> Vec<(String, f64)> {
        let Some(target) = self.vector(word) else {
            return Vec::new();
        };
        let mut sims: Vec<(String, f64)> = self
            .vocab
            .iter()
            .enumerate()
            .filter(|(_, w)| w.as_str() != word)
            .filter_map(|(i, w)| cosine(target, self.row(i)).map(|s| (w.clone(), s)))
            .collect();
        sims.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        sims.truncate(n);
        sims
    }

    /// Little-endian binary matrix (`rows`, `dims` as u64 then f64 values)
    /// plus a vocabulary file with one word per line.
    pub fn write(&self, matrix_path: &Path, vocab_path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(matrix_path).map_err(|e| Error::io(matrix_path, e))?);
        let mut buf = Vec::with_capacity(16 + self.data.len() * 8);
        buf.extend_from_slice(&(self.vocab.len() as u64).to_le_bytes());
        buf.extend_from_slice(&(self.dims as u64).to_le_bytes());
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf).and_then(|_| w.flush()).map_err(|e| Error::io(matrix_path, e))?;
        let mut w = BufWriter::new(File::create(vocab_path).map_err(|e| Error::io(vocab_path, e))?);
        for word in &self.vocab {
            writeln!(w, "{word}").map_err(|e| Error::io(vocab_path, e))?;
        }
        w.flush().map_err(|e| Error::io(vocab_path, e))
    }

    pub fn read(matrix_path: &Path, vocab_path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        File::open(matrix_path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(matrix_path, e))?;
        let bad = |reason: &str| Error::Cache {
            path: matrix_path.to_path_buf(),
            reason: reason.to_string(),
        };
        if bytes.len() < 16 {
            return Err(bad("truncated header"));
        }
        let rows = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
        let dims = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if bytes.len() != 16 + rows * dims * 8 {
            return Err(bad("size does not match header"));
        }
        let data = bytes[16..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let vocab = BufReader::new(File::open(vocab_path).map_err(|e| Error::io(vocab_path, e))?)
            .lines()
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(vocab_path, e))?;
        if vocab.len() != rows {
            return Err(bad("vocabulary length does not match matrix rows"));
        }
        Self::new(vocab, dims, data)
    }
}

/// Factors the PPMI matrix and keeps `U · Σ^exponent` for the `top_words`
/// most frequent words plus any of `keep_words` present. `counts` supplies
/// the vocabulary and frequency order.
pub fn embed_svd(
    ppmi_matrix: &CsrMatrix,
    counts: &SparseCountMatrix,
    params: &EmbedParams,
    keep_words: &[String],
    opts: &SvdOptions,
) -> Result<EmbeddingMatrix> {
    let n = ppmi_matrix.rows();
    if n == 0 {
        return Err(Error::EmptyCorpus("empty vocabulary".into()));
    }
    let mut dims = params.dims;
    if dims > n {
        log::warn!("vocabulary of {n} words is smaller than {dims} dims; reducing dims to {n}");
        dims = n;
    }
    let svd = truncated_svd(ppmi_matrix, dims, opts)?;
    let vectors = svd.scaled_left(params.eig_exponent);
    let data: Vec<f64> = (0..n).flat_map(|r| vectors.row(r).iter().copied().collect::<Vec<_>>()).collect();
    let full = EmbeddingMatrix::new(counts.vocab.clone(), dims, data)?;
    // vocab is frequency ordered, so the first top_words rows are the most frequent
    Ok(full.select(|i, w| i < params.top_words || keep_words.iter().any(|k| k == w)))
}

/// Counting, PPMI and SVD for one community.
pub fn build_embeddings(
    stream: &TokenStream,
    params: &EmbedParams,
    keep_words: &[String],
    opts: &SvdOptions,
) -> Result<EmbeddingMatrix> {
    let counts = count_cooccurrences(stream, params.window, params.min_count);
    let weights = ppmi(&counts, params.smoothing_c)?;
    embed_svd(&weights, &counts, params, keep_words, opts)
}
