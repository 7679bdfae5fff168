//! Text- and user-based community representations: tf-idf weighting over
//! communities as documents, df filtering, truncated SVD and unit scaling.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{term_frequencies, TokenStream};
use crate::linalg::{truncated_svd, CsrMatrix, SvdOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationKind {
    Text,
    User,
    Sentiment,
}

impl RepresentationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RepresentationKind::Text => "text",
            RepresentationKind::User => "user",
            RepresentationKind::Sentiment => "sentiment",
        }
    }
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepresentationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "user" => Ok(Self::User),
            "sentiment" => Ok(Self::Sentiment),
            other => Err(Error::InvalidArgument(format!("unknown representation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityVector {
    pub community: String,
    pub kind: RepresentationKind,
    pub values: Vec<f64>,
}

/// `(1 + ln tf) · ln(N / df)`.
pub fn tfidf_weight(tf: u64, df: usize, n: usize) -> Result<f64> {
    if tf == 0 {
        return Err(Error::InvalidArgument("tf must be at least 1".into()));
    }
    if df == 0 || df > n {
        return Err(Error::InvalidArgument(format!("df {df} outside 1..={n}")));
    }
    Ok((1.0 + (tf as f64).ln()) * (n as f64 / df as f64).ln())
}

/// Retained features satisfy `lower < df <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfBounds {
    pub lower: usize,
    pub upper: usize,
}

impl DfBounds {
    pub fn contains(&self, df: usize) -> bool {
        df > self.lower && df <= self.upper
    }

    // Scales `(lower, 380]` of 400 communities proportionally to `n`.
    fn scaled(n: usize, lower_at_400: usize) -> Self {
        let round = |x: usize| (x * n + 200) / 400;
        Self {
            lower: round(lower_at_400),
            upper: n - round(20),
        }
    }

    /// `(5, 380]` at 400 communities.
    pub fn text_default(n: usize) -> Self {
        Self::scaled(n, 5)
    }

    /// `(1, 380]` at 400 communities; never admits single-community users.
    pub fn user_default(n: usize) -> Self {
        let mut b = Self::scaled(n, 1);
        b.lower = b.lower.max(1);
        b
    }
}

/// Community × feature tf-idf weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfMatrix {
    pub communities: Vec<String>,
    pub features: Vec<String>,
    pub df: Vec<usize>,
    pub weights: CsrMatrix,
}

impl TfIdfMatrix {
    /// Number of communities, N.
    pub fn n_docs(&self) -> usize {
        self.communities.len()
    }
}

/// Weights raw per-community feature counts. Features outside `bounds`
/// (and any in `skip`) are dropped before weighting.
pub fn build_tfidf<S: std::hash::BuildHasher>(
    counts: &BTreeMap<String, HashMap<String, u64, S>>,
    bounds: DfBounds,
    skip: Option<&HashSet<String>>,
) -> Result<TfIdfMatrix> {
    let n = counts.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "tf-idf needs at least 2 communities, got {n}"
        )));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for feats in counts.values() {
        for (f, &c) in feats {
            if c > 0 {
                *df.entry(f.as_str()).or_default() += 1;
            }
        }
    }
    let kept: Vec<(&str, usize)> = df
        .into_iter()
        .filter(|(f, d)| bounds.contains(*d) && !skip.is_some_and(|s| s.contains(*f)))
        .collect();
    if kept.is_empty() {
        return Err(Error::Config(format!(
            "no features survive df bounds ({}, {}] over {n} communities",
            bounds.lower, bounds.upper
        )));
    }
    let index: HashMap<&str, usize> = kept.iter().enumerate().map(|(i, (f, _))| (*f, i)).collect();
    let rows: Vec<Vec<(usize, f64)>> = counts
        .values()
        .map(|feats| {
            let mut row: Vec<(usize, f64)> = feats
                .iter()
                .filter(|(_, &c)| c > 0)
                .filter_map(|(f, &c)| {
                    let j = *index.get(f.as_str())?;
                    Some((j, tfidf_weight(c, kept[j].1, n).expect("df within 1..=n")))
                })
                .collect();
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    Ok(TfIdfMatrix {
        communities: counts.keys().cloned().collect(),
        features: kept.iter().map(|(f, _)| f.to_string()).collect(),
        df: kept.iter().map(|(_, d)| *d).collect(),
        weights: CsrMatrix::from_sorted_rows(kept.len(), rows),
    })
}

/// Unigram tf-idf with stop-word removal.
pub fn build_text_matrix(
    corpora: &BTreeMap<String, TokenStream>,
    bounds: DfBounds,
    stop_words: &HashSet<String>,
) -> Result<TfIdfMatrix> {
    let freqs: Vec<(String, HashMap<String, u64>)> = corpora
        .par_iter()
        .map(|(c, stream)| (c.clone(), term_frequencies(stream)))
        .collect();
    build_tfidf(&freqs.into_iter().collect(), bounds, Some(stop_words))
}

/// User tf-idf where tf is the number of comments a user made in the community.
pub fn build_user_matrix(
    user_counts: &BTreeMap<String, BTreeMap<String, u64>>,
    bounds: DfBounds,
) -> Result<TfIdfMatrix> {
    let counts: BTreeMap<String, HashMap<String, u64>> = user_counts
        .iter()
        .map(|(c, m)| (c.clone(), m.iter().map(|(u, &n)| (u.clone(), n)).collect()))
        .collect();
    build_tfidf(&counts, bounds, None)
}

/// Projects each community onto the top `dims` singular directions
/// (`U·Σ`) and scales every row to unit Euclidean norm.
pub fn reduce_and_normalize(
    m: &TfIdfMatrix,
    kind: RepresentationKind,
    dims: usize,
    opts: &SvdOptions,
) -> Result<Vec<CommunityVector>> {
    let limit = m.weights.rows().min(m.weights.cols());
    if dims == 0 || dims > limit {
        return Err(Error::InvalidArgument(format!(
            "dims {dims} must be in 1..={limit} for a {}x{} matrix",
            m.weights.rows(),
            m.weights.cols()
        )));
    }
    for (r, c) in m.communities.iter().enumerate() {
        if m.weights.row(r).all(|(_, v)| v == 0.0) {
            return Err(Error::EmptyCommunity(c.clone()));
        }
    }
    let svd = truncated_svd(&m.weights, dims, opts)?;
    let reduced = svd.scaled_left(1.0);
    m.communities
        .iter()
        .enumerate()
        .map(|(r, c)| {
            let row: Vec<f64> = reduced.row(r).iter().copied().collect();
            let norm = crate::linalg::norm(&row);
            if norm == 0.0 {
                return Err(Error::EmptyCommunity(c.clone()));
            }
            Ok(CommunityVector {
                community: c.clone(),
                kind,
                values: row.iter().map(|v| v / norm).collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cosine;
    use proptest::prelude::*;

    #[test]
    fn weight_examples() {
        assert_eq!(tfidf_weight(17, 400, 400).unwrap(), 0.0);
        let w = tfidf_weight(10, 40, 400).unwrap();
        let expected = (1.0 + 10f64.ln()) * 10f64.ln();
        assert!((w - expected).abs() < 1e-12);
        assert!((w - 7.6045).abs() < 1e-4);
        assert!(tfidf_weight(1, 0, 5).is_err());
        assert!(tfidf_weight(1, 6, 5).is_err());
        assert!(tfidf_weight(0, 1, 5).is_err());
    }

    #[test]
    fn default_bounds_match_full_scale_values() {
        assert_eq!(DfBounds::text_default(400), DfBounds { lower: 5, upper: 380 });
        assert_eq!(DfBounds::user_default(400), DfBounds { lower: 1, upper: 380 });
        let b = DfBounds::text_default(400);
        assert!(!b.contains(5));
        assert!(b.contains(6));
        assert!(!b.contains(381));
        let u = DfBounds::user_default(400);
        assert!(!u.contains(1));
        assert!(u.contains(2));
        assert_eq!(DfBounds::user_default(3), DfBounds { lower: 1, upper: 3 });
    }

    fn counts(spec: &[(&str, &[(&str, u64)])]) -> BTreeMap<String, HashMap<String, u64>> {
        spec.iter()
            .map(|(c, fs)| (c.to_string(), fs.iter().map(|(f, n)| (f.to_string(), *n)).collect()))
            .collect()
    }

    #[test]
    fn user_filter_and_raw_tf() {
        let uc: BTreeMap<String, BTreeMap<String, u64>> = [
            ("a", vec![("solo", 3u64), ("pair", 7)]),
            ("b", vec![("pair", 2), ("x", 1)]),
            ("c", vec![("x", 4)]),
        ]
        .into_iter()
        .map(|(c, v)| (c.to_string(), v.into_iter().map(|(u, n)| (u.to_string(), n)).collect()))
        .collect();
        let m = build_user_matrix(&uc, DfBounds { lower: 1, upper: 3 }).unwrap();
        assert_eq!(m.features, vec!["pair", "x"]);
        let expected = tfidf_weight(7, 2, 3).unwrap();
        assert_eq!(m.weights.get(0, 0), expected);
    }

    #[test]
    fn no_surviving_features_is_config_error() {
        let c = counts(&[("a", &[("w", 1)]), ("b", &[("v", 1)])]);
        assert!(matches!(
            build_tfidf(&c, DfBounds { lower: 1, upper: 2 }, None),
            Err(Error::Config(_))
        ));
        let one = counts(&[("a", &[("w", 1)])]);
        assert!(build_tfidf(&one, DfBounds { lower: 0, upper: 1 }, None).is_err());
    }

    #[test]
    fn stop_words_removed() {
        let c = counts(&[("a", &[("the", 9), ("cat", 1)]), ("b", &[("the", 9), ("dog", 2)])]);
        let stop: HashSet<String> = ["the".to_string()].into_iter().collect();
        let m = build_tfidf(&c, DfBounds { lower: 0, upper: 2 }, Some(&stop)).unwrap();
        assert_eq!(m.features, vec!["cat", "dog"]);
    }

    fn dense_rows(rows: &[&[f64]]) -> TfIdfMatrix {
        let cols = rows[0].len();
        let trip = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (r, c, v)))
            .collect();
        TfIdfMatrix {
            communities: (0..rows.len()).map(|i| format!("c{i}")).collect(),
            features: (0..cols).map(|i| format!("f{i}")).collect(),
            df: vec![1; cols],
            weights: CsrMatrix::from_triplets(rows.len(), cols, trip),
        }
    }

    #[test]
    fn rank_two_reduction_preserves_cosines() {
        // rows are combinations of two basis rows, so rank 2
        let b1 = [1.0, 0.0, 2.0, 1.0, 0.5];
        let b2 = [0.0, 3.0, 1.0, 0.0, 1.0];
        let combos = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 0.5)];
        let rows: Vec<Vec<f64>> = combos
            .iter()
            .map(|(x, y)| b1.iter().zip(&b2).map(|(p, q)| x * p + y * q).collect())
            .collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let m = dense_rows(&refs);
        let vecs = reduce_and_normalize(&m, RepresentationKind::Text, 2, &SvdOptions::default()).unwrap();
        for i in 0..4 {
            assert!((crate::linalg::norm(&vecs[i].values) - 1.0).abs() < 1e-9);
            for j in 0..4 {
                let full = cosine(&rows[i], &rows[j]).unwrap();
                let red = cosine(&vecs[i].values, &vecs[j].values).unwrap();
                assert!((full - red).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn square_full_rank_is_lossless() {
        let m = dense_rows(&[&[2.0, 1.0, 0.0], &[0.0, 1.0, 3.0], &[1.0, 0.0, 1.0]]);
        let vecs = reduce_and_normalize(&m, RepresentationKind::User, 3, &SvdOptions::default()).unwrap();
        let full = m.weights.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let a: Vec<f64> = full.row(i).iter().copied().collect();
                let b: Vec<f64> = full.row(j).iter().copied().collect();
                assert!((cosine(&a, &b).unwrap() - cosine(&vecs[i].values, &vecs[j].values).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reduction_errors() {
        let m = dense_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            reduce_and_normalize(&m, RepresentationKind::Text, 1, &SvdOptions::default()),
            Err(Error::EmptyCommunity(c)) if c == "c1"
        ));
        let m = dense_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(reduce_and_normalize(&m, RepresentationKind::Text, 3, &SvdOptions::default()).is_err());
    }

    proptest! {
        #[test]
        fn weight_monotone(tf in 1u64..1000, df in 1usize..399) {
            let n = 400;
            prop_assert!(tfidf_weight(tf + 1, df, n).unwrap() > tfidf_weight(tf, df, n).unwrap());
            prop_assert!(tfidf_weight(tf, df + 1, n).unwrap() < tfidf_weight(tf, df, n).unwrap());
        }

        #[test]
        fn retained_features_respect_bounds(
            table in proptest::collection::vec(proptest::collection::vec(0u64..3, 12), 6),
            lower in 0usize..3,
            upper in 3usize..7,
        ) {
            let c: BTreeMap<String, HashMap<String, u64>> = table
                .iter()
                .enumerate()
                .map(|(d, row)| (format!("d{d}"), row.iter().enumerate().map(|(f, &n)| (format!("f{f:02}"), n)).collect()))
                .collect();
            let bounds = DfBounds { lower, upper };
            if let Ok(m) = build_tfidf(&c, bounds, None) {
                for (j, f) in m.features.iter().enumerate() {
                    let fi: usize = f[1..].parse().unwrap();
                    let df = table.iter().filter(|row| row[fi] > 0).count();
                    prop_assert_eq!(df, m.df[j]);
                    prop_assert!(bounds.contains(df));
                }
                for (_, _, v) in m.weights.iter() {
                    prop_assert!(v >= 0.0);
                }
            }
        }
    }
}
