use serde::{Deserialize, Serialize};

use crate::community_vectors::{CommunityVector, RepresentationKind};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Pairwise cosine similarities between communities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub communities: Vec<String>,
    pub kind: RepresentationKind,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    /// Upper-triangle entries `(i, j, value)` with `i < j`, row by row.
    pub fn upper_triangle(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.values[i][j]))
            .collect()
    }
}

pub fn cosine_similarity_matrix(vectors: &[CommunityVector]) -> Result<SimilarityMatrix> {
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidArgument("no vectors".into()));
    };
    for v in vectors {
        if v.kind != first.kind || v.values.len() != first.values.len() {
            return Err(Error::InvalidArgument(format!(
                "vector for `{}` differs in kind or length",
                v.community
            )));
        }
    }
    let norms: Vec<f64> = vectors.iter().map(|v| norm(&v.values)).collect();
    if let Some(i) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::ZeroVector(vectors[i].community.clone()));
    }
    let n = vectors.len();
    let mut values = vec![vec![0f64; n]; n];
    for i in 0..n {
        values[i][i] = 1.0;
        for j in i + 1..n {
            let c = (dot(&vectors[i].values, &vectors[j].values) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[i][j] = c;
            values[j][i] = c;
        }
    }
    Ok(SimilarityMatrix {
        communities: vectors.iter().map(|v| v.community.clone()).collect(),
        kind: first.kind,
        values,
    })
}
