use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::community_vectors::CommunityVector;
use crate::error::{Error, Result};
use crate::linalg::cosine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Self::Single),
            "complete" => Ok(Self::Complete),
            "average" => Ok(Self::Average),
            other => Err(Error::InvalidArgument(format!("unknown linkage `{other}`"))),
        }
    }
}

/// Flat clustering; `communities` is sorted and labels are numbered by each
/// cluster's first member in that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub communities: Vec<String>,
    pub labels: Vec<usize>,
    pub k: usize,
}

impl ClusterAssignment {
    /// Relabels arbitrary ids into `0..k` by first appearance.
    pub fn from_labels(communities: Vec<String>, raw: &[usize]) -> Self {
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &r in raw {
            let next = map.len();
            labels.push(*map.entry(r).or_insert(next));
        }
        Self {
            communities,
            k: map.len(),
            labels,
        }
    }

    pub fn label_of(&self, community: &str) -> Option<usize> {
        self.communities.iter().position(|c| c == community).map(|i| self.labels[i])
    }

    pub fn members(&self, label: usize) -> Vec<&str> {
        self.communities
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == label)
            .map(|(c, _)| c.as_str())
            .collect()
    }
}

/// Bottom-up merging on cosine distance until `k` clusters remain. Ties go to
/// the pair whose clusters come first in lexicographic community order.
pub fn agglomerative_cluster(vectors: &[CommunityVector], k: usize, linkage: Linkage) -> Result<ClusterAssignment> {
    let n = vectors.len();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!("cluster count {k} must be in 1..={n}")));
    }
    let mut sorted: Vec<&CommunityVector> = vectors.iter().collect();
    sorted.sort_by(|a, b| a.community.cmp(&b.community));
    if let Some(z) = sorted.iter().find(|v| v.values.iter().all(|x| *x == 0.0)) {
        return Err(Error::ZeroVector(z.community.clone()));
    }
    let mut dist = vec![vec![0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = cosine(&sorted[i].values, &sorted[j].values).expect("non-zero vectors");
            dist[i][j] = 1.0 - c;
            dist[j][i] = 1.0 - c;
        }
    }
    // a cluster is identified by its first member; owner[i] = cluster of i
    let mut active: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut owner: Vec<usize> = (0..n).collect();
    while active.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                if dist[a][b] < best.0 {
                    best = (dist[a][b], a, b);
                }
            }
        }
        let (_, a, b) = best;
        for &c in &active {
            if c == a || c == b {
                continue;
            }
            let merged = match linkage {
                Linkage::Single => dist[a][c].min(dist[b][c]),
                Linkage::Complete => dist[a][c].max(dist[b][c]),
                Linkage::Average => {
                    (size[a] as f64 * dist[a][c] + size[b] as f64 * dist[b][c]) / (size[a] + size[b]) as f64
                }
            };
            dist[a][c] = merged;
            dist[c][a] = merged;
        }
        size[a] += size[b];
        for o in owner.iter_mut() {
            if *o == b {
                *o = a;
            }
        }
        active.retain(|&c| c != b);
    }
    Ok(ClusterAssignment::from_labels(
        sorted.iter().map(|v| v.community.clone()).collect(),
        &owner,
    ))
}
