use serde::{Deserialize, Serialize};

use crate::analysis::similarity::SimilarityMatrix;
use crate::analysis::stats::average_ranks;
use crate::error::{Error, Result};

/// A pair that is very similar under one representation and very
/// dissimilar under the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub first: String,
    pub second: String,
    pub sim_a: f64,
    pub sim_b: f64,
    /// True when the pair is close under A and far under B.
    pub high_in_a: bool,
}

fn check_aligned(a: &SimilarityMatrix, b: &SimilarityMatrix) -> Result<()> {
    if a.communities != b.communities {
        return Err(Error::InvalidArgument(
            "similarity matrices cover different communities".into(),
        ));
    }
    Ok(())
}

/// Pairs with one similarity below `low` and the other above `high`,
/// largest gap first.
pub fn misalignment_outliers(
    sim_a: &SimilarityMatrix,
    sim_b: &SimilarityMatrix,
    low: f64,
    high: f64,
) -> Result<Vec<Outlier>> {
    check_aligned(sim_a, sim_b)?;
    let mut out: Vec<Outlier> = sim_a
        .upper_triangle()
        .into_iter()
        .filter_map(|(i, j, a)| {
            let b = sim_b.values[i][j];
            let high_in_a = a > high && b < low;
            (high_in_a || (b > high && a < low)).then(|| Outlier {
                first: sim_a.communities[i].clone(),
                second: sim_a.communities[j].clone(),
                sim_a: a,
                sim_b: b,
                high_in_a,
            })
        })
        .collect();
    out.sort_by(|x, y| {
        (y.sim_a - y.sim_b)
            .abs()
            .total_cmp(&(x.sim_a - x.sim_b).abs())
            .then_with(|| (&x.first, &x.second).cmp(&(&y.first, &y.second)))
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentMatrix {
    pub communities: Vec<String>,
    /// Row-major; the diagonal is zero.
    pub z2: Vec<Vec<f64>>,
    /// Rows or columns whose variance was zero and were set to zero.
    pub degenerate: usize,
}

impl MisalignmentMatrix {
    /// Entries `(row, col, z2)` off the diagonal, largest first.
    pub fn ranked(&self) -> Vec<(usize, usize, f64)> {
        let n = self.communities.len();
        let mut all: Vec<(usize, usize, f64)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.z2[i][j]))
            .collect();
        all.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        all
    }
}

// Ascending average ranks within each row, diagonal excluded (left at 0).
fn row_ranks(sim: &SimilarityMatrix) -> Vec<Vec<f64>> {
    let n = sim.len();
    (0..n)
        .map(|i| {
            let others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| sim.values[i][j]).collect();
            let ranks = average_ranks(&others);
            let mut row = vec![0f64; n];
            for (r, j) in ranks.into_iter().zip((0..n).filter(|&j| j != i)) {
                row[j] = r;
            }
            row
        })
        .collect()
}

/// `R_A - R_B` of the per-row similarity ranks.
pub fn rank_difference(sim_a: &SimilarityMatrix, sim_b: &SimilarityMatrix) -> Result<Vec<Vec<f64>>> {
    check_aligned(sim_a, sim_b)?;
    let (ra, rb) = (row_ranks(sim_a), row_ranks(sim_b));
    Ok(ra
        .iter()
        .zip(&rb)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
        .collect())
}

// z-scores the off-diagonal cells of each line; returns false when the line
// has zero variance (cells are zeroed).
fn zscore_line(values: &mut [f64], skip: usize) -> bool {
    let idx: Vec<usize> = (0..values.len()).filter(|&k| k != skip).collect();
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&k| values[k]).sum::<f64>() / n;
    let var = idx.iter().map(|&k| (values[k] - mean).powi(2)).sum::<f64>() / n;
    if var == 0.0 {
        for &k in &idx {
            values[k] = 0.0;
        }
        return false;
    }
    let sd = var.sqrt();
    for &k in &idx {
        values[k] = (values[k] - mean) / sd;
    }
    true
}

/// Rank-difference misalignment: z-score the columns of `R_A - R_B`, then
/// the rows of the result. High positive entries are pairs more similar
/// under A than B would predict.
pub fn z2_misalignment(sim_a: &SimilarityMatrix, sim_b: &SimilarityMatrix) -> Result<MisalignmentMatrix> {
    let n = sim_a.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("z2 misalignment needs at least 3 communities, got {n}")));
    }
    let mut d = rank_difference(sim_a, sim_b)?;
    let mut degenerate = 0;
    for j in 0..n {
        let mut col: Vec<f64> = d.iter().map(|r| r[j]).collect();
        if !zscore_line(&mut col, j) {
            degenerate += 1;
        }
        for (row, v) in d.iter_mut().zip(col) {
            row[j] = v;
        }
    }
    for (i, row) in d.iter_mut().enumerate() {
        if !zscore_line(row, i) {
            degenerate += 1;
        }
    }
    if degenerate > 0 {
        log::debug!("z2 misalignment: {degenerate} zero-variance rows/columns set to 0");
    }
    Ok(MisalignmentMatrix {
        communities: sim_a.communities.clone(),
        z2: d,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community_vectors::RepresentationKind;

    fn sim(values: Vec<Vec<f64>>) -> SimilarityMatrix {
        SimilarityMatrix {
            communities: (0..values.len()).map(|i| format!("c{i}")).collect(),
            kind: RepresentationKind::Text,
            values,
        }
    }

    fn sym(n: usize, upper: &[(usize, usize, f64)]) -> SimilarityMatrix {
        let mut v = vec![vec![0.0; n]; n];
        for i in 0..n {
            v[i][i] = 1.0;
        }
        for &(i, j, x) in upper {
            v[i][j] = x;
            v[j][i] = x;
        }
        sim(v)
    }

    #[test]
    fn outlier_flags() {
        let a = sym(3, &[(0, 1, 0.9), (0, 2, 0.5), (1, 2, 0.1)]);
        let b = sym(3, &[(0, 1, 0.1), (0, 2, 0.5), (1, 2, 0.95)]);
        let out = misalignment_outliers(&a, &b, 0.2, 0.8).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!((out[0].first.as_str(), out[0].second.as_str()), ("c1", "c2"));
        assert!(!out[0].high_in_a);
        assert!(out[1].high_in_a);
        let swapped = misalignment_outliers(&b, &a, 0.2, 0.8).unwrap();
        assert_eq!(swapped.len(), 2);
        for (x, y) in out.iter().zip(&swapped) {
            assert_eq!((&x.first, &x.second), (&y.first, &y.second));
            assert_eq!(x.high_in_a, !y.high_in_a);
        }
    }

    #[test]
    fn identical_inputs_give_zeros() {
        let a = sym(4, &[(0, 1, 0.5), (0, 2, 0.4), (0, 3, 0.3), (1, 2, 0.6), (1, 3, 0.2), (2, 3, 0.7)]);
        let z = z2_misalignment(&a, &a).unwrap();
        assert!(z.z2.iter().flatten().all(|&v| v == 0.0));
        assert!(z.degenerate > 0);
    }

    #[test]
    fn swap_negates_rank_difference() {
        let a = sym(4, &[(0, 1, 0.5), (0, 2, 0.4), (0, 3, 0.3), (1, 2, 0.6), (1, 3, 0.2), (2, 3, 0.7)]);
        let b = sym(4, &[(0, 1, 0.1), (0, 2, 0.9), (0, 3, 0.3), (1, 2, 0.2), (1, 3, 0.6), (2, 3, 0.4)]);
        let d = rank_difference(&a, &b).unwrap();
        let e = rank_difference(&b, &a).unwrap();
        for (x, y) in d.iter().flatten().zip(e.iter().flatten()) {
            assert_eq!(*x, -*y);
        }
        let z = z2_misalignment(&a, &b).unwrap();
        for row in &z.z2 {
            assert!((row.iter().sum::<f64>() / 4.0).abs() < 1e-9);
        }
        assert!(z.z2.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn needs_three_communities() {
        let a = sym(2, &[(0, 1, 0.5)]);
        assert!(z2_misalignment(&a, &a).is_err());
    }
}
