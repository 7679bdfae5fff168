use std::collections::BTreeMap;

use crate::analysis::cluster::ClusterAssignment;
use crate::error::{Error, Result};

fn contingency(a: &[usize], b: &[usize]) -> (Vec<Vec<u64>>, Vec<u64>, Vec<u64>) {
    let index = |labels: &[usize]| -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &l in labels {
            let next = m.len();
            m.entry(l).or_insert(next);
        }
        m
    };
    let (ia, ib) = (index(a), index(b));
    let mut table = vec![vec![0u64; ib.len()]; ia.len()];
    for (x, y) in a.iter().zip(b) {
        table[ia[x]][ib[y]] += 1;
    }
    let rows = table.iter().map(|r| r.iter().sum()).collect();
    let cols = (0..ib.len()).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    (table, rows, cols)
}

fn entropy(sizes: &[u64], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// ln(k!) for k in 0..=n.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0f64; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Expected mutual information under the hypergeometric model of random
/// clusterings with fixed marginals.
pub fn expected_mutual_information(rows: &[u64], cols: &[u64], n: u64) -> f64 {
    let lf = log_factorials(n as usize);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in rows {
        for &b in cols {
            let lo = 1.max((a + b).saturating_sub(n));
            let hi = a.min(b);
            for nij in lo..=hi {
                let x = nij as f64;
                let term = (x / nf) * ((nf * x) / (a as f64 * b as f64)).ln();
                let log_p = lf[a as usize] + lf[b as usize] + lf[(n - a) as usize] + lf[(n - b) as usize]
                    - lf[n as usize]
                    - lf[nij as usize]
                    - lf[(a - nij) as usize]
                    - lf[(b - nij) as usize]
                    - lf[(n + nij - a - b) as usize];
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information over raw label slices, using the arithmetic
/// mean of the two entropies as normalizer.
pub fn ami_from_labels(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("label vectors differ in length".into()));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let (table, rows, cols) = contingency(a, b);
    let n = a.len() as u64;
    let nf = n as f64;
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let x = nij as f64;
                mi += (x / nf) * ((nf * x) / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    let emi = expected_mutual_information(&rows, &cols, n);
    let mean_h = 0.5 * (entropy(&rows, nf) + entropy(&cols, nf));
    let denom = mean_h - emi;
    if denom.abs() < 1e-12 {
        return Ok(if same_partition(&table) { 1.0 } else { 0.0 });
    }
    Ok((mi - emi) / denom)
}

// Identical up to relabeling iff every row and column has one nonzero cell.
fn same_partition(table: &[Vec<u64>]) -> bool {
    let rows_ok = table.iter().all(|r| r.iter().filter(|&&x| x > 0).count() == 1);
    let cols = table.first().map_or(0, Vec::len);
    let cols_ok = (0..cols).all(|j| table.iter().filter(|r| r[j] > 0).count() == 1);
    rows_ok && cols_ok
}

pub fn adjusted_mutual_information(a: &ClusterAssignment, b: &ClusterAssignment) -> Result<f64> {
    if a.communities != b.communities {
        return Err(Error::InvalidArgument("clusterings cover different communities".into()));
    }
    ami_from_labels(&a.labels, &b.labels)
}
