//! Independent oracles and small statistics helpers for the acceptance
//! suite. Nothing here shares code with the library paths it checks.

#![allow(dead_code)]

use ndarray::{Array1, Array2};

/// Brute-force threshold search over every candidate magnitude, O(p^2).
/// Returns (tau, fdp_at_tau, selected) under the same convention as the
/// library: strict counts, selection by m_j >= tau, absent when empty.
pub fn naive_fdp_threshold(m: &[f64], q: f64) -> (Option<f64>, f64, Vec<usize>) {
    let mut candidates: Vec<f64> = m.iter().filter(|v| **v != 0.0).map(|v| v.abs()).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for t in candidates {
        let num = m.iter().filter(|v| **v < -t).count();
        let den = m.iter().filter(|v| **v > t).count().max(1);
        let fdp = num as f64 / den as f64;
        if fdp <= q {
            let selected: Vec<usize> = m
                .iter()
                .enumerate()
                .filter(|(_, v)| **v >= t)
                .map(|(j, _)| j)
                .collect();
            if selected.is_empty() {
                return (None, 0.0, Vec::new());
            }
            return (Some(t), fdp, selected);
        }
    }
    (None, 0.0, Vec::new())
}

/// Normal-equations OLS by Gauss-Jordan elimination with partial pivoting.
/// Returns [intercept, slopes...]; no shared code with the QR solver.
pub fn normal_equations_ols(x: &Array2<f64>, y: &Array1<f64>) -> Vec<f64> {
    let n = x.nrows();
    let k = x.ncols() + 1;
    let mut design = vec![vec![1.0f64; k]; n];
    for i in 0..n {
        for j in 0..k - 1 {
            design[i][j + 1] = x[(i, j)];
        }
    }
    let mut a = vec![vec![0.0f64; k + 1]; k];
    for r in 0..k {
        for c in 0..k {
            a[r][c] = (0..n).map(|i| design[i][r] * design[i][c]).sum();
        }
        a[r][k] = (0..n).map(|i| design[i][r] * y[i]).sum();
    }
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let pv = a[col][col];
        for c in col..=k {
            a[col][c] /= pv;
        }
        for r in 0..k {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..k).map(|r| a[r][k]).collect()
}

/// Largest absolute standardized inner product max_j |<x_j, y - ybar>| / n,
/// computed directly; the smallest penalty that zeroes every coefficient.
pub fn lambda_max_oracle(x: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let n = x.nrows() as f64;
    let y_mean = y.sum() / n;
    let mut best = 0.0f64;
    for j in 0..x.ncols() {
        let col = x.column(j);
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if var <= 0.0 {
            continue;
        }
        let sd = var.sqrt();
        let dot: f64 = col
            .iter()
            .zip(y.iter())
            .map(|(xv, yv)| (xv - mean) / sd * (yv - y_mean))
            .sum();
        best = best.max((dot / n).abs());
    }
    best
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Monte Carlo standard error of the sample mean.
pub fn mcse(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let var = xs.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Average ranks, ties shared.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            r[idx] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ra, rb) = (ranks(a), ranks(b));
    let (ma, mb) = (mean(&ra), mean(&rb));
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..a.len() {
        let (x, y) = (ra[i] - ma, rb[i] - mb);
        num += x * y;
        da += x * x;
        db += y * y;
    }
    num / (da.sqrt() * db.sqrt())
}
