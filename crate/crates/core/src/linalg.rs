//! Small dense linear algebra kernels: Cholesky factorization and
//! Householder QR least squares. Sized for the blocks and post-screening
//! designs this crate works with (up to a few hundred columns).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
///
/// Fails with the index and value of the first non-positive pivot.
pub fn cholesky_lower(a: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dimension(format!(
            "cholesky expects a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Cholesky factor of a symmetric tridiagonal matrix with unit diagonal and
/// constant off-diagonal `rho`. The factor is lower bidiagonal; returns
/// (diagonal, sub-diagonal) entries.
pub fn cholesky_tridiagonal(p: usize, rho: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut diag = vec![0.0; p];
    let mut sub = vec![0.0; p.saturating_sub(1)];
    let mut prev_d = 0.0f64;
    for j in 0..p {
        let mut d = 1.0;
        if j > 0 {
            let e = rho / prev_d;
            sub[j - 1] = e;
            d -= e * e;
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, value: d });
        }
        prev_d = d.sqrt();
        diag[j] = prev_d;
    }
    Ok((diag, sub))
}

/// Least-squares solution of `min ||a x - y||` via Householder QR, with the
/// diagonal of `(a' a)^{-1}` for standard errors.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Array1<f64>,
    pub gram_inverse_diag: Array1<f64>,
    pub residual_sum_of_squares: f64,
}

/// Solves the least-squares problem. Rank deficiency is detected from the
/// R diagonal at `pivot_tol` relative to the largest diagonal magnitude and
/// reported with the offending column indices.
pub fn least_squares(a: &ArrayView2<f64>, y: &ArrayView1<f64>, pivot_tol: f64) -> Result<LeastSquares> {
    let m = a.nrows();
    let k = a.ncols();
    if y.len() != m {
        return Err(Error::dimension(format!(
            "least_squares: {} rows vs outcome length {}",
            m,
            y.len()
        )));
    }
    if m < k {
        return Err(Error::input(format!(
            "least_squares needs at least as many rows ({m}) as columns ({k})"
        )));
    }
    let mut r = a.to_owned();
    let mut qty = y.to_owned();

    // Householder triangularization, reflections applied on the fly.
    for j in 0..k {
        let mut norm = 0.0;
        for i in j..m {
            norm += r[(i, j)] * r[(i, j)];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(j, j)] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m - j];
        v[0] = r[(j, j)] - alpha;
        for i in (j + 1)..m {
            v[i - j] = r[(i, j)];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        r[(j, j)] = alpha;
        for i in (j + 1)..m {
            r[(i, j)] = 0.0;
        }
        for c in (j + 1)..k {
            let mut dot = 0.0;
            for i in j..m {
                dot += v[i - j] * r[(i, c)];
            }
            let scale = 2.0 * dot / vtv;
            for i in j..m {
                r[(i, c)] -= scale * v[i - j];
            }
        }
        let mut dot = 0.0;
        for i in j..m {
            dot += v[i - j] * qty[i];
        }
        let scale = 2.0 * dot / vtv;
        for i in j..m {
            qty[i] -= scale * v[i - j];
        }
    }

    let max_diag = (0..k).map(|j| r[(j, j)].abs()).fold(0.0f64, f64::max);
    let threshold = pivot_tol * max_diag.max(1.0);
    let deficient: Vec<usize> = (0..k).filter(|&j| r[(j, j)].abs() < threshold).collect();
    if !deficient.is_empty() {
        return Err(Error::RankDeficient {
            columns: deficient,
            tol: pivot_tol,
        });
    }

    // Back-substitution for the coefficients.
    let mut coef = Array1::<f64>::zeros(k);
    for j in (0..k).rev() {
        let mut s = qty[j];
        for c in (j + 1)..k {
            s -= r[(j, c)] * coef[c];
        }
        coef[j] = s / r[(j, j)];
    }

    // (a'a)^{-1} = R^{-1} R^{-T}; its diagonal is the squared row norms of R^{-1}.
    let mut rinv = Array2::<f64>::zeros((k, k));
    for j in (0..k).rev() {
        rinv[(j, j)] = 1.0 / r[(j, j)];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for c in (i + 1)..=j {
                s += r[(i, c)] * rinv[(c, j)];
            }
            rinv[(i, j)] = -s / r[(i, i)];
        }
    }
    let gram_inverse_diag = Array1::from_iter((0..k).map(|i| {
        (i..k).map(|j| rinv[(i, j)] * rinv[(i, j)]).sum::<f64>()
    }));

    let rss: f64 = qty.iter().skip(k).map(|x| x * x).sum();
    Ok(LeastSquares {
        coefficients: coef,
        gram_inverse_diag,
        residual_sum_of_squares: rss.max(0.0),
    })
}
