//! Ordinary least squares with Student-t confidence intervals, used as the
//! inference stage after screening.

use ndarray::{Array1, Array2};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::linalg;

const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Slope coefficients over the supplied columns (intercept reported separately).
    pub coefficients: Array1<f64>,
    pub intercept: f64,
    pub standard_errors: Array1<f64>,
    pub ci_level: f64,
    pub ci_lower: Array1<f64>,
    pub ci_upper: Array1<f64>,
    pub residual_variance: f64,
}

/// Classical least squares with an intercept. Standard errors come from the
/// residual variance times the diagonal of the inverse Gram matrix; intervals
/// are symmetric Student-t at `ci_level`.
pub fn ols_fit(x_sub: &Array2<f64>, y: &Array1<f64>, ci_level: f64) -> Result<OlsFit> {
    let n = x_sub.nrows();
    let k = x_sub.ncols();
    if !(0.0..1.0).contains(&ci_level) || ci_level == 0.0 {
        return Err(Error::config(format!("ci_level must be in (0,1), got {ci_level}")));
    }
    if n <= k + 1 {
        return Err(Error::input(format!(
            "ols needs more rows ({n}) than columns plus intercept ({})",
            k + 1
        )));
    }
    let mut design = Array2::<f64>::ones((n, k + 1));
    design.slice_mut(ndarray::s![.., 1..]).assign(x_sub);
    let ls = match linalg::least_squares(&design.view(), &y.view(), PIVOT_TOL) {
        Ok(ls) => ls,
        Err(Error::RankDeficient { columns, tol }) => {
            // report in the caller's column index space; pivot 0 is the intercept
            let named: Vec<usize> = columns.iter().map(|c| c.saturating_sub(1)).collect();
            return Err(Error::RankDeficient { columns: named, tol });
        }
        Err(e) => return Err(e),
    };
    let dof = n - k - 1;
    let residual_variance = ls.residual_sum_of_squares / dof as f64;
    let tq = if residual_variance > 0.0 {
        let t = StudentsT::new(0.0, 1.0, dof as f64)
            .map_err(|e| Error::input(format!("t distribution: {e}")))?;
        t.inverse_cdf(0.5 + ci_level / 2.0)
    } else {
        0.0
    };
    let intercept = ls.coefficients[0];
    let coefficients = Array1::from_iter(ls.coefficients.iter().skip(1).copied());
    let standard_errors = Array1::from_iter(
        ls.gram_inverse_diag
            .iter()
            .skip(1)
            .map(|d| (residual_variance * d).sqrt()),
    );
    let ci_lower = Array1::from_iter(
        coefficients
            .iter()
            .zip(standard_errors.iter())
            .map(|(c, s)| c - tq * s),
    );
    let ci_upper = Array1::from_iter(
        coefficients
            .iter()
            .zip(standard_errors.iter())
            .map(|(c, s)| c + tq * s),
    );
    Ok(OlsFit {
        coefficients,
        intercept,
        standard_errors,
        ci_level,
        ci_lower,
        ci_upper,
        residual_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{self, BetaSpec, CovarianceSpec};
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn exact_line() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let y = array![2.0, 4.0, 6.0, 8.0];
        let fit = ols_fit(&x, &y, 0.95).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-10);
        assert!(fit.intercept.abs() < 1e-10);
        assert!(fit.residual_variance < 1e-20);
        assert_eq!(fit.ci_lower[0], fit.ci_upper[0]);
    }

    #[test]
    fn interpolation_has_zero_residual_variance() {
        let cov = datagen::build_covariance(&CovarianceSpec::identity(), 3).unwrap();
        let x = datagen::sample_covariates(&cov, 30, 5);
        let beta = array![1.5, -0.7, 0.2];
        let y = x.dot(&beta) + 0.4;
        let fit = ols_fit(&x, &y, 0.95).unwrap();
        assert!(fit.residual_variance < 1e-18);
        for j in 0..3 {
            assert!((fit.coefficients[j] - beta[j]).abs() < 1e-8);
        }
        assert!((fit.intercept - 0.4).abs() < 1e-8);
    }

    /// Independent oracle: solve the normal equations (X'X)b = X'y by
    /// Gauss-Jordan elimination, with no shared code with the QR path.
    fn normal_equations_oracle(x: &Array2<f64>, y: &Array1<f64>) -> Vec<f64> {
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
            let pivot = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
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

    #[test]
    fn matches_normal_equations_oracle() {
        let mut rng = crate::rng::stream_rng(2024, &[0xabc]);
        for _ in 0..30 {
            let cov = datagen::build_covariance(&CovarianceSpec::toeplitz_block(0.4, 5), 5).unwrap();
            let seed: u64 = rng.gen();
            let x = datagen::sample_covariates(&cov, 50, seed);
            let beta = datagen::generate_betas(&BetaSpec::fixed_pool(vec![1.0, -0.5], 3), 5, 50, seed)
                .unwrap();
            let y = datagen::generate_outcome(&x, &beta, 0.5, seed).unwrap();
            let fit = ols_fit(&x, &y, 0.95).unwrap();
            let oracle = normal_equations_oracle(&x, &y);
            let scale = oracle.iter().map(|v| v.abs()).fold(1.0f64, f64::max);
            assert!((fit.intercept - oracle[0]).abs() / scale < 1e-8);
            for j in 0..5 {
                assert!(
                    (fit.coefficients[j] - oracle[j + 1]).abs() / scale < 1e-8,
                    "coef {j}"
                );
            }
        }
    }

    #[test]
    fn cis_bracket_coefficients() {
        let cov = datagen::build_covariance(&CovarianceSpec::identity(), 4).unwrap();
        let x = datagen::sample_covariates(&cov, 60, 1);
        let beta = array![1.0, 0.0, -1.0, 0.5];
        let y = datagen::generate_outcome(&x, &beta, 1.0, 1).unwrap();
        let fit = ols_fit(&x, &y, 0.95).unwrap();
        for j in 0..4 {
            assert!(fit.ci_lower[j] <= fit.coefficients[j]);
            assert!(fit.coefficients[j] <= fit.ci_upper[j]);
            assert!(fit.standard_errors[j] >= 0.0);
        }
    }

    #[test]
    fn too_few_rows_rejected() {
        let x = Array2::<f64>::ones((3, 2));
        let y = Array1::<f64>::zeros(3);
        assert!(matches!(ols_fit(&x, &y, 0.95), Err(Error::Input(_))));
    }
}
