//! Synthetic regression problems: structured covariance construction,
//! multivariate Normal covariate sampling, sparse coefficient generation and
//! Gaussian outcome synthesis.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{self, stream};

pub const DEFAULT_BLOCK_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceFamily {
    ToeplitzBlock,
    IllConditionedTridiagonal,
    Identity,
}

/// Correlation structure of the covariates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSpec {
    pub family: CovarianceFamily,
    #[serde(default)]
    pub rho: f64,
    /// Block dimension for the Toeplitz family. When `p` is not divisible by
    /// it, the final block takes the remainder size with the same formula.
    #[serde(default = "default_block_size")]
    pub block_size: usize,
}

fn default_block_size() -> usize {
    DEFAULT_BLOCK_SIZE
}

impl CovarianceSpec {
    pub fn identity() -> Self {
        CovarianceSpec {
            family: CovarianceFamily::Identity,
            rho: 0.0,
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }

    pub fn toeplitz_block(rho: f64, block_size: usize) -> Self {
        CovarianceSpec {
            family: CovarianceFamily::ToeplitzBlock,
            rho,
            block_size,
        }
    }

    pub fn tridiagonal(rho: f64) -> Self {
        CovarianceSpec {
            family: CovarianceFamily::IllConditionedTridiagonal,
            rho,
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }
}

#[derive(Debug)]
enum Structure {
    Identity,
    /// Dense diagonal blocks with their lower Cholesky factors.
    Blocks {
        blocks: Vec<Array2<f64>>,
        factors: Vec<Array2<f64>>,
    },
    /// Unit diagonal, constant first off-diagonal; factor is lower bidiagonal.
    Tridiagonal {
        rho: f64,
        factor_diag: Vec<f64>,
        factor_sub: Vec<f64>,
    },
}

/// A validated p x p covariance matrix, kept in structured form so sampling
/// stays cheap at large p.
#[derive(Debug)]
pub struct Covariance {
    p: usize,
    structure: Structure,
}

/// Within a Toeplitz block of size `bs`, correlation at offset `k` decays
/// linearly from `(bs-2) rho / (bs-1)` down to zero at the block edge.
fn toeplitz_entry(bs: usize, k: usize, rho: f64) -> f64 {
    if k == 0 {
        1.0
    } else if bs <= 1 {
        0.0
    } else {
        (bs - 1 - k) as f64 * rho / (bs - 1) as f64
    }
}

/// Builds the covariance for `p` covariates and verifies positive
/// definiteness by factorizing it.
pub fn build_covariance(spec: &CovarianceSpec, p: usize) -> Result<Covariance> {
    if p == 0 {
        return Err(Error::config("covariance dimension p must be >= 1"));
    }
    let structure = match spec.family {
        CovarianceFamily::Identity => Structure::Identity,
        CovarianceFamily::ToeplitzBlock => {
            if !(0.0..1.0).contains(&spec.rho) {
                return Err(Error::config(format!(
                    "toeplitz_block rho must be in [0, 1), got {}",
                    spec.rho
                )));
            }
            if spec.block_size == 0 {
                return Err(Error::config("block_size must be >= 1"));
            }
            let mut blocks = Vec::new();
            let mut offset = 0;
            while offset < p {
                let bs = spec.block_size.min(p - offset);
                let mut b = Array2::<f64>::zeros((bs, bs));
                for i in 0..bs {
                    for j in 0..bs {
                        b[(i, j)] = toeplitz_entry(bs, i.abs_diff(j), spec.rho);
                    }
                }
                blocks.push(b);
                offset += bs;
            }
            let factors = blocks
                .iter()
                .map(|b| linalg::cholesky_lower(&b.view()))
                .collect::<Result<Vec<_>>>()?;
            Structure::Blocks { blocks, factors }
        }
        CovarianceFamily::IllConditionedTridiagonal => {
            let (factor_diag, factor_sub) = linalg::cholesky_tridiagonal(p, spec.rho)?;
            Structure::Tridiagonal {
                rho: spec.rho,
                factor_diag,
                factor_sub,
            }
        }
    };
    Ok(Covariance { p, structure })
}

impl Covariance {
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.p && j < self.p);
        match &self.structure {
            Structure::Identity => {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            }
            Structure::Blocks { blocks, .. } => {
                let mut offset = 0;
                for b in blocks {
                    let bs = b.nrows();
                    if i < offset + bs {
                        return if j >= offset && j < offset + bs {
                            b[(i - offset, j - offset)]
                        } else {
                            0.0
                        };
                    }
                    offset += bs;
                }
                unreachable!()
            }
            Structure::Tridiagonal { rho, .. } => {
                if i == j {
                    1.0
                } else if i.abs_diff(j) == 1 {
                    *rho
                } else {
                    0.0
                }
            }
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::<f64>::zeros((self.p, self.p));
        for i in 0..self.p {
            for j in 0..self.p {
                a[(i, j)] = self.entry(i, j);
            }
        }
        a
    }
}

/// Draws `n` i.i.d. rows from `N_p(0, cov)` via the lower-triangular factor
/// applied to standard Normal vectors. Deterministic given the seed.
pub fn sample_covariates(cov: &Covariance, n: usize, seed: u64) -> Array2<f64> {
    let p = cov.p;
    let mut rng = rng::stream_rng(seed, &[stream::COVARIATES]);
    let mut x = Array2::<f64>::zeros((n, p));
    let mut z = vec![0.0f64; p];
    for i in 0..n {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        match &cov.structure {
            Structure::Identity => {
                for j in 0..p {
                    x[(i, j)] = z[j];
                }
            }
            Structure::Blocks { factors, .. } => {
                let mut offset = 0;
                for l in factors {
                    let bs = l.nrows();
                    for r in 0..bs {
                        let mut s = 0.0;
                        for c in 0..=r {
                            s += l[(r, c)] * z[offset + c];
                        }
                        x[(i, offset + r)] = s;
                    }
                    offset += bs;
                }
            }
            Structure::Tridiagonal {
                factor_diag,
                factor_sub,
                ..
            } => {
                x[(i, 0)] = factor_diag[0] * z[0];
                for j in 1..p {
                    x[(i, j)] = factor_sub[j - 1] * z[j - 1] + factor_diag[j] * z[j];
                }
            }
        }
    }
    x
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaScheme {
    /// Active coefficients drawn from Normal(0, (delta * sqrt(log p / n))^2).
    NormalScaled { delta: f64 },
    /// Active coefficients drawn uniformly from a fixed pool of values.
    FixedPool { pool: Vec<f64> },
}

/// Sparse coefficient generator: exactly `p1` active positions, drawn
/// uniformly without replacement.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaSpec {
    #[serde(flatten)]
    pub scheme: BetaScheme,
    pub p1: usize,
}

impl BetaSpec {
    pub fn normal_scaled(delta: f64, p1: usize) -> Self {
        BetaSpec {
            scheme: BetaScheme::NormalScaled { delta },
            p1,
        }
    }

    pub fn fixed_pool(pool: Vec<f64>, p1: usize) -> Self {
        BetaSpec {
            scheme: BetaScheme::FixedPool { pool },
            p1,
        }
    }

    /// The pool used throughout the fixed-coefficient scenarios.
    pub fn standard_pool() -> Vec<f64> {
        vec![-1.0, -0.8, -0.5, 0.5, 0.8, 1.0]
    }
}

/// Generates the coefficient vector. Deterministic given the seed.
pub fn generate_betas(spec: &BetaSpec, p: usize, n: usize, seed: u64) -> Result<Array1<f64>> {
    if spec.p1 > p {
        return Err(Error::config(format!(
            "p1 = {} exceeds number of covariates p = {}",
            spec.p1, p
        )));
    }
    if n == 0 {
        return Err(Error::config("n must be positive"));
    }
    match &spec.scheme {
        BetaScheme::FixedPool { pool } if pool.is_empty() => {
            return Err(Error::config("fixed pool of coefficient values is empty"));
        }
        BetaScheme::FixedPool { pool } if pool.iter().any(|v| *v == 0.0) => {
            return Err(Error::config("fixed pool must contain nonzero values only"));
        }
        BetaScheme::NormalScaled { delta } if *delta <= 0.0 => {
            return Err(Error::config("delta must be positive"));
        }
        _ => {}
    }
    let mut rng = rng::stream_rng(seed, &[stream::BETAS]);
    let positions = rand::seq::index::sample(&mut rng, p, spec.p1);
    let mut beta = Array1::<f64>::zeros(p);
    for pos in positions.iter() {
        let value = match &spec.scheme {
            BetaScheme::NormalScaled { delta } => {
                let sd = delta * ((p as f64).ln() / n as f64).sqrt();
                let z: f64 = rng.sample(StandardNormal);
                sd * z
            }
            BetaScheme::FixedPool { pool } => pool[rng.gen_range(0..pool.len())],
        };
        beta[pos] = value;
    }
    Ok(beta)
}

/// y = X beta + eps with eps i.i.d. Normal(0, sigma2). Deterministic given seed.
pub fn generate_outcome(
    x: &Array2<f64>,
    beta: &Array1<f64>,
    sigma2: f64,
    seed: u64,
) -> Result<Array1<f64>> {
    if sigma2 <= 0.0 {
        return Err(Error::config(format!("sigma2 must be positive, got {sigma2}")));
    }
    if x.ncols() != beta.len() {
        return Err(Error::dimension(format!(
            "X has {} columns but beta has length {}",
            x.ncols(),
            beta.len()
        )));
    }
    let mut rng = rng::stream_rng(seed, &[stream::NOISE]);
    let sd = sigma2.sqrt();
    let mut y = x.dot(beta);
    for yi in y.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *yi += sd * z;
    }
    Ok(y)
}

/// A regression problem, with ground truth attached when simulated.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub beta_true: Option<Array1<f64>>,
    pub sigma2_true: Option<f64>,
    pub support_true: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        Self::with_truth(x, y, None, None)
    }

    pub fn with_truth(
        x: Array2<f64>,
        y: Array1<f64>,
        beta_true: Option<Array1<f64>>,
        sigma2_true: Option<f64>,
    ) -> Result<Self> {
        if x.nrows() < 2 {
            return Err(Error::input("dataset needs n >= 2 rows"));
        }
        if x.ncols() < 1 {
            return Err(Error::input("dataset needs p >= 1 columns"));
        }
        if y.len() != x.nrows() {
            return Err(Error::dimension(format!(
                "outcome length {} does not match {} rows",
                y.len(),
                x.nrows()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("dataset contains non-finite entries"));
        }
        if let Some(b) = &beta_true {
            if b.len() != x.ncols() {
                return Err(Error::dimension("beta_true length does not match p"));
            }
        }
        let support_true = beta_true
            .as_ref()
            .map(|b| b.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect());
        Ok(Dataset {
            x,
            y,
            beta_true,
            sigma2_true,
            support_true,
        })
    }

    /// Full simulation pipeline: covariance -> covariates -> betas -> outcome,
    /// each stage on its own derived stream.
    pub fn simulate(
        n: usize,
        p: usize,
        cov_spec: &CovarianceSpec,
        beta_spec: &BetaSpec,
        sigma2: f64,
        seed: u64,
    ) -> Result<Self> {
        let cov = build_covariance(cov_spec, p)?;
        let x = sample_covariates(&cov, n, seed);
        let beta = generate_betas(beta_spec, p, n, seed)?;
        let y = generate_outcome(&x, &beta, sigma2, seed)?;
        Self::with_truth(x, y, Some(beta), Some(sigma2))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}
