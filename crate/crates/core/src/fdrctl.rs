//! FDR-controlled selection: mirror-statistic construction, the FDP
//! threshold search, the randomised-outcome procedure (RandMS) and the
//! data-splitting baselines (DS, MDS), plus the null-symmetry diagnostic.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::fitters::{self, lasso_cv, ols_fit, OlsFit, DEFAULT_CV_FOLDS, DEFAULT_GRID_SIZE};
use crate::rng::{self, stream};

pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_MDS_SPLITS: usize = 50;
const CI_LEVEL: f64 = 0.95;

/// Two Gaussian views of the same outcome: u carries the screening
/// information, v the inference information, independent by construction.
#[derive(Debug, Clone)]
pub struct RandomisedOutcomes {
    pub u: Array1<f64>,
    pub v: Array1<f64>,
    pub gamma: f64,
    pub sigma2_used: f64,
    pub w_seed: u64,
}

impl RandomisedOutcomes {
    /// (u + gamma v) / (1 + gamma) recovers y exactly.
    pub fn reconstruct(&self) -> Array1<f64> {
        let g = self.gamma;
        Array1::from_iter(
            self.u
                .iter()
                .zip(self.v.iter())
                .map(|(u, v)| (u + g * v) / (1.0 + g)),
        )
    }
}

/// u = y + w and v = y - w / gamma with w ~ N(0, sigma2 * gamma * I).
pub fn randomise(y: &Array1<f64>, sigma2: f64, gamma: f64, seed: u64) -> Result<RandomisedOutcomes> {
    if sigma2 <= 0.0 {
        return Err(Error::config(format!("sigma2 must be positive, got {sigma2}")));
    }
    if gamma <= 0.0 {
        return Err(Error::config(format!("gamma must be positive, got {gamma}")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("outcome contains non-finite values"));
    }
    let w_seed = rng::derive_seed(seed, &[stream::RANDOMISATION]);
    let mut rng = rng::stream_rng(seed, &[stream::RANDOMISATION]);
    let sd = (sigma2 * gamma).sqrt();
    let mut u = Array1::<f64>::zeros(y.len());
    let mut v = Array1::<f64>::zeros(y.len());
    for i in 0..y.len() {
        let w: f64 = sd * rng.sample::<f64, _>(StandardNormal);
        u[i] = y[i] + w;
        v[i] = y[i] - w / gamma;
    }
    Ok(RandomisedOutcomes {
        u,
        v,
        gamma,
        sigma2_used: sigma2,
        w_seed,
    })
}

/// M = sign(b1 * b2) * (|b1| + |b2|), with sign(0) = 0 so a zero estimate in
/// either stage contributes nothing.
pub fn mirror_statistic(b1: f64, b2: f64) -> f64 {
    let prod = b1 * b2;
    if prod == 0.0 {
        0.0
    } else {
        prod.signum() * (b1.abs() + b2.abs())
    }
}

/// Smallest threshold whose estimated false discovery proportion stays at or
/// below `q`, searched over the distinct nonzero magnitudes of `m` with the
/// strict counts #{m < -t} / (#{m > t} v 1).
///
/// Selection keeps every feature with `m_j >= tau`; ties at the threshold are
/// included so a uniformly positive mirror vector selects everything. When no
/// threshold yields a nonempty selection the result is absent.
pub fn fdp_threshold(m: &[f64], q: f64) -> Result<(Option<f64>, f64)> {
    if !(0.0..1.0).contains(&q) || q == 0.0 {
        return Err(Error::config(format!("q must be in (0,1), got {q}")));
    }
    let mut pos: Vec<f64> = m.iter().copied().filter(|v| *v > 0.0).collect();
    let mut neg_abs: Vec<f64> = m.iter().copied().filter(|v| *v < 0.0).map(f64::abs).collect();
    pos.sort_unstable_by(f64::total_cmp);
    neg_abs.sort_unstable_by(f64::total_cmp);
    let mut candidates: Vec<f64> = pos.iter().chain(neg_abs.iter()).copied().collect();
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();
    for t in candidates {
        // counts strictly beyond t on each side
        let den = pos.len() - pos.partition_point(|v| *v <= t);
        let num = neg_abs.len() - neg_abs.partition_point(|v| *v <= t);
        let fdp = num as f64 / (den.max(1)) as f64;
        if fdp <= q {
            // nonempty selection means some positive m_j >= t
            let n_selected = pos.len() - pos.partition_point(|v| *v < t);
            if n_selected == 0 {
                return Ok((None, 0.0));
            }
            return Ok((Some(t), fdp));
        }
    }
    Ok((None, 0.0))
}

fn selection_at(m: &[f64], tau: f64) -> Vec<usize> {
    m.iter()
        .enumerate()
        .filter(|(_, v)| **v >= tau)
        .map(|(j, _)| j)
        .collect()
}

/// Outcome of a mirror-statistic selection run.
#[derive(Debug, Clone)]
pub struct MirrorResult {
    /// Per-feature mirror statistics; 0 for features the screening stage dropped.
    pub m: Array1<f64>,
    pub tau: Option<f64>,
    pub selected: Vec<usize>,
    pub q_target: f64,
    pub fdp_at_tau: f64,
    /// Features surviving the screening stage.
    pub screened: Vec<usize>,
    /// Residual variance fed into the randomisation, when applicable.
    pub sigma2_used: Option<f64>,
    /// Inference-stage fit over the screened columns (in `screened` order).
    pub stage2: Option<OlsFit>,
    pub warnings: Vec<String>,
}

impl MirrorResult {
    fn empty(p: usize, q: f64, sigma2_used: Option<f64>, screened: Vec<usize>, warnings: Vec<String>) -> Self {
        MirrorResult {
            m: Array1::zeros(p),
            tau: None,
            selected: Vec::new(),
            q_target: q,
            fdp_at_tau: 0.0,
            screened,
            sigma2_used,
            stage2: None,
            warnings,
        }
    }
}

/// Two-stage mirror construction shared by RandMS and DS: screen on
/// (x1, y1) with the CV-tuned LASSO, infer on (x2, y2) with OLS over the
/// screened columns, then threshold the mirror statistics.
fn mirror_two_stage(
    p: usize,
    x1: &Array2<f64>,
    y1: &Array1<f64>,
    x2: &Array2<f64>,
    y2: &Array1<f64>,
    q: f64,
    sigma2_used: Option<f64>,
    seed: u64,
) -> Result<MirrorResult> {
    if !(0.0..1.0).contains(&q) || q == 0.0 {
        return Err(Error::config(format!("q must be in (0,1), got {q}")));
    }
    let screen_fit = lasso_cv(x1, y1, DEFAULT_CV_FOLDS, DEFAULT_GRID_SIZE, seed)?;
    let mut warnings = screen_fit.warnings.clone();
    let mut screened = screen_fit.nonzero_indices();
    if screened.is_empty() {
        return Ok(MirrorResult::empty(p, q, sigma2_used, screened, warnings));
    }

    // OLS feasibility guard: cap the screened set at n2 - 2 columns, keeping
    // the largest LASSO coefficients.
    let n2 = x2.nrows();
    let cap = n2.saturating_sub(2);
    if screened.len() >= cap.max(1) && screened.len() > cap {
        warnings.push(format!(
            "screened set of {} exceeds OLS capacity; truncated to the {} largest LASSO coefficients",
            screened.len(),
            cap
        ));
        screened.sort_by(|a, b| {
            screen_fit.coefficients[*b]
                .abs()
                .total_cmp(&screen_fit.coefficients[*a].abs())
        });
        screened.truncate(cap);
        screened.sort_unstable();
        if screened.is_empty() {
            return Ok(MirrorResult::empty(p, q, sigma2_used, screened, warnings));
        }
    }

    let x2_sub = x2.select(Axis(1), &screened);
    let stage2 = ols_fit(&x2_sub, y2, CI_LEVEL)?;

    let mut m = Array1::<f64>::zeros(p);
    for (r, &j) in screened.iter().enumerate() {
        m[j] = mirror_statistic(screen_fit.coefficients[j], stage2.coefficients[r]);
    }
    let (tau, fdp_at_tau) = fdp_threshold(m.as_slice().unwrap(), q)?;
    let selected = tau.map_or_else(Vec::new, |t| selection_at(m.as_slice().unwrap(), t));
    Ok(MirrorResult {
        m,
        tau,
        selected,
        q_target: q,
        fdp_at_tau,
        screened,
        sigma2_used,
        stage2: Some(stage2),
        warnings,
    })
}

/// Randomisation + mirror statistic: one run on the full dataset.
///
/// When `sigma2` is absent the residual variance is first estimated from the
/// CV-tuned LASSO on the original outcome, and the estimate is recorded.
pub fn randms_select(
    dataset: &Dataset,
    q: f64,
    gamma: f64,
    sigma2: Option<f64>,
    seed: u64,
) -> Result<MirrorResult> {
    let sigma2_used = match sigma2 {
        Some(v) => {
            if v <= 0.0 {
                return Err(Error::config(format!("sigma2 must be positive, got {v}")));
            }
            v
        }
        None => {
            let est = fitters::estimate_sigma2(
                &dataset.x,
                &dataset.y,
                DEFAULT_CV_FOLDS,
                rng::derive_seed(seed, &[stream::SIGMA]),
            )?;
            est.value.max(1e-12)
        }
    };
    let rand = randomise(&dataset.y, sigma2_used, gamma, seed)?;
    mirror_two_stage(
        dataset.p(),
        &dataset.x,
        &rand.u,
        &dataset.x,
        &rand.v,
        q,
        Some(sigma2_used),
        rng::derive_seed(seed, &[stream::SCREEN]),
    )
}

/// Single data split: screen on one seeded half of the rows, infer on the other.
pub fn ds_select(dataset: &Dataset, q: f64, seed: u64) -> Result<MirrorResult> {
    let n = dataset.n();
    if n < 4 {
        return Err(Error::input("data splitting needs n >= 4"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut split_rng = rng::stream_rng(seed, &[stream::SPLIT]);
    order.shuffle(&mut split_rng);
    let half = n / 2;
    let (first, second) = order.split_at(half);
    let mut first = first.to_vec();
    let mut second = second.to_vec();
    first.sort_unstable();
    second.sort_unstable();
    let x1 = dataset.x.select(Axis(0), &first);
    let y1 = dataset.y.select(Axis(0), &first);
    let x2 = dataset.x.select(Axis(0), &second);
    let y2 = dataset.y.select(Axis(0), &second);
    mirror_two_stage(
        dataset.p(),
        &x1,
        &y1,
        &x2,
        &y2,
        q,
        None,
        rng::derive_seed(seed, &[stream::SCREEN]),
    )
}

/// Multiple data splitting with per-feature inclusion-rate aggregation.
#[derive(Debug, Clone)]
pub struct MdsResult {
    pub inclusion_rates: Array1<f64>,
    pub selected: Vec<usize>,
    pub splits: usize,
    pub per_split_selections: Vec<Vec<usize>>,
}

/// Runs `splits` independent data splits and aggregates: each split
/// contributes 1/|selection| to its selected features, rates are averaged,
/// then the largest low-rate prefix summing to at most `q` is discarded and
/// every remaining feature with a positive rate is kept.
pub fn mds_select(dataset: &Dataset, q: f64, splits: usize, seed: u64) -> Result<MdsResult> {
    if splits < 2 {
        return Err(Error::config(format!("mds needs at least 2 splits, got {splits}")));
    }
    let per_split_selections: Vec<Vec<usize>> = (0..splits)
        .into_par_iter()
        .map(|s| {
            ds_select(dataset, q, rng::derive_seed(seed, &[stream::SPLIT, s as u64]))
                .map(|r| r.selected)
        })
        .collect::<Result<Vec<_>>>()?;

    let p = dataset.p();
    let mut rates = Array1::<f64>::zeros(p);
    for sel in &per_split_selections {
        if sel.is_empty() {
            continue;
        }
        let w = 1.0 / sel.len() as f64;
        for &j in sel {
            rates[j] += w;
        }
    }
    rates.mapv_inplace(|v| v / splits as f64);

    // Discard the largest ascending-rate prefix whose rates sum to <= q.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|a, b| rates[*a].total_cmp(&rates[*b]).then(a.cmp(b)));
    let mut acc = 0.0;
    let mut cut = 0;
    for (pos, &j) in order.iter().enumerate() {
        acc += rates[j];
        if acc <= q {
            cut = pos + 1;
        } else {
            break;
        }
    }
    let mut selected: Vec<usize> = order[cut..]
        .iter()
        .copied()
        .filter(|&j| rates[j] > 0.0)
        .collect();
    selected.sort_unstable();
    Ok(MdsResult {
        inclusion_rates: rates,
        selected,
        splits,
        per_split_selections,
    })
}

/// Counts of true-null mirror statistics above `tau` and below `-tau`.
/// Under the symmetry assumption the two counts should be comparable.
pub fn null_symmetry_diagnostic(m: &Array1<f64>, null_set: &[usize], tau: f64) -> (usize, usize) {
    let above = null_set.iter().filter(|&&j| m[j] > tau).count();
    let below = null_set.iter().filter(|&&j| m[j] < -tau).count();
    (above, below)
}
