//! Declarative scenario execution: grid expansion, seeded repetitions across
//! the three selection procedures, the variance-sensitivity and
//! screening-violation studies, and the computational benchmark.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{BetaScheme, BetaSpec, CovarianceSpec, Dataset};
use crate::error::{Error, Result};
use crate::fdrctl::{self, DEFAULT_MDS_SPLITS};
use crate::memtrack;
use crate::metrics::{self, SelectionScore};
use crate::rng::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RandMs,
    Ds,
    Mds,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::RandMs => "RandMS",
            Method::Ds => "DS",
            Method::Mds => "MDS",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Method::RandMs => 0x11,
            Method::Ds => 0x12,
            Method::Mds => 0x13,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveSpec {
    Count(usize),
    Fraction(f64),
}

impl ActiveSpec {
    pub fn resolve(&self, p: usize) -> Result<usize> {
        match self {
            ActiveSpec::Count(c) => Ok(*c),
            ActiveSpec::Fraction(f) => {
                if !(0.0..=1.0).contains(f) {
                    return Err(Error::config(format!("active fraction {f} outside [0,1]")));
                }
                Ok((f * p as f64).round() as usize)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma2Input {
    Estimate,
    Fixed(f64),
}

/// One simulation cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub n: usize,
    pub p: usize,
    pub active: ActiveSpec,
    pub covariance: CovarianceSpec,
    pub betas: BetaScheme,
    pub sigma2_true: f64,
    pub sigma2_input: Sigma2Input,
    pub q: f64,
    pub gamma: f64,
    pub methods: Vec<Method>,
    #[serde(default = "default_mds_splits")]
    pub mds_splits: usize,
    pub repetitions: usize,
    pub base_seed: u64,
}

fn default_mds_splits() -> usize {
    DEFAULT_MDS_SPLITS
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(Error::config("repetitions must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.q) || self.q == 0.0 {
            return Err(Error::config(format!("q must be in (0,1), got {}", self.q)));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods list is empty"));
        }
        self.active.resolve(self.p)?;
        Ok(())
    }

    pub fn beta_spec(&self) -> Result<BetaSpec> {
        Ok(BetaSpec {
            scheme: self.betas.clone(),
            p1: self.active.resolve(self.p)?,
        })
    }

    fn dataset_seed(&self, rep: usize) -> u64 {
        let mut h = self.base_seed;
        for b in self.id.as_bytes() {
            h = rng::derive_seed(h, &[*b as u64]);
        }
        rng::derive_seed(h, &[stream::REPETITION, rep as u64])
    }

    pub fn draw_dataset(&self, rep: usize) -> Result<Dataset> {
        Dataset::simulate(
            self.n,
            self.p,
            &self.covariance,
            &self.beta_spec()?,
            self.sigma2_true,
            self.dataset_seed(rep),
        )
    }
}

/// One repetition of one method: the CSV row unit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_id: String,
    pub method: Method,
    pub rep: usize,
    pub seed: u64,
    pub fdp: Option<f64>,
    pub tpr: Option<f64>,
    pub n_selected: Option<usize>,
    pub sigma2_used: Option<f64>,
    pub tau: Option<f64>,
    pub wall_time_s: f64,
    pub peak_mem_bytes: Option<u64>,
    pub status: String,
    // diagnostics carried for the Appendix-style studies
    pub lasso_tpr: Option<f64>,
    pub nulls_above_tau: Option<usize>,
    pub nulls_below_tau: Option<usize>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn score(&self) -> Option<SelectionScore> {
        match (self.fdp, self.tpr, self.n_selected) {
            (Some(fdp), Some(tpr), Some(n_selected)) => Some(SelectionScore {
                fdp,
                tpr,
                n_selected,
                n_true_active: 0,
                empty_support_convention: false,
            }),
            _ => None,
        }
    }
}

struct MethodOutcome {
    selected: Vec<usize>,
    sigma2_used: Option<f64>,
    tau: Option<f64>,
    lasso_tpr: Option<f64>,
    nulls_above: Option<usize>,
    nulls_below: Option<usize>,
}

fn run_method(
    method: Method,
    config: &ScenarioConfig,
    dataset: &Dataset,
    seed: u64,
) -> Result<MethodOutcome> {
    let support = dataset.support_true.clone().unwrap_or_default();
    let nulls: Vec<usize> = {
        let mut active = vec![false; dataset.p()];
        for &j in &support {
            active[j] = true;
        }
        (0..dataset.p()).filter(|&j| !active[j]).collect()
    };
    let screen_tpr = |screened: &[usize]| -> Option<f64> {
        if support.is_empty() {
            return None;
        }
        let hits = screened.iter().filter(|j| support.contains(j)).count();
        Some(hits as f64 / support.len() as f64)
    };
    match method {
        Method::RandMs => {
            let sigma2 = match config.sigma2_input {
                Sigma2Input::Estimate => None,
                Sigma2Input::Fixed(v) => Some(v),
            };
            let res = fdrctl::randms_select(dataset, config.q, config.gamma, sigma2, seed)?;
            let (above, below) = match res.tau {
                Some(t) => {
                    let (a, b) = fdrctl::null_symmetry_diagnostic(&res.m, &nulls, t);
                    (Some(a), Some(b))
                }
                None => (None, None),
            };
            Ok(MethodOutcome {
                lasso_tpr: screen_tpr(&res.screened),
                sigma2_used: res.sigma2_used,
                tau: res.tau,
                selected: res.selected,
                nulls_above: above,
                nulls_below: below,
            })
        }
        Method::Ds => {
            let res = fdrctl::ds_select(dataset, config.q, seed)?;
            Ok(MethodOutcome {
                lasso_tpr: screen_tpr(&res.screened),
                sigma2_used: None,
                tau: res.tau,
                selected: res.selected,
                nulls_above: None,
                nulls_below: None,
            })
        }
        Method::Mds => {
            let res = fdrctl::mds_select(dataset, config.q, config.mds_splits, seed)?;
            Ok(MethodOutcome {
                selected: res.selected,
                sigma2_used: None,
                tau: None,
                lasso_tpr: None,
                nulls_above: None,
                nulls_below: None,
            })
        }
    }
}

fn failure_record(
    config: &ScenarioConfig,
    method: Method,
    rep: usize,
    seed: u64,
    wall_time_s: f64,
    error: &Error,
) -> RunRecord {
    RunRecord {
        scenario_id: config.id.clone(),
        method,
        rep,
        seed,
        fdp: None,
        tpr: None,
        n_selected: None,
        sigma2_used: None,
        tau: None,
        wall_time_s,
        peak_mem_bytes: None,
        status: format!("failed: {error}"),
        lasso_tpr: None,
        nulls_above_tau: None,
        nulls_below_tau: None,
    }
}

/// Runs every (method, repetition) of one scenario. Stage failures are
/// captured per record instead of aborting the run; scientific outputs are
/// bit-reproducible for a fixed config.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    // derived dataset seeds must be pairwise distinct
    {
        let mut seen = std::collections::HashSet::new();
        for rep in 0..config.repetitions {
            if !seen.insert(config.dataset_seed(rep)) {
                return Err(Error::config("seed derivation collision across repetitions"));
            }
        }
    }
    let mut records: Vec<RunRecord> = (0..config.repetitions)
        .into_par_iter()
        .flat_map_iter(|rep| {
            let dataset = config.draw_dataset(rep);
            config
                .methods
                .iter()
                .map(move |&method| {
                    let seed = rng::derive_seed(config.dataset_seed(rep), &[method.tag()]);
                    let start = Instant::now();
                    let outcome = match &dataset {
                        Ok(ds) => run_method(method, config, ds, seed),
                        Err(e) => Err(e.clone()),
                    };
                    let wall_time_s = start.elapsed().as_secs_f64();
                    match (&dataset, outcome) {
                        (Ok(ds), Ok(out)) => {
                            let support = ds.support_true.clone().unwrap_or_default();
                            let score =
                                metrics::score_selection(&out.selected, &support, ds.p())
                                    .expect("selection indices are in range");
                            RunRecord {
                                scenario_id: config.id.clone(),
                                method,
                                rep,
                                seed,
                                fdp: Some(score.fdp),
                                tpr: Some(score.tpr),
                                n_selected: Some(score.n_selected),
                                sigma2_used: out.sigma2_used,
                                tau: out.tau,
                                wall_time_s,
                                peak_mem_bytes: None,
                                status: "ok".to_string(),
                                lasso_tpr: out.lasso_tpr,
                                nulls_above_tau: out.nulls_above,
                                nulls_below_tau: out.nulls_below,
                            }
                        }
                        (Err(e), _) => failure_record(config, method, rep, seed, wall_time_s, e),
                        (_, Err(ref e)) => failure_record(config, method, rep, seed, wall_time_s, e),
                    }
                })
                .collect::<Vec<_>>()
                .into_iter()
        })
        .collect();
    let method_rank = |m: Method| config.methods.iter().position(|&x| x == m).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (method_rank(r.method), r.rep));
    Ok(records)
}

/// Cartesian expansion of named parameter sweeps over a base scenario.
/// Ordering is stable (later sweep names vary fastest) and scenario ids are
/// unique by construction.
pub fn scenario_grid(
    base: &ScenarioConfig,
    sweeps: &[(String, Vec<f64>)],
) -> Result<Vec<ScenarioConfig>> {
    fn apply(config: &mut ScenarioConfig, name: &str, value: f64) -> Result<()> {
        match name {
            "rho" => config.covariance.rho = value,
            "delta" => match &mut config.betas {
                BetaScheme::NormalScaled { delta } => *delta = value,
                BetaScheme::FixedPool { .. } => {
                    return Err(Error::config(
                        "sweep field 'delta' requires normal_scaled betas",
                    ))
                }
            },
            "p1" => config.active = ActiveSpec::Count(value as usize),
            "active_fraction" => config.active = ActiveSpec::Fraction(value),
            "n" => config.n = value as usize,
            "p" => config.p = value as usize,
            "q" => config.q = value,
            "gamma" => config.gamma = value,
            "sigma2_true" => config.sigma2_true = value,
            "sigma2_fixed" => config.sigma2_input = Sigma2Input::Fixed(value),
            "mds_splits" => config.mds_splits = value as usize,
            "repetitions" => config.repetitions = value as usize,
            other => {
                return Err(Error::config(format!("unknown sweep field '{other}'")));
            }
        }
        Ok(())
    }

    let mut configs = vec![base.clone()];
    for (name, values) in sweeps {
        if values.is_empty() {
            return Err(Error::config(format!("sweep '{name}' has no values")));
        }
        let mut next = Vec::with_capacity(configs.len() * values.len());
        for cfg in &configs {
            for &v in values {
                let mut c = cfg.clone();
                apply(&mut c, name, v)?;
                c.id = format!("{}[{}={}]", cfg.id, name, v);
                next.push(c);
            }
        }
        configs = next;
    }
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaStudyRow {
    pub sigma2_input: f64,
    pub mean_fdr: f64,
    pub mean_tpr: f64,
    pub mean_selected_fraction: f64,
    pub repetitions_used: usize,
}

/// Variance-sensitivity sweep: RandMS with a fixed sigma2 fed into the
/// randomisation, over a grid of values, holding the true variance constant.
pub fn sigma_sensitivity_study(
    base: &ScenarioConfig,
    sigma2_inputs: &[f64],
) -> Result<(Vec<SigmaStudyRow>, Vec<RunRecord>)> {
    let mut rows = Vec::new();
    let mut all_records = Vec::new();
    for &value in sigma2_inputs {
        let mut cfg = base.clone();
        cfg.id = format!("{}[sigma2_input={}]", base.id, value);
        cfg.sigma2_input = Sigma2Input::Fixed(value);
        cfg.methods = vec![Method::RandMs];
        let records = run_scenario(&cfg)?;
        let ok: Vec<&RunRecord> = records.iter().filter(|r| r.is_ok()).collect();
        if ok.is_empty() {
            return Err(Error::input(format!(
                "all repetitions failed at sigma2_input = {value}"
            )));
        }
        let mean = |f: fn(&RunRecord) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64;
        rows.push(SigmaStudyRow {
            sigma2_input: value,
            mean_fdr: mean(|r| r.fdp.unwrap_or(0.0)),
            mean_tpr: mean(|r| r.tpr.unwrap_or(0.0)),
            mean_selected_fraction: ok
                .iter()
                .map(|r| r.n_selected.unwrap_or(0) as f64 / base.p as f64)
                .sum::<f64>()
                / ok.len() as f64,
            repetitions_used: ok.len(),
        });
        all_records.extend(records);
    }
    Ok((rows, all_records))
}

/// Default configuration of the stressed screening design: n = 200,
/// p = 1000, 50 active coefficients in {-1, 1}, rho = 0.5.
pub fn screening_violation_config(repetitions: usize, base_seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        id: "screening_violation".to_string(),
        n: 200,
        p: 1000,
        active: ActiveSpec::Count(50),
        covariance: CovarianceSpec::toeplitz_block(0.5, 100),
        betas: BetaScheme::FixedPool {
            pool: vec![-1.0, 1.0],
        },
        sigma2_true: 1.0,
        sigma2_input: Sigma2Input::Fixed(1.0),
        q: 0.1,
        gamma: 1.0,
        methods: vec![Method::RandMs],
        mds_splits: DEFAULT_MDS_SPLITS,
        repetitions,
        base_seed,
    }
}

/// Joint per-repetition distribution of screening-stage power, achieved FDP
/// and the null-mirror counts around the threshold.
pub fn screening_violation_study(config: &ScenarioConfig) -> Result<Vec<RunRecord>> {
    let mut cfg = config.clone();
    cfg.methods = vec![Method::RandMs];
    run_scenario(&cfg)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRecord {
    pub p: usize,
    pub method: Method,
    pub rep: usize,
    pub wall_time_s: f64,
    pub alloc_total_bytes: u64,
    pub alloc_peak_bytes: u64,
    pub mem_method: String,
}

/// Timing and memory ladder: fixed n and p1, increasing p, RandMS as one
/// full randomised run per repetition versus MDS as `splits` data splits
/// plus aggregation. Runs sequentially so the measurements are clean.
pub fn benchmark(
    p_values: &[usize],
    n: usize,
    p1: usize,
    splits: usize,
    repetitions: usize,
    base_seed: u64,
) -> Result<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &p in p_values {
        for rep in 0..repetitions {
            let ds = Dataset::simulate(
                n,
                p,
                &CovarianceSpec::toeplitz_block(0.5, 100),
                &BetaSpec::fixed_pool(BetaSpec::standard_pool(), p1),
                1.0,
                rng::derive_seed(base_seed, &[p as u64, rep as u64]),
            )?;
            let seed = rng::derive_seed(base_seed, &[p as u64, rep as u64, 0x99]);
            for method in [Method::RandMs, Method::Mds] {
                let start = Instant::now();
                let (result, mem) = memtrack::measure(|| match method {
                    Method::RandMs => {
                        fdrctl::randms_select(&ds, 0.1, 1.0, None, seed).map(|r| r.selected)
                    }
                    Method::Mds => {
                        fdrctl::mds_select(&ds, 0.1, splits, seed).map(|r| r.selected)
                    }
                    Method::Ds => unreachable!(),
                });
                let wall_time_s = start.elapsed().as_secs_f64();
                result?;
                out.push(BenchRecord {
                    p,
                    method,
                    rep,
                    wall_time_s,
                    alloc_total_bytes: mem.allocated_total_bytes,
                    alloc_peak_bytes: mem.peak_bytes,
                    mem_method: mem.method,
                });
            }
        }
    }
    Ok(out)
}
