//! FDR-controlled variable selection for Gaussian linear models.
//!
//! The crate implements the randomised-outcome mirror-statistic procedure
//! (RandMS) together with single and multiple data-splitting baselines, the
//! synthetic data generator used to evaluate them, and a scenario harness
//! that runs seeded repetition grids and the computational benchmark.

pub mod datagen;
pub mod error;
pub mod fdrctl;
pub mod fitters;
pub mod harness;
pub mod linalg;
pub mod memtrack;
pub mod metrics;
pub mod rng;

pub use datagen::{BetaScheme, BetaSpec, CovarianceFamily, CovarianceSpec, Dataset};
pub use error::{Error, Result};
pub use fdrctl::{
    ds_select, fdp_threshold, mds_select, mirror_statistic, randms_select, randomise,
    MdsResult, MirrorResult, DEFAULT_GAMMA, DEFAULT_MDS_SPLITS,
};
pub use fitters::{estimate_sigma2, lasso_cv, lasso_fit, ols_fit, LassoFit, OlsFit};
pub use harness::{
    benchmark, run_scenario, scenario_grid, sigma_sensitivity_study, ActiveSpec, BenchRecord,
    Method, RunRecord, ScenarioConfig, Sigma2Input,
};
pub use metrics::{aggregate_scores, score_selection, SelectionScore};
